#include "tsdml/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "tsdml/errors.hpp"

namespace tsdml {

double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double population_variance(std::span<const double> v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::vector<double> ols_solve(const Matrix& x, std::span<const double> y) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    if (y.size() != n) throw std::invalid_argument("ols_solve: length of y must match rows(X)");
    if (n < p) throw std::invalid_argument("ols_solve: need rows(X) >= cols(X)");
    if (!x.all_finite()) throw NumericalError("ols_solve: non-finite entries in X");
    for (double v : y)
        if (!std::isfinite(v)) throw NumericalError("ols_solve: non-finite entries in y");

    // Householder QR, reducing [X | y] in place.
    Matrix a = x;
    std::vector<double> rhs(y.begin(), y.end());
    std::vector<double> rdiag(p, 0.0);

    for (std::size_t k = 0; k < p; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < n; ++i) norm += a(i, k) * a(i, k);
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            rdiag[k] = 0.0;
            continue;
        }
        if (a(k, k) > 0.0) norm = -norm;
        for (std::size_t i = k; i < n; ++i) a(i, k) /= norm;
        a(k, k) -= 1.0;

        for (std::size_t j = k + 1; j < p; ++j) {
            double s = 0.0;
            for (std::size_t i = k; i < n; ++i) s += a(i, k) * a(i, j);
            s /= a(k, k);
            for (std::size_t i = k; i < n; ++i) a(i, j) += s * a(i, k);
        }
        double s = 0.0;
        for (std::size_t i = k; i < n; ++i) s += a(i, k) * rhs[i];
        s /= a(k, k);
        for (std::size_t i = k; i < n; ++i) rhs[i] += s * a(i, k);
        rdiag[k] = norm;
    }

    double dmax = 0.0;
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < p; ++k) {
        const double d = std::abs(rdiag[k]);
        dmax = std::max(dmax, d);
        dmin = std::min(dmin, d);
    }
    const double cond = dmin == 0.0 ? std::numeric_limits<double>::infinity() : dmax / dmin;
    if (!(cond < 1e12)) {
        std::ostringstream msg;
        msg << "ols_solve: rank-deficient design, estimated condition number " << cond;
        throw NumericalError(msg.str());
    }

    std::vector<double> beta(p, 0.0);
    for (std::size_t kk = p; kk-- > 0;) {
        double s = rhs[kk];
        for (std::size_t j = kk + 1; j < p; ++j) s -= a(kk, j) * beta[j];
        beta[kk] = s / rdiag[kk];
    }
    return beta;
}

double spectral_radius(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("spectral_radius: matrix must be square");
    const std::size_t n = a.rows();
    if (n == 0) return 0.0;

    const double norm0 = a.frobenius_norm();
    if (norm0 == 0.0) return 0.0;

    // b holds A^(2^m) normalized after each squaring; log_scale accumulates
    // sum 2^-i * log(s_i) so that the Gelfand estimate is exp(log_scale).
    Matrix b = a;
    b *= 1.0 / norm0;
    double log_scale = std::log(norm0);
    double prev = std::numeric_limits<double>::infinity();
    double weight = 0.5;

    for (int iter = 0; iter < 64; ++iter) {
        b = b * b;
        const double s = b.frobenius_norm();
        if (s == 0.0) return 0.0; // nilpotent
        b *= 1.0 / s;
        log_scale += weight * std::log(s);
        weight *= 0.5;
        const double est = std::exp(log_scale);
        if (std::abs(est - prev) <= 1e-13 * est) return est;
        prev = est;
    }
    return std::exp(log_scale);
}

Matrix lyapunov_solve(const Matrix& a, const Matrix& q) {
    if (a.rows() != a.cols() || q.rows() != q.cols() || a.rows() != q.rows())
        throw std::invalid_argument("lyapunov_solve: shape mismatch");
    Matrix s = q;
    Matrix ak = a;
    // S_{m+1} = S_m + A_m S_m A_m', A_{m+1} = A_m^2: partial sums of
    // sum_k A^k Q A^k' with quadratic convergence.
    for (int iter = 0; iter < 128; ++iter) {
        const double anorm = ak.frobenius_norm();
        if (!(anorm < 1.0e6) && iter > 4) {
            throw NumericalError("lyapunov_solve: iteration diverging, spectral radius >= 1?");
        }
        const Matrix incr = ak * s * ak.transposed();
        s = s + incr;
        if (incr.max_abs() <= 1e-12 * (1.0 + s.max_abs())) return s;
        ak = ak * ak;
    }
    throw NumericalError("lyapunov_solve: no convergence; spectral radius too close to 1");
}

Matrix cholesky(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("cholesky: matrix must be square");
    const std::size_t n = a.rows();
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (s <= 0.0) throw NumericalError("cholesky: matrix not positive definite");
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return l;
}

std::vector<double> solve_spd(const Matrix& a, std::span<const double> b) {
    const Matrix l = cholesky(a);
    const std::size_t n = a.rows();
    if (b.size() != n) throw std::invalid_argument("solve_spd: shape mismatch");
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

Standardizer Standardizer::fit(const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    if (n == 0) throw std::invalid_argument("Standardizer: empty matrix");
    Standardizer s;
    s.means_.assign(p, 0.0);
    s.scales_.assign(p, 1.0);
    s.constant_.assign(p, false);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = x.row(i);
        for (std::size_t j = 0; j < p; ++j) s.means_[j] += row[j];
    }
    for (std::size_t j = 0; j < p; ++j) s.means_[j] /= static_cast<double>(n);
    std::vector<double> ss(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = x.row(i);
        for (std::size_t j = 0; j < p; ++j) {
            const double d = row[j] - s.means_[j];
            ss[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < p; ++j) {
        const double sd = std::sqrt(ss[j] / static_cast<double>(n));
        if (sd > 0.0) {
            s.scales_[j] = sd;
        } else {
            s.scales_[j] = 1.0;
            s.constant_[j] = true;
        }
    }
    return s;
}

Matrix Standardizer::transform(const Matrix& x) const {
    if (x.cols() != means_.size()) throw std::invalid_argument("Standardizer: column mismatch");
    Matrix out = x;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        auto row = out.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - means_[j]) / scales_[j];
    }
    return out;
}

Matrix Standardizer::inverse_transform(const Matrix& x) const {
    if (x.cols() != means_.size()) throw std::invalid_argument("Standardizer: column mismatch");
    Matrix out = x;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        auto row = out.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] = row[j] * scales_[j] + means_[j];
    }
    return out;
}

} // namespace tsdml
