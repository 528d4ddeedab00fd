#ifndef TSDML_RNG_HPP
#define TSDML_RNG_HPP

#include <cstdint>
#include <vector>

namespace tsdml {

/// Counter-based random stream (Philox4x32-10). A stream is fully determined
/// by (seed, stream_id): replication r of a run seeded with s always sees the
/// same draw sequence, no matter how replications are scheduled over threads.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    /// Uniform on (0, 1].
    double next_double();
    double uniform(double a, double b);

    /// Standard normal via Box-Muller (pairs cached).
    double normal();
    std::vector<double> normals(std::size_t n);

    /// Gamma(shape, 1) via Marsaglia-Tsang; shape > 0.
    double gamma(double shape);
    /// Beta(a, b) from two gamma draws; a, b > 0.
    double beta(double a, double b);

private:
    void refill();

    std::uint64_t seed_ = 0;
    std::uint64_t stream_id_ = 0;
    std::uint64_t counter_ = 0;
    std::uint32_t buffer_[4] = {0, 0, 0, 0};
    int buffer_pos_ = 4;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

} // namespace tsdml

#endif
