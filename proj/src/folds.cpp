#include "tsdml/folds.hpp"

#include <stdexcept>

namespace tsdml {

BlockPartition partition(std::size_t T, std::size_t K) {
    if (K < 2) throw std::invalid_argument("partition: need K >= 2");
    if (K > T) throw std::invalid_argument("partition: need K <= T");
    BlockPartition part;
    part.T = T;
    part.K = K;
    const std::size_t base = T / K;
    const std::size_t extra = T % K; // first `extra` blocks get one more observation
    std::size_t begin = 0;
    for (std::size_t k = 0; k < K; ++k) {
        const std::size_t len = base + (k < extra ? 1 : 0);
        part.blocks.push_back({begin, begin + len});
        begin += len;
    }
    return part;
}

std::string to_string(Scheme s) { return s == Scheme::rcf ? "rcf" : "nlo"; }

std::string to_string(Direction d) {
    switch (d) {
        case Direction::forward: return "forward";
        case Direction::reversed: return "reversed";
        default: return "both";
    }
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "rcf") return Scheme::rcf;
    if (s == "nlo") return Scheme::nlo;
    throw std::invalid_argument("unknown fold scheme: " + s);
}

FoldPlan rcf_plan(const BlockPartition& part) {
    if (part.K < 2) throw std::invalid_argument("rcf_plan: need K >= 2");
    FoldPlan plan;
    plan.scheme = Scheme::rcf;
    plan.T = part.T;
    plan.K = part.K;
    for (std::size_t k = 0; k < part.K; ++k) {
        const IndexRange main = part.blocks[k];
        const IndexRange left{0, main.begin};
        const IndexRange right{main.end, part.T};
        Fold fold;
        fold.main = main;
        if (left.size() > right.size()) {
            fold.auxiliary = {left};
            fold.direction = Direction::forward;
        } else if (right.size() > left.size()) {
            fold.auxiliary = {right};
            fold.direction = Direction::reversed;
        } else {
            fold.auxiliary = {left, right};
            fold.direction = Direction::both;
        }
        for (const auto& r : fold.auxiliary) fold.auxiliary_size += r.size();
        plan.folds.push_back(std::move(fold));
    }
    return plan;
}

FoldPlan nlo_plan(const BlockPartition& part) {
    if (part.K < 3) throw std::invalid_argument("nlo_plan: need K >= 3");
    FoldPlan plan;
    plan.scheme = Scheme::nlo;
    plan.T = part.T;
    plan.K = part.K;
    for (std::size_t k = 0; k < part.K; ++k) {
        Fold fold;
        fold.main = part.blocks[k];
        // Keep everything left of the left neighbour and right of the right one.
        if (k >= 2) fold.auxiliary.push_back({0, part.blocks[k - 1].begin});
        if (k + 2 < part.K) fold.auxiliary.push_back({part.blocks[k + 1].end, part.T});
        fold.direction = Direction::both;
        for (const auto& r : fold.auxiliary) fold.auxiliary_size += r.size();
        if (fold.auxiliary_size == 0)
            throw std::invalid_argument("nlo_plan: empty auxiliary set for fold " +
                                        std::to_string(k + 1) + "; increase K");
        plan.folds.push_back(std::move(fold));
    }
    return plan;
}

double sample_usage(const FoldPlan& plan) {
    return static_cast<double>(auxiliary_total(plan)) /
           static_cast<double>(static_cast<std::uint64_t>(plan.K) * plan.T);
}

std::uint64_t auxiliary_total(const FoldPlan& plan) {
    std::uint64_t total = 0;
    for (const auto& fold : plan.folds) total += fold.auxiliary_size;
    return total;
}

nlohmann::json to_json(const FoldPlan& plan) {
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& f : plan.folds) {
        nlohmann::json aux = nlohmann::json::array();
        for (const auto& r : f.auxiliary) aux.push_back({r.begin, r.end});
        folds.push_back({{"main", {f.main.begin, f.main.end}},
                         {"auxiliary", aux},
                         {"direction", to_string(f.direction)}});
    }
    return {{"scheme", to_string(plan.scheme)}, {"T", plan.T}, {"K", plan.K}, {"folds", folds}};
}

} // namespace tsdml
