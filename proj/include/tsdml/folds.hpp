#ifndef TSDML_FOLDS_HPP
#define TSDML_FOLDS_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace tsdml {

/// Half-open index range [begin, end).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
    bool contains(std::size_t t) const { return t >= begin && t < end; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Adjacent, non-overlapping blocks covering {0..T-1}; block k precedes
/// block k+1 in time and lengths differ by at most one.
struct BlockPartition {
    std::size_t T = 0;
    std::size_t K = 0;
    std::vector<IndexRange> blocks;
};

BlockPartition partition(std::size_t T, std::size_t K);

enum class Scheme { rcf, nlo };
enum class Direction { forward, reversed, both };

std::string to_string(Scheme s);
std::string to_string(Direction d);
Scheme scheme_from_string(const std::string& s);

struct Fold {
    IndexRange main;
    std::vector<IndexRange> auxiliary; // one contiguous range, or two flanking main
    Direction direction = Direction::both;
    std::size_t auxiliary_size = 0;
};

struct FoldPlan {
    Scheme scheme = Scheme::rcf;
    std::size_t T = 0;
    std::size_t K = 0;
    std::vector<Fold> folds;
};

/// Reverse cross-fitting: each fold trains on the larger contiguous
/// complement of its main block (both sides on a tie), so early folds train
/// on time-reversed future data and late folds on past data.
FoldPlan rcf_plan(const BlockPartition& part);

/// Neighbours-left-out: each fold trains on all blocks except the main block
/// and its immediate neighbours.
FoldPlan nlo_plan(const BlockPartition& part);

/// Mean over folds of |auxiliary| / T.
double sample_usage(const FoldPlan& plan);
/// Sum over folds of |auxiliary|; exact integer for usage arithmetic.
std::uint64_t auxiliary_total(const FoldPlan& plan);

nlohmann::json to_json(const FoldPlan& plan);

} // namespace tsdml

#endif
