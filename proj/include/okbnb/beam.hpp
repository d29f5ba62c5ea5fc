#pragma once

#include <unordered_map>
#include <unordered_set>

#include "okbnb/core.hpp"

namespace okbnb {

struct SupportKeyHash {
    size_t operator()(const IndexSet& s) const {
        size_t h = 1469598103934665603ull;
        for (int j : s) {
            h ^= static_cast<size_t>(j) + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        }
        return h;
    }
};

// Memo of ridge fits keyed by (sorted) support, shared across all beam-search
// calls of a solver run so repeated supports are never refit. Fits depend on
// lambda2, so a cache must not be reused across different penalties; the tag
// guards against that.
class SupportCache {
  public:
    const SparseSolution& fit_or_get(const ProblemData& pd, double lambda2,
                                     const IndexSet& support);
    long hits() const { return hits_; }
    long misses() const { return misses_; }
    size_t size() const { return map_.size(); }
    void clear();

  private:
    std::unordered_map<IndexSet, SparseSolution, SupportKeyHash> map_;
    long hits_ = 0;
    long misses_ = 0;
    double lambda2_tag_ = 0.0;
    bool tagged_ = false;
};

using SeenSupports = std::unordered_set<IndexSet, SupportKeyHash>;

// One beam-search expansion step: scores every coordinate outside
// sol.support and avoid by squared gradient over curvature, keeps the
// cfg.beam_width best (ties to the lower index), and refits each enlarged
// support through the cache. Supports already present in `seen` are skipped
// and newly produced ones are added to it.
std::vector<SparseSolution> expand_support_by_one(const ProblemData& pd,
                                                  const SolverConfig& cfg,
                                                  const SparseSolution& sol,
                                                  SupportCache& cache,
                                                  const IndexSet& avoid,
                                                  SeenSupports& seen);

// Beam search from the forced-in set up to size k, avoiding the forced-out
// set. Pool is truncated to cfg.beam_width each level, ranked by loss with
// lexicographic support order breaking ties.
SparseSolution upper_solve(const ProblemData& pd, const SolverConfig& cfg,
                           const IndexSet& select, const IndexSet& avoid,
                           SupportCache& cache);

}  // namespace okbnb
