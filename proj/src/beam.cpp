#include "okbnb/beam.hpp"

#include <algorithm>
#include <cmath>

namespace okbnb {

const SparseSolution& SupportCache::fit_or_get(const ProblemData& pd, double lambda2,
                                               const IndexSet& support) {
    if (!tagged_) {
        lambda2_tag_ = lambda2;
        tagged_ = true;
    } else if (lambda2 != lambda2_tag_) {
        throw InvalidInput("SupportCache reused with a different lambda2");
    }
    auto it = map_.find(support);
    if (it != map_.end()) {
        ++hits_;
        return it->second;
    }
    ++misses_;
    auto [ins, ok] = map_.emplace(support, ridge_fit_support(pd, lambda2, support));
    (void)ok;
    return ins->second;
}

void SupportCache::clear() {
    map_.clear();
    hits_ = misses_ = 0;
    tagged_ = false;
}

namespace {

bool better(const SparseSolution& a, const SparseSolution& b) {
    if (a.loss != b.loss) return a.loss < b.loss;
    return a.support < b.support;
}

}  // namespace

std::vector<SparseSolution> expand_support_by_one(const ProblemData& pd,
                                                  const SolverConfig& cfg,
                                                  const SparseSolution& sol,
                                                  SupportCache& cache,
                                                  const IndexSet& avoid,
                                                  SeenSupports& seen) {
    // gradient restricted to candidate coordinates; beta is zero off-support
    Vec g = -2.0 * pd.xty;
    for (size_t i = 0; i < sol.support.size(); ++i)
        g += 2.0 * sol.coeffs[i] * pd.gram.col(sol.support[i]);

    struct Scored {
        double score;
        int j;
    };
    std::vector<Scored> cand;
    cand.reserve(pd.p);
    for (int j = 0; j < pd.p; ++j) {
        if (contains(sol.support, j) || contains(avoid, j)) continue;
        double denom = pd.gram(j, j) + cfg.lambda2;
        double score = denom > 0.0 ? g[j] * g[j] / denom : 0.0;
        cand.push_back({score, j});
    }
    auto by_score = [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.j < b.j;
    };
    int take = std::min<int>(cfg.beam_width, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + take, cand.end(), by_score);

    std::vector<SparseSolution> out;
    out.reserve(take);
    for (int i = 0; i < take; ++i) {
        IndexSet grown = set_union(sol.support, cand[i].j);
        if (!seen.insert(grown).second) continue;  // already produced this level
        out.push_back(cache.fit_or_get(pd, cfg.lambda2, grown));
    }
    return out;
}

SparseSolution upper_solve(const ProblemData& pd, const SolverConfig& cfg,
                           const IndexSet& select, const IndexSet& avoid,
                           SupportCache& cache) {
    if (cfg.k > pd.p - static_cast<int>(avoid.size()))
        throw InfeasibleConfig("upper_solve: fewer than k coordinates available");
    if (static_cast<int>(select.size()) > cfg.k)
        throw InfeasibleConfig("upper_solve: select set larger than k");
    for (int j : select)
        if (contains(avoid, j)) throw InfeasibleConfig("upper_solve: select meets avoid");

    std::vector<SparseSolution> pool{cache.fit_or_get(pd, cfg.lambda2, select)};
    SeenSupports seen;

    for (int t = static_cast<int>(select.size()); t < cfg.k; ++t) {
        std::vector<SparseSolution> grown;
        for (const SparseSolution& member : pool) {
            auto expanded = expand_support_by_one(pd, cfg, member, cache, avoid, seen);
            grown.insert(grown.end(), expanded.begin(), expanded.end());
        }
        if (grown.empty()) break;  // every candidate support was already seen
        std::sort(grown.begin(), grown.end(), better);
        if (static_cast<int>(grown.size()) > cfg.beam_width)
            grown.resize(cfg.beam_width);
        pool = std::move(grown);
    }

    return *std::min_element(pool.begin(), pool.end(), better);
}

}  // namespace okbnb
