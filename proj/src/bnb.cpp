#include "okbnb/bnb.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <limits>

namespace okbnb {

const char* to_string(BnBStatus s) {
    switch (s) {
        case BnBStatus::Optimal: return "Optimal";
        case BnBStatus::GapReached: return "GapReached";
        case BnBStatus::TimeLimit: return "TimeLimit";
        case BnBStatus::QueueExhausted: return "QueueExhausted";
    }
    return "Unknown";
}

int branch_coordinate(const ProblemData& pd, const SolverConfig& cfg,
                      const SparseSolution& sol, const IndexSet& select) {
    // Gb restricted to the support is all we need: removing coordinate j from
    // the fit changes the loss by
    //   delta_j = -2 b'(G + l2*I) e_j b_j + (G_jj + l2) b_j^2 + 2 xty_j b_j
    int best_j = -1;
    double best_delta = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < sol.support.size(); ++i) {
        int j = sol.support[i];
        if (contains(select, j)) continue;
        double bj = sol.coeffs[i];
        double gb_j = 0.0;
        for (size_t l = 0; l < sol.support.size(); ++l)
            gb_j += pd.gram(j, sol.support[l]) * sol.coeffs[l];
        gb_j += cfg.lambda2 * bj;
        double delta = -2.0 * gb_j * bj + (pd.gram(j, j) + cfg.lambda2) * bj * bj +
                       2.0 * pd.xty[j] * bj;
        if (delta > best_delta) {
            best_delta = delta;
            best_j = j;
        }
    }
    if (best_j < 0)
        throw InvalidInput("branch_coordinate: no branchable coordinate");
    return best_j;
}

namespace {

struct DepthStat {
    long created = 0;
    long solved = 0;
    double min_lower = std::numeric_limits<double>::infinity();
};

double relative_gap(double upper, double lower) {
    if (lower == -std::numeric_limits<double>::infinity())
        return std::numeric_limits<double>::infinity();
    double diff = upper - lower;
    double denom = std::abs(upper);
    if (denom == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return diff / denom;
}

// Pad a short support with the smallest unused coordinates (zero
// coefficients), so the reported solution always selects exactly k.
void pad_support_to_k(SparseSolution& sol, int p, int k) {
    if (static_cast<int>(sol.support.size()) >= k) return;
    Vec coeffs = Vec::Zero(k);
    IndexSet support = sol.support;
    for (size_t i = 0; i < sol.support.size(); ++i) coeffs[i] = sol.coeffs[i];
    for (int j = 0; j < p && static_cast<int>(support.size()) < k; ++j)
        if (!contains(sol.support, j)) support.push_back(j);
    std::sort(support.begin(), support.end());
    // realign coefficients with the sorted padded support
    Vec aligned = Vec::Zero(k);
    for (size_t i = 0; i < sol.support.size(); ++i) {
        auto it = std::lower_bound(support.begin(), support.end(), sol.support[i]);
        aligned[it - support.begin()] = sol.coeffs[i];
    }
    sol.support = std::move(support);
    sol.coeffs = std::move(aligned);
}

}  // namespace

BnBResult solve(const ProblemData& pd, const SolverConfig& cfg,
                SupportCache* shared_cache) {
    if (cfg.k < 1 || cfg.k > pd.p)
        throw InfeasibleConfig("solve: k must be in [1, p]");
    if (cfg.lambda2 < 0.0) throw InfeasibleConfig("solve: lambda2 must be >= 0");
    if (cfg.beam_width < 1) throw InfeasibleConfig("solve: beam_width must be >= 1");
    if (cfg.admm_iters < 1) throw InfeasibleConfig("solve: admm_iters must be >= 1");
    if (!(cfg.gap_tol > 0.0)) throw InfeasibleConfig("solve: gap_tol must be > 0");

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&t0]() {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    };

    EigenInfo eig = compute_eigen_info(pd);
    AdmmCache admm_cache;
    SupportCache local_cache;
    SupportCache& cache = shared_cache ? *shared_cache : local_cache;

    BnBResult res;
    res.upper = 0.0;  // loss of the zero vector
    res.lower = -std::numeric_limits<double>::infinity();
    res.best = SparseSolution{};

    std::deque<Node> queue;
    queue.push_back(Node{{}, {}, 0, 0.0});
    std::vector<DepthStat> stats(1);
    stats[0].created = 1;
    int l_unsolved = 0;

    auto record_solved = [&](int depth, double bound) {
        stats[depth].solved += 1;
        stats[depth].min_lower = std::min(stats[depth].min_lower, bound);
    };
    // once a whole depth level is solved, its minimum is a global certificate
    auto advance_depths = [&]() {
        while (l_unsolved < static_cast<int>(stats.size()) &&
               stats[l_unsolved].created > 0 &&
               stats[l_unsolved].solved == stats[l_unsolved].created) {
            res.lower = std::max(res.lower, stats[l_unsolved].min_lower);
            ++l_unsolved;
        }
    };
    auto certified = [&]() { return relative_gap(res.upper, res.lower) <= cfg.gap_tol; };
    auto fire_progress = [&]() {
        if (cfg.progress_cb && cfg.progress_interval > 0 &&
            res.nodes_processed % cfg.progress_interval == 0)
            cfg.progress_cb(Progress{res.nodes_processed, res.upper, res.lower,
                                     relative_gap(res.upper, res.lower), elapsed()});
    };

    bool timed_out = false;
    while (!queue.empty()) {
        if (cfg.time_limit_s && elapsed() > *cfg.time_limit_s) {
            timed_out = true;
            break;
        }
        Node node = std::move(queue.front());
        queue.pop_front();
        res.nodes_processed += 1;

        const int remaining = pd.p - static_cast<int>(node.avoid.size());
        const bool leaf =
            static_cast<int>(node.select.size()) == cfg.k || remaining == cfg.k;

        if (leaf) {
            IndexSet support = node.select;
            if (remaining == cfg.k && static_cast<int>(node.select.size()) < cfg.k) {
                support.clear();
                for (int j = 0; j < pd.p; ++j)
                    if (!contains(node.avoid, j)) support.push_back(j);
            }
            const SparseSolution& sol = cache.fit_or_get(pd, cfg.lambda2, support);
            record_solved(node.depth, sol.loss);
            advance_depths();
            if (sol.loss < res.upper) {
                res.upper = sol.loss;
                res.best = sol;
            }
            fire_progress();
            if (certified()) break;
            continue;
        }

        FastBound fast = fast_lower_bound(pd, cfg, node.select, node.avoid, eig);
        double bound = fast.value;
        double prune_at = res.upper - 1e-9 * std::abs(res.upper);
        if (bound < res.upper) {
            if (cfg.use_admm)
                bound = std::max(bound, admm_lower_bound(pd, cfg, node.select,
                                                         node.avoid, eig, fast,
                                                         &admm_cache));
            if (cfg.use_cmf)
                bound = std::max(bound, cmf_subgradient_bound(pd, cfg, node.select,
                                                              node.avoid, eig,
                                                              res.upper, fast));
        }
        node.lower = bound;
        record_solved(node.depth, bound);
        advance_depths();

        if (bound >= prune_at) {
            res.nodes_pruned += 1;
            fire_progress();
            if (certified()) break;
            continue;
        }

        SparseSolution cand = upper_solve(pd, cfg, node.select, node.avoid, cache);
        if (cand.loss < res.upper) {
            res.upper = cand.loss;
            res.best = cand;
        }
        fire_progress();
        if (certified()) break;

        int j = branch_coordinate(pd, cfg, cand, node.select);
        int child_depth = node.depth + 1;
        if (child_depth >= static_cast<int>(stats.size())) stats.resize(child_depth + 1);
        queue.push_back(Node{set_union(node.select, j), node.avoid, child_depth, 0.0});
        queue.push_back(Node{node.select, set_union(node.avoid, j), child_depth, 0.0});
        stats[child_depth].created += 2;
    }

    if (timed_out) {
        res.status = BnBStatus::TimeLimit;
    } else if (queue.empty()) {
        // the whole tree was enumerated; the incumbent is exact
        res.lower = res.upper;
        res.status = BnBStatus::Optimal;
    } else {
        res.status = certified() ? BnBStatus::Optimal : BnBStatus::QueueExhausted;
    }
    res.gap = relative_gap(res.upper, res.lower);

    pad_support_to_k(res.best, pd.p, cfg.k);
    res.elapsed_s = elapsed();
    return res;
}

}  // namespace okbnb
