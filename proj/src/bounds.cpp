#include "okbnb/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "okbnb/isotonic.hpp"

namespace okbnb {

EigenInfo compute_eigen_info(const ProblemData& pd) {
    Eigen::SelfAdjointEigenSolver<Mat> es(pd.gram, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("compute_eigen_info: eigen solver failed");
    const Vec& ev = es.eigenvalues();  // ascending

    EigenInfo info;
    info.lambda_min = ev[0];
    info.lambda = std::max(0.0, info.lambda_min);

    // The computed smallest eigenvalue carries an absolute error on the order
    // of eps*|G|. An overestimated shift would make G - lambda*I indefinite
    // and the dual bounds invalid, so certify positive semidefiniteness (up
    // to the unavoidable eps*|G| floor) with a Cholesky and back off if it
    // fails. On well-conditioned instances the first attempt succeeds and the
    // shift is exactly max(lambda_min, 0).
    if (info.lambda > 0.0) {
        double scale = std::max(std::abs(ev[ev.size() - 1]), std::abs(ev[0]));
        double tau = 16.0 * std::numeric_limits<double>::epsilon() * scale;
        const double backoff[] = {1.0, 1.0 - 1e-12, 1.0 - 1e-9, 1.0 - 1e-6,
                                  1.0 - 1e-4, 0.99, 0.9, 0.0};
        for (double mult : backoff) {
            double cand = info.lambda * mult;
            Mat q = pd.gram;
            q.diagonal().array() += tau - cand;
            if (Eigen::LLT<Mat>(q).info() == Eigen::Success) {
                info.lambda = cand;
                break;
            }
        }
    }
    info.lambda_max_q = std::max(0.0, ev[ev.size() - 1] - info.lambda);

    double tr = std::max(pd.gram.trace(), 0.0);
    info.q_zero = info.lambda_max_q <= 1e-10 * tr || info.lambda_max_q == 0.0;
    if (!info.q_zero) {
        double thresh = 1e-10 * info.lambda_max_q;
        info.lambda_minpos_q = info.lambda_max_q;
        for (int i = 0; i < ev.size(); ++i) {
            double s = ev[i] - info.lambda;
            if (s > thresh) {
                info.lambda_minpos_q = s;
                break;
            }
        }
    }
    return info;
}

double sum_bottom(std::vector<double> values, int m) {
    if (m < 0 || m > static_cast<int>(values.size()))
        throw InvalidInput("sum_bottom: m out of range");
    if (m == 0) return 0.0;
    std::nth_element(values.begin(), values.begin() + (m - 1), values.end());
    return std::accumulate(values.begin(), values.begin() + m, 0.0);
}

double sum_top(std::vector<double> values, int m) {
    if (m < 0 || m > static_cast<int>(values.size()))
        throw InvalidInput("sum_top: m out of range");
    if (m == 0) return 0.0;
    std::nth_element(values.begin(), values.begin() + (m - 1), values.end(),
                     std::greater<double>());
    return std::accumulate(values.begin(), values.begin() + m, 0.0);
}

namespace {

void check_node(const ProblemData& pd, const SolverConfig& cfg,
                const IndexSet& select, const IndexSet& avoid) {
    if (cfg.k < 1 || cfg.k > pd.p) throw InfeasibleConfig("k must be in [1, p]");
    if (static_cast<int>(select.size()) > cfg.k)
        throw InfeasibleConfig("select set larger than k");
    if (cfg.k > pd.p - static_cast<int>(avoid.size()))
        throw InfeasibleConfig("fewer than k coordinates remain outside avoid");
    for (int j : select)
        if (contains(avoid, j))
            throw InfeasibleConfig("select and avoid sets overlap");
}

}  // namespace

FastBound fast_lower_bound(const ProblemData& pd, const SolverConfig& cfg,
                           const IndexSet& select, const IndexSet& avoid,
                           const EigenInfo& eig) {
    check_node(pd, cfg, select, avoid);

    FastBound fb;
    fb.gamma = ridge_solve(pd, cfg.lambda2, avoid);
    double loss = evaluate_loss(pd, fb.gamma, cfg.lambda2);

    double mu = cfg.lambda2 + eig.lambda;
    int m = pd.p - static_cast<int>(avoid.size()) - cfg.k;
    std::vector<double> squares;
    squares.reserve(pd.p);
    for (int j = 0; j < pd.p; ++j)
        if (!contains(avoid, j) && !contains(select, j))
            squares.push_back(fb.gamma[j] * fb.gamma[j]);
    fb.value = loss + mu * sum_bottom(std::move(squares), m);
    return fb;
}

double saddle_bound(const ProblemData& pd, const SolverConfig& cfg, const Vec& gamma,
                    const IndexSet& select, const IndexSet& avoid,
                    const EigenInfo& eig) {
    check_node(pd, cfg, select, avoid);
    double mu = cfg.lambda2 + eig.lambda;
    if (!(mu > 0.0))
        throw InvalidInput("saddle_bound: lambda2 + lambda must be positive");

    Vec qg = pd.gram * gamma - eig.lambda * gamma;
    double quad = gamma.dot(qg);
    Vec d = pd.xty - qg;

    double sum_sel = 0.0;
    for (int j : select) sum_sel += d[j] * d[j];
    std::vector<double> free_sq;
    free_sq.reserve(pd.p);
    for (int j = 0; j < pd.p; ++j)
        if (!contains(select, j) && !contains(avoid, j)) free_sq.push_back(d[j] * d[j]);
    int slots = cfg.k - static_cast<int>(select.size());
    return -quad - (sum_sel + sum_top(std::move(free_sq), slots)) / mu;
}

namespace {

struct RestrictedSystem {
    std::vector<int> free;      // original indices, ascending
    Mat q;                      // (G - lambda*I) on free x free
    Vec xty;
    std::vector<char> is_sel;   // per free position
    std::vector<int> nonsel;    // free positions not in select
};

RestrictedSystem restrict_system(const ProblemData& pd, const IndexSet& select,
                                 const IndexSet& avoid, double lambda) {
    RestrictedSystem rs;
    rs.free.reserve(pd.p - avoid.size());
    for (int j = 0; j < pd.p; ++j)
        if (!contains(avoid, j)) rs.free.push_back(j);
    int m = static_cast<int>(rs.free.size());
    rs.q.resize(m, m);
    rs.xty.resize(m);
    rs.is_sel.assign(m, 0);
    for (int r = 0; r < m; ++r) {
        rs.xty[r] = pd.xty[rs.free[r]];
        rs.is_sel[r] = contains(select, rs.free[r]) ? 1 : 0;
        if (!rs.is_sel[r]) rs.nonsel.push_back(r);
        for (int c = 0; c < m; ++c) rs.q(r, c) = pd.gram(rs.free[r], rs.free[c]);
    }
    rs.q.diagonal().array() -= lambda;
    return rs;
}

// Dual value at gamma given the precomputed matvec qg = Q*gamma.
double dual_value(const RestrictedSystem& rs, const Vec& gamma, const Vec& qg,
                  int slots, double mu) {
    Vec d = rs.xty - qg;
    double sum_sel = 0.0;
    std::vector<double> free_sq;
    free_sq.reserve(rs.nonsel.size());
    for (int r = 0; r < static_cast<int>(rs.free.size()); ++r) {
        if (rs.is_sel[r])
            sum_sel += d[r] * d[r];
        else
            free_sq.push_back(d[r] * d[r]);
    }
    return -gamma.dot(qg) - (sum_sel + sum_top(std::move(free_sq), slots)) / mu;
}

}  // namespace

double admm_lower_bound(const ProblemData& pd, const SolverConfig& cfg,
                        const IndexSet& select, const IndexSet& avoid,
                        const EigenInfo& eig, const FastBound& warm,
                        AdmmCache* cache) {
    check_node(pd, cfg, select, avoid);
    double best = warm.value;
    double mu = cfg.lambda2 + eig.lambda;
    if (eig.q_zero || !(mu > 0.0) || !(eig.lambda_minpos_q > 0.0)) return best;

    double rho = 2.0 / std::sqrt(eig.lambda_max_q * eig.lambda_minpos_q);

    RestrictedSystem rs = restrict_system(pd, select, avoid, eig.lambda);
    const int m = static_cast<int>(rs.free.size());
    if (m == 0) return best;
    const int slots = cfg.k - static_cast<int>(select.size());

    // Factor (2/rho)*I + Q once; the root-level factorization is reused
    // across nodes that share an empty avoid set.
    const Eigen::LLT<Mat>* llt = nullptr;
    Eigen::LLT<Mat> local_llt;
    if (avoid.empty() && cache) {
        if (!cache->ready) {
            Mat A = rs.q;
            A.diagonal().array() += 2.0 / rho;
            cache->llt.compute(A);
            cache->rho = rho;
            cache->q = rs.q;
            cache->ready = true;
        }
        llt = &cache->llt;
    } else {
        Mat A = rs.q;
        A.diagonal().array() += 2.0 / rho;
        local_llt.compute(A);
        llt = &local_llt;
    }
    if (llt->info() != Eigen::Success) return best;

    Vec gamma(m);
    for (int r = 0; r < m; ++r) gamma[r] = warm.gamma[rs.free[r]];

    Vec qg = rs.q * gamma;
    best = std::max(best, dual_value(rs, gamma, qg, slots, mu));

    Vec pvec = rs.xty - qg;
    Vec qvec = Vec::Zero(m);
    const double w_heavy = 1.0 + 2.0 / (rho * mu);

    std::vector<int> order(rs.nonsel.size());
    std::vector<double> targets(rs.nonsel.size()), weights(rs.nonsel.size());

    for (int t = 2; t <= cfg.admm_iters; ++t) {
        Vec gnew = llt->solve(rs.xty - pvec - qvec);
        qg = rs.q * gnew;
        Vec theta = 2.0 * qg + pvec - rs.xty;
        Vec a = rs.xty - theta - qvec;

        // the slots largest |a| outside select get the heavy weight
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int i, int l) {
            double ai = std::abs(a[rs.nonsel[i]]), al = std::abs(a[rs.nonsel[l]]);
            if (ai != al) return ai > al;
            return rs.nonsel[i] < rs.nonsel[l];
        });
        for (size_t i = 0; i < rs.nonsel.size(); ++i) {
            double w = (static_cast<int>(i) < slots) ? w_heavy : 1.0;
            int local = order[i];
            weights[local] = w;
            targets[local] = std::abs(a[rs.nonsel[local]]) / w;
        }
        std::vector<double> v =
            solve_isotonic(IsotonicInstance{order, weights, targets});

        for (int r = 0; r < m; ++r) {
            double mag = rs.is_sel[r] ? std::abs(a[r]) / w_heavy : 0.0;
            pvec[r] = (a[r] >= 0.0 ? 1.0 : -1.0) * mag;
        }
        for (size_t i = 0; i < rs.nonsel.size(); ++i) {
            int r = rs.nonsel[i];
            pvec[r] = (a[r] >= 0.0 ? 1.0 : -1.0) * v[i];
        }
        qvec += theta + pvec - rs.xty;

        best = std::max(best, dual_value(rs, gnew, qg, slots, mu));
        double step = (gnew - gamma).lpNorm<Eigen::Infinity>();
        gamma = gnew;
        if (step <= 1e-10) break;
    }
    return best;
}

double cmf_subgradient_bound(const ProblemData& pd, const SolverConfig& cfg,
                             const IndexSet& select, const IndexSet& avoid,
                             const EigenInfo& eig, double h_star,
                             const FastBound& warm) {
    check_node(pd, cfg, select, avoid);
    double best = warm.value;
    double mu = cfg.lambda2 + eig.lambda;
    if (eig.q_zero || !(mu > 0.0)) return best;

    RestrictedSystem rs = restrict_system(pd, select, avoid, eig.lambda);
    const int m = static_cast<int>(rs.free.size());
    if (m == 0) return best;
    const int slots = cfg.k - static_cast<int>(select.size());

    Vec gamma(m);
    for (int r = 0; r < m; ++r) gamma[r] = warm.gamma[rs.free[r]];
    Vec v = Vec::Zero(m);

    Vec qg = rs.q * gamma;
    double h_cur = dual_value(rs, gamma, qg, slots, mu);
    best = std::max(best, h_cur);

    std::vector<int> idx(rs.nonsel.size());
    for (int t = 2; t <= cfg.admm_iters; ++t) {
        Vec d = rs.xty - qg;

        // inner minimizer over z: ones on select plus the largest free d^2
        Vec zd = Vec::Zero(m);
        for (int r = 0; r < m; ++r)
            if (rs.is_sel[r]) zd[r] = d[r];
        std::iota(idx.begin(), idx.end(), 0);
        int take = std::min<int>(slots, idx.size());
        std::nth_element(idx.begin(), idx.begin() + std::max(take - 1, 0), idx.end(),
                         [&](int i, int l) {
                             double di = d[rs.nonsel[i]] * d[rs.nonsel[i]];
                             double dl = d[rs.nonsel[l]] * d[rs.nonsel[l]];
                             if (di != dl) return di > dl;
                             return rs.nonsel[i] < rs.nonsel[l];
                         });
        for (int i = 0; i < take; ++i) zd[rs.nonsel[idx[i]]] = d[rs.nonsel[idx[i]]];

        Vec w = -2.0 * qg + (2.0 / mu) * (rs.q * zd);
        double vn2 = v.squaredNorm();
        double s = 0.0;
        if (vn2 > 0.0) s = std::max(0.0, -1.5 * v.dot(w) / vn2);
        v = w + s * v;
        vn2 = v.squaredNorm();
        if (!(vn2 > 0.0) || !std::isfinite(vn2)) break;

        double alpha = (h_star - h_cur) / vn2;
        if (!std::isfinite(alpha) || alpha <= 0.0) break;
        gamma += alpha * v;

        qg = rs.q * gamma;
        h_cur = dual_value(rs, gamma, qg, slots, mu);
        if (!std::isfinite(h_cur)) break;
        best = std::max(best, h_cur);
    }
    return best;
}

}  // namespace okbnb
