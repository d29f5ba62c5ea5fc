#pragma once

// Slow reference implementations the unit tests trust instead of the library
// under test: residual-form losses, finite differences, inertia-bisection
// eigenvalues, exhaustive isotonic partitions and subset enumeration.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "okbnb/core.hpp"
#include "okbnb/isotonic.hpp"

namespace oracles {

using okbnb::IndexSet;
using okbnb::Mat;
using okbnb::Vec;

// |y - Xb|^2 - |y|^2 + lambda2 |b|^2, computed straight from the residual
inline double residual_loss(const Mat& X, const Vec& y, const Vec& beta,
                            double lambda2) {
    Vec r = y - X * beta;
    return r.squaredNorm() - y.squaredNorm() + lambda2 * beta.squaredNorm();
}

inline Vec fd_gradient(const okbnb::ProblemData& pd, const Vec& beta, double lambda2,
                       double h = 1e-6) {
    Vec g(beta.size());
    for (int j = 0; j < beta.size(); ++j) {
        Vec hi = beta, lo = beta;
        hi[j] += h;
        lo[j] -= h;
        g[j] = (okbnb::evaluate_loss(pd, hi, lambda2) -
                okbnb::evaluate_loss(pd, lo, lambda2)) /
               (2.0 * h);
    }
    return g;
}

// Smallest eigenvalue by bisection on the inertia of A - s*I (LDLT pivots are
// congruent to the shifted matrix, so the count of negative diagonal entries
// equals the count of eigenvalues below s).
inline double eig_min_bisect(const Mat& A, int iters = 200) {
    const int p = static_cast<int>(A.rows());
    double radius = 0.0;
    for (int i = 0; i < p; ++i) {
        double off = 0.0;
        for (int j = 0; j < p; ++j)
            if (j != i) off += std::abs(A(i, j));
        radius = std::max(radius, std::abs(A(i, i)) + off);
    }
    double lo = -radius - 1.0, hi = radius + 1.0;
    auto count_below = [&](double s) {
        Eigen::LDLT<Mat> ldlt(A - s * Mat::Identity(p, p));
        int neg = 0;
        Vec d = ldlt.vectorD();
        for (int i = 0; i < d.size(); ++i)
            if (d[i] < 0.0) ++neg;
        return neg;
    };
    for (int it = 0; it < iters; ++it) {
        double mid = 0.5 * (lo + hi);
        if (count_below(mid) >= 1)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

// Every way to cut the order into contiguous blocks, each block at its
// weighted target mean; the optimum of the chain problem is the best feasible
// (nonincreasing) such partition. Exponential, fine for m <= 12.
inline std::vector<double> isotonic_enum(const okbnb::IsotonicInstance& inst) {
    const int m = static_cast<int>(inst.order.size());
    std::vector<double> best;
    double best_obj = std::numeric_limits<double>::infinity();
    const unsigned long long patterns = 1ull << (m > 0 ? m - 1 : 0);
    for (unsigned long long mask = 0; mask < patterns; ++mask) {
        // bit i set = block boundary between order position i and i+1
        std::vector<double> fitted(m, 0.0);
        double wsum = 0.0, wt = 0.0;
        int start = 0;
        std::vector<std::pair<int, int>> blocks;
        for (int i = 0; i < m; ++i) {
            int c = inst.order[i];
            wsum += inst.weights[c];
            wt += inst.weights[c] * inst.targets[c];
            bool boundary = (i == m - 1) || ((mask >> i) & 1ull);
            if (boundary) {
                double v = wt / wsum;
                for (int j = start; j <= i; ++j) fitted[inst.order[j]] = v;
                blocks.emplace_back(start, i);
                start = i + 1;
                wsum = wt = 0.0;
            }
        }
        bool feasible = true;
        for (size_t b = 1; b < blocks.size() && feasible; ++b)
            if (fitted[inst.order[blocks[b - 1].first]] <
                fitted[inst.order[blocks[b].first]] - 1e-12)
                feasible = false;
        if (!feasible) continue;
        double obj = 0.0;
        for (int c = 0; c < m; ++c) {
            double diff = fitted[c] - inst.targets[c];
            obj += inst.weights[c] * diff * diff;
        }
        if (obj < best_obj) {
            best_obj = obj;
            best = fitted;
        }
    }
    return best;
}

// visit every size-r subset of {0..p-1}
template <typename F>
void for_each_subset(int p, int r, F&& visit) {
    if (r == 0) {
        IndexSet empty;
        visit(empty);
        return;
    }
    IndexSet s(r);
    for (int i = 0; i < r; ++i) s[i] = i;
    while (true) {
        visit(s);
        int i = r - 1;
        while (i >= 0 && s[i] == p - r + i) --i;
        if (i < 0) break;
        ++s[i];
        for (int j = i + 1; j < r; ++j) s[j] = s[j - 1] + 1;
    }
}

// Exhaustive k-sparse optimum via ridge fits on every size-k support.
inline okbnb::SparseSolution enum_optimum(const okbnb::ProblemData& pd, int k,
                                          double lambda2) {
    okbnb::SparseSolution best;
    best.loss = std::numeric_limits<double>::infinity();
    for_each_subset(pd.p, std::min(k, pd.p), [&](const IndexSet& s) {
        okbnb::SparseSolution sol = okbnb::ridge_fit_support(pd, lambda2, s);
        if (sol.loss < best.loss) best = sol;
    });
    return best;
}

// Constrained variant: supports must contain `select` and miss `avoid`.
inline double enum_optimum_constrained(const okbnb::ProblemData& pd, int k,
                                       double lambda2, const IndexSet& select,
                                       const IndexSet& avoid) {
    double best = std::numeric_limits<double>::infinity();
    for_each_subset(pd.p, k, [&](const IndexSet& s) {
        for (int j : select)
            if (!okbnb::contains(s, j)) return;
        for (int j : avoid)
            if (okbnb::contains(s, j)) return;
        best = std::min(best, okbnb::ridge_fit_support(pd, lambda2, s).loss);
    });
    return best;
}

// Curvature constants for the beam-search guarantee: M1 from the diagonal
// and m_2k from the worst principal submatrix of size min(2k, p).
inline std::pair<double, double> sandwich_constants(const Mat& G, double lambda2,
                                                    int k) {
    const int p = static_cast<int>(G.rows());
    double m1 = 0.0;
    for (int j = 0; j < p; ++j) m1 = std::max(m1, 2.0 * (G(j, j) + lambda2));
    const int r = std::min(2 * k, p);
    double min_eig = std::numeric_limits<double>::infinity();
    for_each_subset(p, r, [&](const IndexSet& s) {
        Mat sub(r, r);
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b) sub(a, b) = G(s[a], s[b]);
        Eigen::SelfAdjointEigenSolver<Mat> es(sub);
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    });
    return {m1, 2.0 * (lambda2 + min_eig)};
}

inline okbnb::ProblemData random_problem(std::mt19937_64& rng, int n, int p,
                                         double corr = 0.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat X(n, p);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = normal(rng);
        for (int j = 1; j < p; ++j)
            X(i, j) = corr * X(i, j - 1) + std::sqrt(1.0 - corr * corr) * normal(rng);
    }
    Vec y(n);
    for (int i = 0; i < n; ++i) y[i] = normal(rng);
    // plant a little signal so optima are not pure noise fits
    for (int i = 0; i < n; ++i) y[i] += X(i, 0) - 0.5 * X(i, p / 2);
    return okbnb::build_problem(X, y);
}

}  // namespace oracles
