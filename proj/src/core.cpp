#include "okbnb/core.hpp"

#include <cmath>

namespace okbnb {

ProblemData build_problem(const Mat& X, const Vec& y) {
    if (X.rows() == 0 || X.cols() == 0)
        throw InvalidInput("build_problem: X must be nonempty");
    if (X.rows() != y.size())
        throw InvalidInput("build_problem: X has " + std::to_string(X.rows()) +
                           " rows but y has " + std::to_string(y.size()) + " entries");
    if (!X.allFinite() || !y.allFinite())
        throw InvalidInput("build_problem: non-finite values in X or y");

    ProblemData pd;
    pd.n = static_cast<int>(X.rows());
    pd.p = static_cast<int>(X.cols());
    Mat g = X.transpose() * X;
    pd.gram = 0.5 * (g + g.transpose());
    pd.xty = X.transpose() * y;
    pd.yty = y.squaredNorm();
    return pd;
}

double evaluate_loss(const ProblemData& pd, const Vec& beta, double lambda2) {
    if (beta.size() != pd.p)
        throw InvalidInput("evaluate_loss: beta has wrong dimension");
    return beta.dot(pd.gram * beta) - 2.0 * pd.xty.dot(beta) +
           lambda2 * beta.squaredNorm();
}

Vec gradient(const ProblemData& pd, const Vec& beta, double lambda2) {
    if (beta.size() != pd.p)
        throw InvalidInput("gradient: beta has wrong dimension");
    return 2.0 * (pd.gram * beta) - 2.0 * pd.xty + 2.0 * lambda2 * beta;
}

namespace {

// Cholesky with jitter escalation. A is overwritten conceptually; returns the
// solution of (A + jitter*I) x = b for the smallest jitter that factorizes.
Vec solve_spd(const Mat& A, const Vec& b, double lambda2) {
    Eigen::LLT<Mat> llt(A);
    if (llt.info() == Eigen::Success) return llt.solve(b);

    // Only the lambda2 = 0 (or numerically indefinite) case lands here.
    double scale = A.trace() / static_cast<double>(A.rows());
    if (!(scale > 0.0)) scale = 1.0;
    for (double mult = 1e-12; mult <= 1e-6; mult *= 10.0) {
        Mat Aj = A;
        Aj.diagonal().array() += mult * scale;
        llt.compute(Aj);
        if (llt.info() == Eigen::Success) return llt.solve(b);
    }
    (void)lambda2;
    throw SingularSystem("ridge system is singular and jitter did not help");
}

}  // namespace

Vec ridge_solve(const ProblemData& pd, double lambda2, const IndexSet& avoid) {
    if (lambda2 < 0.0) throw InvalidInput("ridge_solve: lambda2 must be >= 0");
    for (int j : avoid)
        if (j < 0 || j >= pd.p) throw InvalidInput("ridge_solve: avoid index out of range");

    IndexSet free;
    free.reserve(pd.p - avoid.size());
    for (int j = 0; j < pd.p; ++j)
        if (!contains(avoid, j)) free.push_back(j);
    if (free.empty()) return Vec::Zero(pd.p);

    const int m = static_cast<int>(free.size());
    Mat A(m, m);
    Vec b(m);
    for (int r = 0; r < m; ++r) {
        b[r] = pd.xty[free[r]];
        for (int c = 0; c < m; ++c) A(r, c) = pd.gram(free[r], free[c]);
    }
    A.diagonal().array() += lambda2;

    Vec gf = solve_spd(A, b, lambda2);
    Vec g = Vec::Zero(pd.p);
    for (int r = 0; r < m; ++r) g[free[r]] = gf[r];
    return g;
}

SparseSolution ridge_fit_support(const ProblemData& pd, double lambda2,
                                 const IndexSet& support) {
    for (int j : support)
        if (j < 0 || j >= pd.p) throw InvalidInput("ridge_fit_support: index out of range");

    SparseSolution sol;
    sol.support = support;
    const int m = static_cast<int>(support.size());
    if (m == 0) {
        sol.coeffs = Vec();
        sol.loss = 0.0;
        return sol;
    }
    Mat A(m, m);
    Vec b(m);
    for (int r = 0; r < m; ++r) {
        b[r] = pd.xty[support[r]];
        for (int c = 0; c < m; ++c) A(r, c) = pd.gram(support[r], support[c]);
    }
    A.diagonal().array() += lambda2;
    sol.coeffs = solve_spd(A, b, lambda2);
    // b' G_SS b - 2 xty_S' b + lambda2 |b|^2, with the jitter-free matrices
    sol.loss = sol.coeffs.dot((A - lambda2 * Mat::Identity(m, m)) * sol.coeffs) -
               2.0 * b.dot(sol.coeffs) + lambda2 * sol.coeffs.squaredNorm();
    return sol;
}

}  // namespace okbnb
