#pragma once

#include <functional>
#include <optional>

#include "okbnb/types.hpp"

namespace okbnb {

// Quadratic summary of a least-squares instance. Losses are measured relative
// to the zero vector: L(b) = b'Gb - 2(X'y)'b + lambda2*|b|^2, so the constant
// |y|^2 is dropped and L(0) = 0. yty is kept so residual sums of squares can
// be reconstructed when reporting.
struct ProblemData {
    Mat gram;   // X'X, symmetrized
    Vec xty;    // X'y
    double yty = 0.0;
    int n = 0;
    int p = 0;
};

struct Progress {
    long nodes_processed = 0;
    double upper = 0.0;
    double lower = 0.0;
    double gap = 0.0;
    double elapsed_s = 0.0;
};

struct SolverConfig {
    int k = 1;
    double lambda2 = 0.0;
    double gap_tol = 1e-4;
    std::optional<double> time_limit_s;
    int beam_width = 50;
    int admm_iters = 100;
    bool use_admm = true;
    bool use_cmf = false;
    std::function<void(const Progress&)> progress_cb;
    long progress_interval = 0;  // nodes between callbacks, 0 disables
};

// A fit restricted to an explicit support. The support lists the coordinates
// the fit was allowed to use (coefficients may still be exactly zero there).
struct SparseSolution {
    IndexSet support;  // sorted, unique, 0-based
    Vec coeffs;        // aligned with support
    double loss = 0.0;

    Vec densify(int p) const {
        Vec b = Vec::Zero(p);
        for (size_t i = 0; i < support.size(); ++i) b[support[i]] = coeffs[i];
        return b;
    }
};

// Forms gram = X'X (averaged with its transpose so later eigen decompositions
// see an exactly symmetric matrix), xty = X'y and |y|^2.
ProblemData build_problem(const Mat& X, const Vec& y);

double evaluate_loss(const ProblemData& pd, const Vec& beta, double lambda2);

// 2*G*b - 2*xty + 2*lambda2*b
Vec gradient(const ProblemData& pd, const Vec& beta, double lambda2);

// Ridge solution with the avoided coordinates deleted: solves
// (G_FF + lambda2*I) g_F = xty_F over F = {0..p-1} \ avoid and embeds the
// result into a length-p vector that is zero on avoid. Uses a Cholesky
// factorization; when lambda2 = 0 leaves the system semidefinite, a small
// diagonal jitter is escalated (1e-12..1e-6 relative to the mean diagonal)
// before giving up with SingularSystem.
Vec ridge_solve(const ProblemData& pd, double lambda2, const IndexSet& avoid = {});

// Ridge fit on an explicit (small) support; solves the |S|x|S| system only.
SparseSolution ridge_fit_support(const ProblemData& pd, double lambda2,
                                 const IndexSet& support);

}  // namespace okbnb
