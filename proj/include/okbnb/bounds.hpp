#pragma once

#include "okbnb/core.hpp"

namespace okbnb {

// Spectral quantities of the gram matrix, computed once per solve and reused
// at every node. `lambda` is the diagonal shift moved into the perspective
// term: the smallest eigenvalue of G clipped at zero, so Q = G - lambda*I is
// positive semidefinite. Deleting rows/columns (avoided coordinates) can only
// raise the smallest eigenvalue, so the same shift stays valid at every node.
struct EigenInfo {
    double lambda_min = 0.0;      // smallest eigenvalue of G (may be < 0 from rounding)
    double lambda = 0.0;          // max(lambda_min, 0)
    double lambda_max_q = 0.0;    // largest eigenvalue of Q
    double lambda_minpos_q = 0.0; // smallest eigenvalue of Q above 1e-10*lambda_max_q
    bool q_zero = false;          // Q vanishes (G is a multiple of the identity)
};

EigenInfo compute_eigen_info(const ProblemData& pd);

// Sum of the m smallest / largest entries, by partial selection.
double sum_bottom(std::vector<double> values, int m);
double sum_top(std::vector<double> values, int m);

struct FastBound {
    double value = 0.0;
    Vec gamma;  // ridge solution the bound was evaluated at (zero on avoid)
};

// Closed-form lower bound for the node (select, avoid): the ridge loss with
// avoided coordinates deleted, plus (lambda2+lambda) times the sum of the
// p-|avoid|-k smallest squared ridge coefficients outside select. Dropping
// those coefficients is the cheapest way to reach a k-sparse vector, which is
// what makes the value a certificate.
FastBound fast_lower_bound(const ProblemData& pd, const SolverConfig& cfg,
                           const IndexSet& select, const IndexSet& avoid,
                           const EigenInfo& eig);

// Value of the concave dual function at gamma: minimizing the perspective
// objective over the relaxed support indicator z (z=1 on select, z=0 on
// avoid, at most k ones) has a closed form, keeping the largest residual
// correlations. Any gamma gives a valid lower bound.
double saddle_bound(const ProblemData& pd, const SolverConfig& cfg, const Vec& gamma,
                    const IndexSet& select, const IndexSet& avoid,
                    const EigenInfo& eig);

// Factorization reuse for root-level calls (avoid empty). Nodes with a
// nonempty avoid set refactor per call.
struct AdmmCache {
    bool ready = false;
    double rho = 0.0;
    Mat q;                // G - lambda*I, full system
    Eigen::LLT<Mat> llt;  // (2/rho)*I + Q
};

// Tightens the fast bound by ADMM ascent on the dual. Returns the running
// maximum of the dual value across iterates, seeded with the fast bound
// itself, so the result can never fall below it. Stops early once iterates
// stagnate below 1e-10 in the max norm. When Q is (numerically) zero the
// dual is exact at the warm start already and the fast bound is returned.
double admm_lower_bound(const ProblemData& pd, const SolverConfig& cfg,
                        const IndexSet& select, const IndexSet& avoid,
                        const EigenInfo& eig, const FastBound& warm,
                        AdmmCache* cache = nullptr);

// Projected subgradient ascent on the dual with the Camerini-Fratta-Maffioli
// momentum rule; h_star is an upper estimate of the dual optimum (the
// incumbent loss works). Same running-maximum contract as the ADMM bound.
double cmf_subgradient_bound(const ProblemData& pd, const SolverConfig& cfg,
                             const IndexSet& select, const IndexSet& avoid,
                             const EigenInfo& eig, double h_star,
                             const FastBound& warm);

}  // namespace okbnb
