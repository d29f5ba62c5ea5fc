#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "okbnb/bnb.hpp"
#include "okbnb/datagen.hpp"

namespace okbnb {

// One monomial term of a governing equation, as exponents over the state.
struct TermSpec {
    std::vector<int> exponents;
    double coeff = 0.0;
};

struct DynSystem {
    std::string name;
    int dim = 0;
    std::function<Vec(const Vec&)> rhs;
    Vec default_x0;
    std::vector<std::vector<TermSpec>> true_terms;  // per state dimension
    std::vector<int> true_sparsity;
};

DynSystem lorenz_system();
DynSystem hopf_system();
DynSystem mhd_system();
DynSystem system_by_name(const std::string& name);

// All monomials in `dim` variables with total degree <= degree, constant
// included, in graded lexicographic order (degree first, then lexicographically
// descending exponents, so e.g. x0^2 precedes x0*x1 precedes x1^2).
struct MonomialLibrary {
    int dim = 0;
    int degree = 0;
    std::vector<std::vector<int>> exponents;
    std::vector<std::string> names;

    int size() const { return static_cast<int>(exponents.size()); }
    int index_of(const std::vector<int>& expo) const;  // -1 when absent
    Mat evaluate(const Mat& states) const;             // rows -> feature rows
    // densify a term list into a coefficient vector over the library
    Vec coefficients_of(const std::vector<TermSpec>& terms) const;
};

MonomialLibrary monomial_library(int dim, int degree);

struct Trajectory {
    double dt = 0.0;
    Vec times;
    Mat states;        // exact integration
    Mat noisy_states;  // with multiplicative observation noise
};

// Fixed-step RK4; throws InvalidInput on divergence. Observation noise is
// multiplicative: x * (1 + eta), eta ~ N(0, noise_level^2) elementwise.
Trajectory integrate(const DynSystem& sys, const Vec& x0, double duration,
                     double dt, double noise_level = 0.0, std::uint64_t seed = 0);

// Quadratic least-squares value smoothing over `window` samples (odd) followed
// by second-order finite differences. Rows near the ends fall back to
// one-sided fits/stencils and are excluded from [interior_begin, interior_end).
struct DerivativeEstimate {
    Mat deriv;
    int interior_begin = 0;
    int interior_end = 0;
};

DerivativeEstimate smoothed_derivative(const Mat& states, double dt, int window = 9);

struct DiscoveryConfig {
    int degree = 5;
    std::vector<int> k_grid{1, 2, 3, 4, 5};
    std::vector<double> lambda_grid{1e-5, 1e-3, 1e-2, 0.05, 0.2};
    double time_limit_per_fit = 30.0;
    double gap_tol = 1e-4;
    int beam_width = 50;
    std::uint64_t seed = 0;  // initial conditions of the validation simulations
    int n_sims = 10;
    double sim_duration = 1.0;
    int threads = 0;  // parallel (dimension, lambda2) grid jobs; <= 1 is serial
};

struct CellResult {
    int dim = 0;
    int k = 0;
    double lambda2 = 0.0;
    bool ok = false;  // certified within the time limit
    std::string status;
    double train_loss = 0.0;
    double gap = 0.0;
    double val_sse = 0.0;
    double aicc = 0.0;
    IndexSet support;
    Vec coeffs;
    double elapsed_s = 0.0;
};

struct DimensionModel {
    int dim = 0;
    bool selected = false;  // false when every cell failed
    int k = 0;
    double lambda2 = 0.0;
    double aicc = 0.0;
    IndexSet support;
    Vec coeffs;
    double tpr = 0.0;
    double l2_err = 0.0;
};

struct DiscoveryResult {
    int library_size = 0;
    std::vector<std::string> library_names;
    std::vector<DimensionModel> models;
    std::vector<CellResult> grid;
    double derivative_rmse = 0.0;  // against the true field on fresh simulations
};

// Fits every (dimension, lambda2, k) grid cell with the exact solver on the
// first two thirds of the interior rows, scores the rest by AICc and keeps
// the best certified cell per dimension. Support caches are shared across the
// k grid of one (dimension, lambda2) pair; fits with different penalties
// never share a cache.
DiscoveryResult discover(const DynSystem& sys, const Trajectory& traj,
                         const DiscoveryConfig& dcfg);

}  // namespace okbnb
