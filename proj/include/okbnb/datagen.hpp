#pragma once

#include <cstdint>

#include "okbnb/core.hpp"

namespace okbnb {

// AR(1)-correlated Gaussian design with an evenly spaced planted support.
// Requires p % k_true == 0 and 0 <= rho < 1.
struct SyntheticSpec {
    int n = 100;
    int p = 10;
    int k_true = 2;
    double rho = 0.1;
    double snr = 5.0;
    std::uint64_t seed = 0;
    // The noise variance is |X b*|^2 / (n * snr) per sample by default;
    // the literal variant uses |X b*|^2 / snr.
    bool literal_noise = false;
};

struct SyntheticData {
    Mat X;
    Vec y;
    Vec beta_star;       // planted coefficients (unit entries)
    IndexSet support;    // planted support, 0-based
    double noise_sigma = 0.0;
};

SyntheticData generate(const SyntheticSpec& spec);

// Exact k-sparse optimum by enumerating all supports in lexicographic order
// (first minimizer wins ties). Refuses instances with more than 1e6 supports.
SparseSolution brute_force_optimum(const ProblemData& pd, const SolverConfig& cfg);

struct RecoveryMetrics {
    double tpr = 0.0;    // |found and true| / (|true| + |found minus true|)
    double l2_err = 0.0; // squared coefficient error over all p coordinates
};

RecoveryMetrics recovery_metrics(const SparseSolution& found, const Vec& beta_star);

}  // namespace okbnb
