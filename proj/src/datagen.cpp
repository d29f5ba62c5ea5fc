#include "okbnb/datagen.hpp"

#include <cmath>
#include <random>

namespace okbnb {

SyntheticData generate(const SyntheticSpec& spec) {
    if (spec.n < 1 || spec.p < 1) throw InvalidInput("generate: n and p must be >= 1");
    if (spec.k_true < 1 || spec.k_true > spec.p)
        throw InvalidInput("generate: k_true must be in [1, p]");
    if (spec.p % spec.k_true != 0)
        throw InvalidInput("generate: p must be a multiple of k_true");
    if (!(spec.rho >= 0.0 && spec.rho < 1.0))
        throw InvalidInput("generate: rho must be in [0, 1)");
    if (!(spec.snr > 0.0)) throw InvalidInput("generate: snr must be > 0");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    SyntheticData data;
    data.X.resize(spec.n, spec.p);
    const double carry = std::sqrt(1.0 - spec.rho * spec.rho);
    for (int i = 0; i < spec.n; ++i) {
        data.X(i, 0) = normal(rng);
        for (int j = 1; j < spec.p; ++j)
            data.X(i, j) = spec.rho * data.X(i, j - 1) + carry * normal(rng);
    }

    // every (p/k_true)-th coordinate carries a unit coefficient
    const int stride = spec.p / spec.k_true;
    data.beta_star = Vec::Zero(spec.p);
    for (int j = stride - 1; j < spec.p; j += stride) {
        data.beta_star[j] = 1.0;
        data.support.push_back(j);
    }

    Vec signal = data.X * data.beta_star;
    double var = signal.squaredNorm() / spec.snr;
    if (!spec.literal_noise) var /= static_cast<double>(spec.n);
    data.noise_sigma = std::sqrt(var);

    data.y.resize(spec.n);
    for (int i = 0; i < spec.n; ++i)
        data.y[i] = signal[i] + data.noise_sigma * normal(rng);
    return data;
}

namespace {

double binomial(int p, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (p - k + i) / i;
    return c;
}

}  // namespace

SparseSolution brute_force_optimum(const ProblemData& pd, const SolverConfig& cfg) {
    if (cfg.k < 1 || cfg.k > pd.p)
        throw InfeasibleConfig("brute_force_optimum: k must be in [1, p]");
    if (binomial(pd.p, cfg.k) > 1e6)
        throw InvalidInput("brute_force_optimum: more than 1e6 supports");

    IndexSet support(cfg.k);
    for (int i = 0; i < cfg.k; ++i) support[i] = i;

    SparseSolution best;
    bool have = false;
    while (true) {
        SparseSolution sol = ridge_fit_support(pd, cfg.lambda2, support);
        if (!have || sol.loss < best.loss) {
            best = sol;
            have = true;
        }
        // next combination in lexicographic order
        int i = cfg.k - 1;
        while (i >= 0 && support[i] == pd.p - cfg.k + i) --i;
        if (i < 0) break;
        ++support[i];
        for (int l = i + 1; l < cfg.k; ++l) support[l] = support[l - 1] + 1;
    }
    return best;
}

RecoveryMetrics recovery_metrics(const SparseSolution& found, const Vec& beta_star) {
    IndexSet truth;
    for (int j = 0; j < beta_star.size(); ++j)
        if (beta_star[j] != 0.0) truth.push_back(j);

    long inter = 0, extra = 0;
    for (int j : found.support)
        (contains(truth, j) ? inter : extra) += 1;

    RecoveryMetrics m;
    double denom = static_cast<double>(truth.size() + extra);
    m.tpr = denom > 0.0 ? static_cast<double>(inter) / denom : 1.0;

    Vec dense = found.densify(static_cast<int>(beta_star.size()));
    m.l2_err = (dense - beta_star).squaredNorm();
    return m;
}

}  // namespace okbnb
