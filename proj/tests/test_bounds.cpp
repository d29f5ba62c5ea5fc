#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "okbnb/bounds.hpp"
#include "okbnb/datagen.hpp"
#include "oracles.hpp"

using namespace okbnb;

namespace {

SolverConfig make_cfg(int k, double lambda2) {
    SolverConfig cfg;
    cfg.k = k;
    cfg.lambda2 = lambda2;
    return cfg;
}

ProblemData identity_two() {
    Mat X = Mat::Identity(2, 2);
    Vec y(2);
    y << 1.0, 2.0;
    return build_problem(X, y);
}

}  // namespace

TEST_CASE("eigen info on identity and diagonal grams") {
    ProblemData pd;
    pd.gram = Mat::Identity(3, 3);
    pd.xty = Vec::Ones(3);
    pd.n = pd.p = 3;
    EigenInfo eig = compute_eigen_info(pd);
    CHECK(eig.lambda_min == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eig.lambda == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eig.q_zero);
    CHECK(eig.lambda_max_q <= 1e-10);

    pd.gram = Mat::Zero(2, 2);
    pd.gram(0, 0) = 1.0;
    pd.gram(1, 1) = 4.0;
    pd.xty = Vec::Ones(2);
    pd.p = 2;
    eig = compute_eigen_info(pd);
    CHECK(eig.lambda == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(eig.lambda_max_q == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(eig.lambda_minpos_q == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(!eig.q_zero);
}

TEST_CASE("lambda_min matches the inertia-bisection oracle") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 15; ++rep) {
        ProblemData pd = oracles::random_problem(rng, 12 + rep, 6, 0.5);
        EigenInfo eig = compute_eigen_info(pd);
        double want = oracles::eig_min_bisect(pd.gram);
        CHECK(eig.lambda_min ==
              doctest::Approx(want).epsilon(1e-6).scale(1.0 + std::abs(want)));
        // the shift must keep Q positive semidefinite
        Mat q = pd.gram - eig.lambda * Mat::Identity(pd.p, pd.p);
        double q_min = oracles::eig_min_bisect(q);
        CHECK(q_min >= -1e-8 * (1.0 + pd.gram.norm()));
    }
}

TEST_CASE("sum_bottom and sum_top selection") {
    std::vector<double> v{4.0, 1.0, 3.0};
    CHECK(sum_bottom(v, 2) == doctest::Approx(4.0));
    CHECK(sum_bottom(v, 0) == 0.0);
    CHECK(sum_bottom(v, 3) == doctest::Approx(8.0));
    CHECK(sum_top(v, 1) == doctest::Approx(4.0));
    CHECK(sum_top(v, 2) == doctest::Approx(7.0));
    CHECK_THROWS_AS(sum_bottom(v, 4), InvalidInput);
    CHECK_THROWS_AS(sum_bottom(v, -1), InvalidInput);
}

TEST_CASE("fast bound equals the ridge loss when k = p") {
    std::mt19937_64 rng(5);
    ProblemData pd = oracles::random_problem(rng, 25, 6);
    SolverConfig cfg = make_cfg(6, 0.2);
    EigenInfo eig = compute_eigen_info(pd);
    FastBound fb = fast_lower_bound(pd, cfg, {}, {}, eig);
    Vec g = ridge_solve(pd, 0.2);
    CHECK(fb.value == doctest::Approx(evaluate_loss(pd, g, 0.2)).epsilon(1e-10));
}

TEST_CASE("fast bound is tight on the two-point identity instance") {
    ProblemData pd = identity_two();
    SolverConfig cfg = make_cfg(1, 0.0);
    EigenInfo eig = compute_eigen_info(pd);
    FastBound fb = fast_lower_bound(pd, cfg, {}, {}, eig);
    // ridge solution (1,2), full loss -5, plus 1 * min(1,4) = -4 = the optimum
    CHECK(fb.value == doctest::Approx(-4.0).epsilon(1e-12));
    CHECK(fb.gamma[0] == doctest::Approx(1.0));
    CHECK(fb.gamma[1] == doctest::Approx(2.0));
}

TEST_CASE("fast bound never exceeds the exhaustive optimum") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> pdist(4, 12), kdist(1, 4);
    for (int rep = 0; rep < 30; ++rep) {
        int p = pdist(rng), k = std::min(kdist(rng), p);
        ProblemData pd = oracles::random_problem(rng, 30, p, 0.6);
        double lambda2 = rep % 3 == 0 ? 0.0 : 0.1 * (rep % 5 + 1);
        SolverConfig cfg = make_cfg(k, lambda2);
        EigenInfo eig = compute_eigen_info(pd);
        FastBound fb = fast_lower_bound(pd, cfg, {}, {}, eig);
        double opt = oracles::enum_optimum(pd, k, lambda2).loss;
        CHECK(fb.value <= opt + 1e-9 * (1.0 + std::abs(opt)));
    }
}

TEST_CASE("fast bound respects select and avoid") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 20; ++rep) {
        ProblemData pd = oracles::random_problem(rng, 30, 8, 0.3);
        SolverConfig cfg = make_cfg(3, 0.2);
        EigenInfo eig = compute_eigen_info(pd);
        IndexSet select{rep % 8};
        IndexSet avoid{(rep + 3) % 8};
        if (select[0] == avoid[0]) avoid[0] = (avoid[0] + 1) % 8;
        std::sort(avoid.begin(), avoid.end());
        FastBound fb = fast_lower_bound(pd, cfg, select, avoid, eig);
        double opt = oracles::enum_optimum_constrained(pd, 3, 0.2, select, avoid);
        CHECK(fb.value <= opt + 1e-9 * (1.0 + std::abs(opt)));
    }
}

TEST_CASE("fast bound is monotone in the spectral shift") {
    std::mt19937_64 rng(9);
    ProblemData pd = oracles::random_problem(rng, 40, 6, 0.4);
    SolverConfig cfg = make_cfg(2, 0.1);
    EigenInfo eig = compute_eigen_info(pd);
    FastBound full = fast_lower_bound(pd, cfg, {}, {}, eig);
    EigenInfo weaker = eig;
    weaker.lambda *= 0.5;
    FastBound half = fast_lower_bound(pd, cfg, {}, {}, weaker);
    CHECK(half.value <= full.value + 1e-9);
    weaker.lambda = 0.0;
    FastBound zero = fast_lower_bound(pd, cfg, {}, {}, weaker);
    CHECK(zero.value <= half.value + 1e-9);
}

TEST_CASE("dual value at the ridge point reproduces the fast bound") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        ProblemData pd = oracles::random_problem(rng, 30, 7, 0.5);
        SolverConfig cfg = make_cfg(2 + rep % 3, 0.05 + 0.1 * (rep % 4));
        EigenInfo eig = compute_eigen_info(pd);
        FastBound fb = fast_lower_bound(pd, cfg, {}, {}, eig);
        double h = saddle_bound(pd, cfg, fb.gamma, {}, {}, eig);
        CHECK(h == doctest::Approx(fb.value).epsilon(1e-9));
    }
}

TEST_CASE("dual value at zero is the closed-form top-k expression") {
    std::mt19937_64 rng(12);
    ProblemData pd = oracles::random_problem(rng, 30, 6, 0.2);
    SolverConfig cfg = make_cfg(2, 0.3);
    EigenInfo eig = compute_eigen_info(pd);
    double mu = cfg.lambda2 + eig.lambda;
    std::vector<double> d2(pd.p);
    for (int j = 0; j < pd.p; ++j) d2[j] = pd.xty[j] * pd.xty[j];
    double want = -sum_top(d2, 2) / mu;
    CHECK(saddle_bound(pd, cfg, Vec::Zero(pd.p), {}, {}, eig) ==
          doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("dual value lower-bounds the optimum for arbitrary gamma") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int rep = 0; rep < 30; ++rep) {
        ProblemData pd = oracles::random_problem(rng, 25, 6, 0.4);
        SolverConfig cfg = make_cfg(2, 0.1);
        EigenInfo eig = compute_eigen_info(pd);
        Vec gamma(pd.p);
        for (int j = 0; j < pd.p; ++j) gamma[j] = normal(rng);
        double h = saddle_bound(pd, cfg, gamma, {}, {}, eig);
        double opt = oracles::enum_optimum(pd, 2, 0.1).loss;
        CHECK(h <= opt + 1e-9 * (1.0 + std::abs(opt)));
    }
}

TEST_CASE("admm returns the fast bound when Q vanishes") {
    ProblemData pd = identity_two();
    SolverConfig cfg = make_cfg(1, 0.0);
    EigenInfo eig = compute_eigen_info(pd);
    REQUIRE(eig.q_zero);
    FastBound fb = fast_lower_bound(pd, cfg, {}, {}, eig);
    CHECK(admm_lower_bound(pd, cfg, {}, {}, eig, fb) == fb.value);
}

TEST_CASE("admm bound stays within the sandwich on the tight instance") {
    ProblemData pd = identity_two();
    SolverConfig cfg = make_cfg(1, 0.0);
    EigenInfo eig = compute_eigen_info(pd);
    FastBound fb = fast_lower_bound(pd, cfg, {}, {}, eig);
    double b = admm_lower_bound(pd, cfg, {}, {}, eig, fb);
    CHECK(b >= -4.0 - 1e-12);
    CHECK(b <= -4.0 + 1e-9);
}

TEST_CASE("admm dominates the fast bound and respects the optimum") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> pdist(4, 12), kdist(1, 4);
    for (int rep = 0; rep < 30; ++rep) {
        int p = pdist(rng), k = std::min(kdist(rng), p - 1);
        ProblemData pd = oracles::random_problem(rng, 40, p, 0.7);
        double lambda2 = 0.05 * (1 + rep % 4);
        SolverConfig cfg = make_cfg(k, lambda2);
        EigenInfo eig = compute_eigen_info(pd);
        FastBound fb = fast_lower_bound(pd, cfg, {}, {}, eig);
        double b = admm_lower_bound(pd, cfg, {}, {}, eig, fb);
        CHECK(b >= fb.value);  // running max is seeded with the fast bound
        double opt = oracles::enum_optimum(pd, k, lambda2).loss;
        CHECK(b <= opt + 1e-9 * (1.0 + std::abs(opt)));
    }
}

TEST_CASE("admm bound under select/avoid stays below the constrained optimum") {
    std::mt19937_64 rng(19);
    for (int rep = 0; rep < 20; ++rep) {
        ProblemData pd = oracles::random_problem(rng, 35, 8, 0.5);
        SolverConfig cfg = make_cfg(3, 0.2);
        EigenInfo eig = compute_eigen_info(pd);
        IndexSet select{rep % 8};
        IndexSet avoid{(rep + 2) % 8, (rep + 5) % 8};
        avoid = sorted_unique(avoid);
        IndexSet clean;
        for (int j : avoid)
            if (j != select[0]) clean.push_back(j);
        FastBound fb = fast_lower_bound(pd, cfg, select, clean, eig);
        double b = admm_lower_bound(pd, cfg, select, clean, eig, fb);
        double opt = oracles::enum_optimum_constrained(pd, 3, 0.2, select, clean);
        CHECK(b >= fb.value);
        CHECK(b <= opt + 1e-9 * (1.0 + std::abs(opt)));
    }
}

TEST_CASE("cmf subgradient bound keeps the running-max contract") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 20; ++rep) {
        ProblemData pd = oracles::random_problem(rng, 30, 7, 0.6);
        SolverConfig cfg = make_cfg(2, 0.1);
        cfg.use_cmf = true;
        EigenInfo eig = compute_eigen_info(pd);
        FastBound fb = fast_lower_bound(pd, cfg, {}, {}, eig);
        double opt = oracles::enum_optimum(pd, 2, 0.1).loss;
        double b = cmf_subgradient_bound(pd, cfg, {}, {}, eig, opt, fb);
        CHECK(b >= fb.value);
        CHECK(b <= opt + 1e-9 * (1.0 + std::abs(opt)));
    }
}
