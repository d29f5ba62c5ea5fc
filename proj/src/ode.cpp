#include "okbnb/ode.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace okbnb {

namespace {

DynSystem make_system(std::string name, int dim, std::function<Vec(const Vec&)> rhs,
                      Vec x0, std::vector<std::vector<TermSpec>> terms) {
    DynSystem sys;
    sys.name = std::move(name);
    sys.dim = dim;
    sys.rhs = std::move(rhs);
    sys.default_x0 = std::move(x0);
    sys.true_terms = std::move(terms);
    for (const auto& t : sys.true_terms)
        sys.true_sparsity.push_back(static_cast<int>(t.size()));
    return sys;
}

}  // namespace

DynSystem lorenz_system() {
    const double sigma = 10.0, rho = 28.0, beta = 8.0 / 3.0;
    auto rhs = [=](const Vec& x) {
        Vec d(3);
        d[0] = sigma * (x[1] - x[0]);
        d[1] = x[0] * (rho - x[2]) - x[1];
        d[2] = x[0] * x[1] - beta * x[2];
        return d;
    };
    Vec x0(3);
    x0 << -8.0, 8.0, 27.0;
    return make_system(
        "lorenz", 3, rhs, x0,
        {{{{1, 0, 0}, -sigma}, {{0, 1, 0}, sigma}},
         {{{1, 0, 0}, rho}, {{0, 1, 0}, -1.0}, {{1, 0, 1}, -1.0}},
         {{{1, 1, 0}, 1.0}, {{0, 0, 1}, -beta}}});
}

DynSystem hopf_system() {
    const double mu = -0.05, omega = 1.0, A = 1.0;
    auto rhs = [=](const Vec& x) {
        Vec d(2);
        double r2 = x[0] * x[0] + x[1] * x[1];
        d[0] = mu * x[0] + omega * x[1] - A * x[0] * r2;
        d[1] = -omega * x[0] + mu * x[1] - A * x[1] * r2;
        return d;
    };
    Vec x0(2);
    x0 << 1.0, 0.75;
    return make_system(
        "hopf", 2, rhs, x0,
        {{{{1, 0}, mu}, {{0, 1}, omega}, {{3, 0}, -A}, {{1, 2}, -A}},
         {{{1, 0}, -omega}, {{0, 1}, mu}, {{2, 1}, -A}, {{0, 3}, -A}}});
}

DynSystem mhd_system() {
    // six-mode truncation; states are (V1, V2, V3, B1, B2, B3)
    auto rhs = [](const Vec& x) {
        Vec d(6);
        d[0] = 4.0 * (x[1] * x[2] - x[4] * x[5]);
        d[1] = -7.0 * x[0] * x[2] + 7.0 * x[3] * x[4];
        d[2] = 3.0 * (x[0] * x[1] - x[3] * x[4]);
        d[3] = 2.0 * (x[5] * x[1] - x[2] * x[4]);
        d[4] = 5.0 * (x[2] * x[3] - x[5] * x[0]);
        d[5] = 9.0 * (x[0] * x[4] - x[3] * x[1]);
        return d;
    };
    Vec x0(6);
    x0 << 1.0, -1.0, 0.5, -0.5, -1.0, 0.25;
    return make_system(
        "mhd", 6, rhs, x0,
        {{{{0, 1, 1, 0, 0, 0}, 4.0}, {{0, 0, 0, 0, 1, 1}, -4.0}},
         {{{1, 0, 1, 0, 0, 0}, -7.0}, {{0, 0, 0, 1, 1, 0}, 7.0}},
         {{{1, 1, 0, 0, 0, 0}, 3.0}, {{0, 0, 0, 1, 1, 0}, -3.0}},
         {{{0, 1, 0, 0, 0, 1}, 2.0}, {{0, 0, 1, 0, 1, 0}, -2.0}},
         {{{0, 0, 1, 1, 0, 0}, 5.0}, {{1, 0, 0, 0, 0, 1}, -5.0}},
         {{{1, 0, 0, 0, 1, 0}, 9.0}, {{0, 1, 0, 1, 0, 0}, -9.0}}});
}

DynSystem system_by_name(const std::string& name) {
    if (name == "lorenz") return lorenz_system();
    if (name == "hopf") return hopf_system();
    if (name == "mhd") return mhd_system();
    throw InvalidInput("unknown system: " + name);
}

namespace {

void enumerate_exponents(int dim, int pos, int remaining, std::vector<int>& cur,
                         std::vector<std::vector<int>>& out) {
    if (pos == dim - 1) {
        cur[pos] = remaining;
        out.push_back(cur);
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        cur[pos] = e;
        enumerate_exponents(dim, pos + 1, remaining - e, cur, out);
    }
}

std::string monomial_name(const std::vector<int>& expo) {
    std::string s;
    for (size_t v = 0; v < expo.size(); ++v) {
        if (expo[v] == 0) continue;
        if (!s.empty()) s += "*";
        s += "x" + std::to_string(v);
        if (expo[v] > 1) s += "^" + std::to_string(expo[v]);
    }
    return s.empty() ? "1" : s;
}

}  // namespace

MonomialLibrary monomial_library(int dim, int degree) {
    if (dim < 1 || degree < 0)
        throw InvalidInput("monomial_library: need dim >= 1 and degree >= 0");
    MonomialLibrary lib;
    lib.dim = dim;
    lib.degree = degree;
    std::vector<int> cur(dim, 0);
    for (int total = 0; total <= degree; ++total)
        enumerate_exponents(dim, 0, total, cur, lib.exponents);
    lib.names.reserve(lib.exponents.size());
    for (const auto& e : lib.exponents) lib.names.push_back(monomial_name(e));
    return lib;
}

int MonomialLibrary::index_of(const std::vector<int>& expo) const {
    for (size_t i = 0; i < exponents.size(); ++i)
        if (exponents[i] == expo) return static_cast<int>(i);
    return -1;
}

Mat MonomialLibrary::evaluate(const Mat& states) const {
    if (states.cols() != dim)
        throw InvalidInput("monomial evaluate: state dimension mismatch");
    const long T = states.rows();
    // power table: powers[v] columns 0..degree of states.col(v)
    std::vector<Mat> powers(dim);
    for (int v = 0; v < dim; ++v) {
        powers[v].resize(T, degree + 1);
        powers[v].col(0).setOnes();
        for (int g = 1; g <= degree; ++g)
            powers[v].col(g) = powers[v].col(g - 1).cwiseProduct(states.col(v));
    }
    Mat out(T, size());
    for (int i = 0; i < size(); ++i) {
        Vec col = Vec::Ones(T);
        for (int v = 0; v < dim; ++v)
            if (exponents[i][v] > 0) col = col.cwiseProduct(powers[v].col(exponents[i][v]));
        out.col(i) = col;
    }
    return out;
}

Vec MonomialLibrary::coefficients_of(const std::vector<TermSpec>& terms) const {
    Vec c = Vec::Zero(size());
    for (const TermSpec& t : terms) {
        int i = index_of(t.exponents);
        if (i < 0) throw InvalidInput("term is outside the library");
        c[i] += t.coeff;
    }
    return c;
}

Trajectory integrate(const DynSystem& sys, const Vec& x0, double duration,
                     double dt, double noise_level, std::uint64_t seed) {
    if (!(dt > 0.0) || !(duration > 0.0))
        throw InvalidInput("integrate: duration and dt must be positive");
    if (x0.size() != sys.dim) throw InvalidInput("integrate: bad initial state");

    const long nsteps = std::lround(duration / dt);
    Trajectory traj;
    traj.dt = dt;
    traj.times.resize(nsteps + 1);
    traj.states.resize(nsteps + 1, sys.dim);
    traj.states.row(0) = x0.transpose();

    Vec x = x0;
    for (long t = 0; t < nsteps; ++t) {
        Vec k1 = sys.rhs(x);
        Vec k2 = sys.rhs(x + 0.5 * dt * k1);
        Vec k3 = sys.rhs(x + 0.5 * dt * k2);
        Vec k4 = sys.rhs(x + dt * k3);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > 1e8)
            throw InvalidInput("integrate: trajectory diverged at t = " +
                               std::to_string((t + 1) * dt));
        traj.states.row(t + 1) = x.transpose();
    }
    for (long t = 0; t <= nsteps; ++t) traj.times[t] = t * dt;

    if (noise_level > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, noise_level);
        traj.noisy_states = traj.states;
        for (long t = 0; t < traj.noisy_states.rows(); ++t)
            for (int v = 0; v < sys.dim; ++v)
                traj.noisy_states(t, v) *= 1.0 + normal(rng);
    } else {
        traj.noisy_states = traj.states;
    }
    return traj;
}

namespace {

// quadratic least-squares fit over rows [base, base+len); returns the 3 x dim
// coefficient matrix of 1, s, s^2 with s measured in row offsets from base
Mat quad_fit(const Mat& states, long base, long len) {
    Mat A(len, 3);
    for (long i = 0; i < len; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = static_cast<double>(i);
        A(i, 2) = static_cast<double>(i) * static_cast<double>(i);
    }
    if (len < 3) A.conservativeResize(len, len);  // degree drops with the data
    Mat coef = (A.transpose() * A)
                   .ldlt()
                   .solve(A.transpose() * states.middleRows(base, len));
    if (coef.rows() < 3) {
        Mat full = Mat::Zero(3, states.cols());
        full.topRows(coef.rows()) = coef;
        return full;
    }
    return coef;
}

}  // namespace

DerivativeEstimate smoothed_derivative(const Mat& states, double dt, int window) {
    if (!(dt > 0.0)) throw InvalidInput("smoothed_derivative: dt must be positive");
    if (window < 3 || window % 2 == 0)
        throw InvalidInput("smoothed_derivative: window must be odd and >= 3");

    const long T = states.rows();
    const int dim = static_cast<int>(states.cols());
    DerivativeEstimate out;
    out.deriv.resize(T, dim);

    if (T < window) {
        // too short for the stencil; one shared fit, no interior rows
        Mat coef = quad_fit(states, 0, T);
        for (long t = 0; t < T; ++t)
            out.deriv.row(t) =
                (coef.row(1) + 2.0 * static_cast<double>(t) * coef.row(2)) / dt;
        out.interior_begin = out.interior_end = 0;
        return out;
    }

    const int h = window / 2;
    // pass 1: smooth each row with a quadratic least-squares fit over its
    // window (one-sided near the ends), keeping the fitted value
    Mat smooth(T, dim);
    double m = static_cast<double>(window), sum2 = 0.0, sum4 = 0.0;
    for (int i = -h; i <= h; ++i) {
        sum2 += static_cast<double>(i) * i;
        sum4 += static_cast<double>(i) * i * i * i;
    }
    const double det = m * sum4 - sum2 * sum2;
    for (long t = h; t < T - h; ++t) {
        Eigen::RowVectorXd t0 = Eigen::RowVectorXd::Zero(dim);
        Eigen::RowVectorXd t2 = Eigen::RowVectorXd::Zero(dim);
        for (int i = -h; i <= h; ++i) {
            t0 += states.row(t + i);
            t2 += static_cast<double>(i) * i * states.row(t + i);
        }
        smooth.row(t) = (sum4 * t0 - sum2 * t2) / det;
    }
    Mat head = quad_fit(states, 0, window);
    Mat tail = quad_fit(states, T - window, window);
    for (int t = 0; t < h; ++t) {
        double s = static_cast<double>(t);
        smooth.row(t) = head.row(0) + s * head.row(1) + s * s * head.row(2);
    }
    for (long t = T - h; t < T; ++t) {
        double s = static_cast<double>(t - (T - window));
        smooth.row(t) = tail.row(0) + s * tail.row(1) + s * s * tail.row(2);
    }

    // pass 2: second-order finite differences of the smoothed series
    for (long t = 1; t < T - 1; ++t)
        out.deriv.row(t) = (smooth.row(t + 1) - smooth.row(t - 1)) / (2.0 * dt);
    out.deriv.row(0) =
        (-3.0 * smooth.row(0) + 4.0 * smooth.row(1) - smooth.row(2)) / (2.0 * dt);
    out.deriv.row(T - 1) =
        (3.0 * smooth.row(T - 1) - 4.0 * smooth.row(T - 2) + smooth.row(T - 3)) /
        (2.0 * dt);

    out.interior_begin = h + 1;
    out.interior_end = static_cast<int>(T - h - 1);
    return out;
}

DiscoveryResult discover(const DynSystem& sys, const Trajectory& traj,
                         const DiscoveryConfig& dcfg) {
    MonomialLibrary lib = monomial_library(sys.dim, dcfg.degree);
    DerivativeEstimate de = smoothed_derivative(traj.noisy_states, traj.dt);

    const int begin = de.interior_begin;
    const int n_int = de.interior_end - de.interior_begin;
    if (n_int < 12) throw InvalidInput("discover: trajectory too short");

    Mat theta = lib.evaluate(traj.noisy_states.middleRows(begin, n_int));
    Mat dy = de.deriv.middleRows(begin, n_int);
    const int n_train = 2 * n_int / 3;
    const int n_val = n_int - n_train;

    Mat theta_train = theta.topRows(n_train);
    Mat theta_val = theta.bottomRows(n_val);

    DiscoveryResult res;
    res.library_size = lib.size();
    res.library_names = lib.names;

    // the gram matrix is shared by every dimension; only x'y differs
    std::vector<ProblemData> pds;
    pds.push_back(build_problem(theta_train, dy.col(0).head(n_train)));
    for (int d = 1; d < sys.dim; ++d) {
        pds.push_back(pds.front());
        pds.back().xty = theta_train.transpose() * dy.col(d).head(n_train);
        pds.back().yty = dy.col(d).head(n_train).squaredNorm();
    }

    const int nl = static_cast<int>(dcfg.lambda_grid.size());
    const int nk = static_cast<int>(dcfg.k_grid.size());
    std::vector<CellResult> cells(static_cast<size_t>(sys.dim) * nl * nk);

    // one job per (dimension, lambda2): the k grid shares a support cache,
    // so it stays inside a job and jobs touch nothing but their own cells
    auto run_pair = [&](int d, int li) {
        const double lambda2 = dcfg.lambda_grid[li];
        SupportCache cache;
        Vec yv = dy.col(d).tail(n_val);
        for (int ki = 0; ki < nk; ++ki) {
            const int k = dcfg.k_grid[ki];
            CellResult& cell = cells[(static_cast<size_t>(d) * nl + li) * nk + ki];
            cell.dim = d;
            cell.k = k;
            cell.lambda2 = lambda2;
            try {
                SolverConfig cfg;
                cfg.k = k;
                cfg.lambda2 = lambda2;
                cfg.gap_tol = dcfg.gap_tol;
                cfg.time_limit_s = dcfg.time_limit_per_fit;
                cfg.beam_width = dcfg.beam_width;
                BnBResult r = solve(pds[d], cfg, &cache);
                cell.status = to_string(r.status);
                cell.ok = r.status == BnBStatus::Optimal && n_val > k + 1;
                cell.train_loss = r.upper;
                cell.gap = r.gap;
                cell.support = r.best.support;
                cell.coeffs = r.best.coeffs;
                cell.elapsed_s = r.elapsed_s;
                Vec resid = yv - theta_val * r.best.densify(lib.size());
                cell.val_sse = resid.squaredNorm();
                double mean_sse = std::max(cell.val_sse / n_val, 1e-300);
                cell.aicc = n_val * std::log(mean_sse) + 2.0 * k +
                            2.0 * k * (k + 1.0) / (n_val - k - 1.0);
            } catch (const std::exception& ex) {
                cell.ok = false;
                cell.status = std::string("error: ") + ex.what();
            }
        }
    };

    const int pairs = sys.dim * nl;
    const int workers = std::min(dcfg.threads, pairs);
    if (workers > 1) {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int j = next.fetch_add(1); j < pairs; j = next.fetch_add(1))
                    run_pair(j / nl, j % nl);
            });
        for (std::thread& th : pool) th.join();
    } else {
        for (int j = 0; j < pairs; ++j) run_pair(j / nl, j % nl);
    }
    res.grid.assign(cells.begin(), cells.end());

    for (int d = 0; d < sys.dim; ++d) {
        DimensionModel model;
        model.dim = d;
        const CellResult* pick = nullptr;
        for (const CellResult& cell : res.grid) {
            if (cell.dim != d || !cell.ok) continue;
            if (!pick || cell.aicc < pick->aicc ||
                (cell.aicc == pick->aicc &&
                 (cell.k < pick->k ||
                  (cell.k == pick->k && cell.lambda2 < pick->lambda2))))
                pick = &cell;
        }
        if (pick) {
            model.selected = true;
            model.k = pick->k;
            model.lambda2 = pick->lambda2;
            model.aicc = pick->aicc;
            model.support = pick->support;
            model.coeffs = pick->coeffs;
            Vec truth = lib.coefficients_of(sys.true_terms[d]);
            RecoveryMetrics rm = recovery_metrics(
                SparseSolution{model.support, model.coeffs, 0.0}, truth);
            model.tpr = rm.tpr;
            model.l2_err = rm.l2_err;
        }
        res.models.push_back(std::move(model));
    }

    // score the chosen models against the exact field on fresh trajectories
    std::mt19937_64 rng(dcfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double sq_sum = 0.0;
    long count = 0;
    for (int s = 0; s < dcfg.n_sims; ++s) {
        Vec x0 = sys.default_x0;
        for (int v = 0; v < sys.dim; ++v) x0[v] += 0.25 * normal(rng);
        Trajectory sim = integrate(sys, x0, dcfg.sim_duration, traj.dt);
        Mat feats = lib.evaluate(sim.states);
        for (int d = 0; d < sys.dim; ++d) {
            if (!res.models[d].selected) continue;
            Vec pred = feats * SparseSolution{res.models[d].support,
                                              res.models[d].coeffs, 0.0}
                                   .densify(lib.size());
            for (long t = 0; t < sim.states.rows(); ++t) {
                double truth = sys.rhs(sim.states.row(t).transpose())[d];
                double diff = pred[t] - truth;
                sq_sum += diff * diff;
                ++count;
            }
        }
    }
    res.derivative_rmse =
        count > 0 ? std::sqrt(sq_sum / count) : std::numeric_limits<double>::quiet_NaN();
    return res;
}

}  // namespace okbnb
