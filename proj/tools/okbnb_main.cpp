#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "okbnb/datagen.hpp"
#include "okbnb/ode.hpp"
#include "okbnb/report.hpp"

namespace {

using namespace okbnb;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitParse = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitTimeLimit = 4;

int env_threads() {
    const char* v = std::getenv("OKBNB_THREADS");
    if (!v) return 0;
    int t = std::atoi(v);
    return t < 0 ? 0 : t;
}

// Run fn(0..jobs-1); sequential unless OKBNB_THREADS asks for more workers.
void run_jobs(int jobs, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1) {
        for (int i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) fn(i);
    };
    std::vector<std::thread> pool;
    int nw = std::min(threads, jobs);
    pool.reserve(nw);
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

void emit(const nlohmann::json& doc, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        out << doc.dump(2) << "\n";
    }
}

std::vector<double> parse_double_list(const std::string& csv, const char* what) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            size_t used = 0;
            out.push_back(std::stod(field, &used));
            if (used != field.size()) throw std::invalid_argument(field);
        } catch (const std::exception&) {
            throw InvalidInput(std::string("bad ") + what + " entry: '" + field + "'");
        }
    }
    if (out.empty()) throw InvalidInput(std::string("empty ") + what);
    return out;
}

std::vector<int> parse_int_list(const std::string& csv, const char* what) {
    std::vector<int> out;
    for (double v : parse_double_list(csv, what)) {
        int i = static_cast<int>(v);
        if (static_cast<double>(i) != v)
            throw InvalidInput(std::string("non-integer ") + what + " entry");
        out.push_back(i);
    }
    return out;
}

int cmd_solve(const std::string& x_path, const std::string& y_path, int k,
              double lambda2, double gap_tol, double time_limit_s, bool no_admm,
              int beam_width, const std::string& out_path) {
    ProblemData pd;
    try {
        Mat X = read_csv_matrix(x_path);
        Vec y = read_csv_vector(y_path);
        pd = build_problem(X, y);
    } catch (const CsvError& ex) {
        std::cerr << "input error: " << ex.what() << "\n";
        return kExitParse;
    } catch (const InvalidInput& ex) {
        std::cerr << "input error: " << ex.what() << "\n";
        return kExitParse;
    }

    SolverConfig cfg;
    cfg.k = k;
    cfg.lambda2 = lambda2;
    cfg.gap_tol = gap_tol;
    if (time_limit_s > 0.0) cfg.time_limit_s = time_limit_s;
    cfg.beam_width = beam_width;
    cfg.use_admm = !no_admm;

    try {
        BnBResult res = solve(pd, cfg);
        emit(run_report(pd, cfg, res), out_path);
        return res.status == BnBStatus::TimeLimit ? kExitTimeLimit : kExitOk;
    } catch (const InfeasibleConfig& ex) {
        std::cerr << "infeasible: " << ex.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitInternal;
    }
}

int cmd_bench(int n, const std::string& p_list, const std::string& rho_list, int k,
              double snr, const std::string& seeds, double lambda2, double gap_tol,
              double time_limit_s, bool oracle) {
    std::vector<int> ps, seed_list;
    std::vector<double> rhos;
    try {
        ps = parse_int_list(p_list, "p-list");
        rhos = parse_double_list(rho_list, "rho-list");
        seed_list = parse_int_list(seeds, "seeds");
        for (double rho : rhos)
            if (!(rho >= 0.0 && rho < 1.0))
                throw InvalidInput("rho must be in [0, 1)");
    } catch (const InvalidInput& ex) {
        std::cerr << "input error: " << ex.what() << "\n";
        return kExitParse;
    }

    struct Job {
        int p;
        double rho;
        int seed;
    };
    std::vector<Job> jobs;
    for (int p : ps)
        for (double rho : rhos)
            for (int seed : seed_list) jobs.push_back({p, rho, seed});

    std::vector<std::string> rows(jobs.size());
    std::atomic<bool> infeasible{false}, parse_bad{false};
    std::atomic<bool> failed{false};

    run_jobs(static_cast<int>(jobs.size()), env_threads(), [&](int i) {
        const Job& job = jobs[i];
        try {
            SyntheticSpec spec;
            spec.n = n;
            spec.p = job.p;
            spec.k_true = k;
            spec.rho = job.rho;
            spec.snr = snr;
            spec.seed = static_cast<std::uint64_t>(job.seed);
            SyntheticData data = generate(spec);
            ProblemData pd = build_problem(data.X, data.y);

            SolverConfig cfg;
            cfg.k = k;
            cfg.lambda2 = lambda2;
            cfg.gap_tol = gap_tol;
            if (time_limit_s > 0.0) cfg.time_limit_s = time_limit_s;

            BnBResult res = solve(pd, cfg);
            RecoveryMetrics m = recovery_metrics(res.best, data.beta_star);

            std::string oracle_match;
            if (oracle) {
                SparseSolution exact = brute_force_optimum(pd, cfg);
                double tol = 1e-8 * std::max(1.0, std::abs(exact.loss));
                oracle_match = res.upper <= exact.loss + tol ? "true" : "false";
            }
            char buf[256];
            std::snprintf(buf, sizeof(buf), "%d,%g,%d,%.12g,%.6g,%.3f,%.4f,%s",
                          job.p, job.rho, job.seed, res.upper, res.gap,
                          res.elapsed_s, m.tpr, oracle_match.c_str());
            rows[i] = buf;
        } catch (const InvalidInput&) {
            parse_bad = true;
        } catch (const InfeasibleConfig&) {
            infeasible = true;
        } catch (const std::exception&) {
            failed = true;
        }
    });

    if (parse_bad) {
        std::cerr << "input error: instance specification rejected\n";
        return kExitParse;
    }
    if (infeasible) {
        std::cerr << "infeasible solver configuration\n";
        return kExitInfeasible;
    }
    if (failed) {
        std::cerr << "benchmark run failed\n";
        return kExitInternal;
    }

    std::cout << "p,rho,seed,loss,gap,time_s,tpr,oracle_match\n";
    for (const std::string& row : rows) std::cout << row << "\n";
    return kExitOk;
}

int cmd_discover(const std::string& system, double duration_s, double dt,
                 double noise, int degree, const std::string& k_grid,
                 const std::string& lambda_grid, int seed, double time_limit_per_fit,
                 const std::string& out_path) {
    DynSystem sys;
    DiscoveryConfig dcfg;
    try {
        sys = system_by_name(system);
        dcfg.degree = degree;
        dcfg.k_grid = parse_int_list(k_grid, "k-grid");
        dcfg.lambda_grid = parse_double_list(lambda_grid, "lambda-grid");
        dcfg.time_limit_per_fit = time_limit_per_fit;
        dcfg.seed = static_cast<std::uint64_t>(seed) + 1;
        dcfg.threads = env_threads();
        for (int k : dcfg.k_grid)
            if (k < 1) throw InvalidInput("k-grid entries must be >= 1");
    } catch (const InvalidInput& ex) {
        std::cerr << "input error: " << ex.what() << "\n";
        return kExitParse;
    }

    try {
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
        std::normal_distribution<double> normal(0.0, 1.0);
        Vec x0 = sys.default_x0;
        for (int v = 0; v < sys.dim; ++v) x0[v] += 0.25 * normal(rng);

        Trajectory traj = integrate(sys, x0, duration_s, dt, noise, rng());
        DiscoveryResult res = discover(sys, traj, dcfg);

        nlohmann::json j;
        j["version"] = kVersion;
        j["command"] = "discover";
        j["system"] = sys.name;
        j["duration_s"] = duration_s;
        j["dt"] = dt;
        j["noise"] = noise;
        j["degree"] = degree;
        j["seed"] = seed;
        j["library_size"] = res.library_size;
        j["derivative_rmse"] = res.derivative_rmse;
        j["models"] = nlohmann::json::array();
        for (const DimensionModel& m : res.models) {
            nlohmann::json jm;
            jm["dim"] = m.dim;
            jm["selected"] = m.selected;
            jm["k"] = m.k;
            jm["lambda2"] = m.lambda2;
            jm["aicc"] = m.aicc;
            jm["support"] = m.support;
            std::vector<double> coeffs(m.coeffs.data(), m.coeffs.data() + m.coeffs.size());
            jm["coeffs"] = coeffs;
            nlohmann::json terms = nlohmann::json::object();
            for (size_t i = 0; i < m.support.size(); ++i)
                terms[res.library_names[m.support[i]]] = coeffs[i];
            jm["terms"] = terms;
            jm["tpr"] = m.tpr;
            jm["l2_err"] = m.l2_err;
            j["models"].push_back(jm);
        }
        j["grid"] = nlohmann::json::array();
        for (const CellResult& c : res.grid) {
            j["grid"].push_back({{"dim", c.dim},
                                 {"k", c.k},
                                 {"lambda2", c.lambda2},
                                 {"ok", c.ok},
                                 {"status", c.status},
                                 {"train_loss", c.train_loss},
                                 {"gap", c.gap},
                                 {"val_sse", c.val_sse},
                                 {"aicc", c.aicc},
                                 {"support", c.support},
                                 {"elapsed_s", c.elapsed_s}});
        }
        emit(j, out_path);
        return kExitOk;
    } catch (const InfeasibleConfig& ex) {
        std::cerr << "infeasible: " << ex.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& ex) {
        // includes integration divergence
        std::cerr << "error: " << ex.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"certifiably optimal k-sparse ridge regression"};
    app.require_subcommand(1);
    app.set_version_flag("--version", okbnb::kVersion);

    // solve
    std::string x_path, y_path, out_path;
    int k = 1, beam_width = 50;
    double lambda2 = 0.0, gap_tol = 1e-4, time_limit_s = 0.0;
    bool no_admm = false;
    auto* solve_cmd = app.add_subcommand("solve", "solve one instance from CSV files");
    solve_cmd->add_option("--x", x_path, "design matrix CSV (n rows, p columns)")
        ->required();
    solve_cmd->add_option("--y", y_path, "response CSV (one value per row)")->required();
    solve_cmd->add_option("--k", k, "support size")->required();
    solve_cmd->add_option("--lambda2", lambda2, "ridge penalty")->required();
    solve_cmd->add_option("--gap-tol", gap_tol, "relative gap tolerance")->capture_default_str();
    solve_cmd->add_option("--time-limit-s", time_limit_s, "wall clock budget");
    solve_cmd->add_option("--beam-width", beam_width, "beam width")->capture_default_str();
    solve_cmd->add_flag("--no-admm", no_admm, "fast bounds only");
    solve_cmd->add_option("--out", out_path, "write the JSON report here");

    // bench
    int bench_n = 100, bench_k = 5;
    double bench_snr = 5.0, bench_lambda2 = 1e-3, bench_gap_tol = 1e-4,
           bench_time_limit = 0.0;
    std::string p_list = "10", rho_list = "0.1", seeds = "0";
    bool oracle = false;
    auto* bench_cmd = app.add_subcommand("bench", "synthetic benchmark sweep");
    bench_cmd->add_option("--n", bench_n, "samples")->capture_default_str();
    bench_cmd->add_option("--p-list", p_list, "comma-separated dimensions")->capture_default_str();
    bench_cmd->add_option("--rho-list", rho_list, "comma-separated correlations")->capture_default_str();
    bench_cmd->add_option("--k", bench_k, "planted and fitted support size")->capture_default_str();
    bench_cmd->add_option("--snr", bench_snr, "signal-to-noise ratio")->capture_default_str();
    bench_cmd->add_option("--seeds", seeds, "comma-separated seeds")->capture_default_str();
    bench_cmd->add_option("--lambda2", bench_lambda2, "ridge penalty")->capture_default_str();
    bench_cmd->add_option("--gap-tol", bench_gap_tol, "relative gap tolerance")->capture_default_str();
    bench_cmd->add_option("--time-limit-s", bench_time_limit, "per-instance budget");
    bench_cmd->add_flag("--oracle", oracle, "also brute-force each instance");

    // discover
    std::string system, k_grid = "1,2,3,4,5", lambda_grid = "1e-5,1e-3,1e-2,0.05,0.2",
                discover_out;
    double duration_s = 10.0, dt = 0.002, noise = 0.002, time_limit_per_fit = 30.0;
    int degree = 5, seed = 0;
    auto* discover_cmd = app.add_subcommand("discover", "recover governing equations");
    discover_cmd->add_option("--system", system, "lorenz, hopf or mhd")->required();
    discover_cmd->add_option("--duration-s", duration_s, "trajectory length")->capture_default_str();
    discover_cmd->add_option("--dt", dt, "integration step")->capture_default_str();
    discover_cmd->add_option("--noise", noise, "multiplicative noise level")->capture_default_str();
    discover_cmd->add_option("--degree", degree, "max monomial degree")->capture_default_str();
    discover_cmd->add_option("--k-grid", k_grid, "support sizes to try")->capture_default_str();
    discover_cmd->add_option("--lambda-grid", lambda_grid, "penalties to try")->capture_default_str();
    discover_cmd->add_option("--seed", seed, "trajectory seed")->capture_default_str();
    discover_cmd
        ->add_option("--time-limit-per-fit", time_limit_per_fit,
                     "seconds per grid cell")
        ->capture_default_str();
    discover_cmd->add_option("--out", discover_out, "write the JSON report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForVersion")
            return app.exit(e);
        app.exit(e);
        return kExitParse;
    }

    if (solve_cmd->parsed())
        return cmd_solve(x_path, y_path, k, lambda2, gap_tol, time_limit_s, no_admm,
                         beam_width, out_path);
    if (bench_cmd->parsed())
        return cmd_bench(bench_n, p_list, rho_list, bench_k, bench_snr, seeds,
                         bench_lambda2, bench_gap_tol, bench_time_limit, oracle);
    if (discover_cmd->parsed())
        return cmd_discover(system, duration_s, dt, noise, degree, k_grid, lambda_grid,
                            seed, time_limit_per_fit, discover_out);
    return kExitParse;
}
