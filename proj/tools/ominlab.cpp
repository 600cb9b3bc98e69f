#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ominlab/reports.hpp"

namespace fs = std::filesystem;
using namespace ominlab;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitNumeric = 3;

struct Settings {
    std::string curve;
    std::uint64_t seed = 1;
    double T = 1000.0;
    std::size_t steps = 0; // 0 picks a default per command
    std::vector<double> eps{0.3, 0.2, 0.1, 0.05, 0.02, 0.01};
    double delta = 0.5;
    std::string out = ".";
    std::string format = "json";
    unsigned threads = default_threads();
    bool kleinbock = false;
    std::vector<std::string> observables{"systole-bump"};
    std::vector<double> interval{1.0, 10.0};
    std::size_t grid_points = 200;
    std::size_t haar_samples = 0;
    std::size_t kleinbock_points = 100000;
    std::vector<std::string> argv;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool wants_json(const Settings& s) { return s.format != "csv"; }
bool wants_csv(const Settings& s) { return s.format != "json"; }

std::ofstream open_out(const Settings& s, const std::string& file) {
    fs::create_directories(s.out);
    const fs::path p = fs::path(s.out) / file;
    std::ofstream os(p);
    if (!os) throw invalid_input("cannot write '" + p.string() + "'");
    return os;
}

void emit_json(const Settings& s, const std::string& command, const ordered_json& payload) {
    if (!wants_json(s)) return;
    open_out(s, command + ".json") << payload.dump(2) << '\n';
    const auto now = std::chrono::system_clock::now();
    ordered_json meta = {{"schema_version", report::kSchemaVersion},
                         {"command", command},
                         {"timestamp_unix", std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count()},
                         {"argv", s.argv},
                         {"threads", s.threads}};
    open_out(s, command + ".meta.json") << meta.dump(2) << '\n';
}

CurveSpec load_curve(const Settings& s) { return parse_curve(read_file(s.curve)); }

int run_analyze(const Settings& s) {
    report::Outcome r = report::analyze(load_curve(s), s.seed);
    r.payload["seed"] = s.seed;
    emit_json(s, "analyze", r.payload);
    if (wants_csv(s)) {
        auto os = open_out(s, "degree_matrix.csv");
        for (const auto& row : r.payload["degree_matrix"]) {
            for (std::size_t j = 0; j < row.size(); ++j) {
                if (j) os << ',';
                os << (row[j].is_string() ? row[j].get<std::string>()
                                          : std::to_string(row[j]["num"].get<std::int64_t>()) + "/" +
                                                std::to_string(row[j]["den"].get<std::int64_t>()));
            }
            os << '\n';
        }
    }
    return r.certification_failed ? kExitNumeric : kExitOk;
}

int run_good(const Settings& s) {
    if (s.interval.size() != 2) throw invalid_input("--interval takes two numbers a,b");
    report::GoodInputs in;
    in.interval = Interval(s.interval[0], s.interval[1]);
    in.eps = s.eps;
    in.delta = s.delta;
    for (const Expr& e : parse_family(read_file(s.curve))) {
        in.members.push_back(to_string(e));
        in.family.push_back(lower_entry(e));
    }
    report::Outcome r = report::good(in, s.threads);
    emit_json(s, "good", r.payload);
    if (wants_csv(s)) {
        auto os = open_out(s, "sublevel.csv");
        os << "member,epsilon,measure,relative_epsilon,relative_measure\n";
        os.precision(17);
        for (const auto& m : r.payload["members"])
            for (const auto& x : m["samples"])
                os << m["id"].get<std::size_t>() << ',' << x["eps"].get<double>() << ',' << x["measure"].get<double>()
                   << ',' << x["relative_eps"].get<double>() << ',' << x["relative_measure"].get<double>() << '\n';
    }
    return kExitOk;
}

double haar_mean(const Observable& obs, std::uint64_t seed, std::size_t count, unsigned threads) {
    const auto pts = haar_sample_sl2(seed, count, threads);
    std::vector<double> v(pts.size());
    parallel_for(pts.size(), threads, [&](std::size_t i) { v[i] = evaluate_observable(obs, lattice_of(pts[i]).matrix()); });
    // fixed-order sum keeps the value independent of the thread count
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

int run_orbit(const Settings& s) {
    const CurveSpec spec = load_curve(s);
    const double t0 = integration_start(spec);
    if (!(s.T > t0)) throw invalid_input("--T must exceed the integration start " + std::to_string(t0));
    const Eigen::MatrixXd x0 = Eigen::MatrixXd::Identity(spec.n, spec.n);
    TrajectoryReport traj = systole_series(spec, x0, uniform_grid(t0, s.T, s.grid_points), kDivergenceThreshold, s.threads);
    traj.seed = s.seed;

    const std::size_t steps =
        s.steps ? s.steps : std::max<std::size_t>(1000, static_cast<std::size_t>(std::ceil(100.0 * (s.T - t0))));
    ordered_json avgs = ordered_json::array();
    for (const auto& name : s.observables) {
        const Observable obs = Observable::builtin(name);
        if (obs.needs_sl2() && spec.n != 2)
            throw invalid_input("observable '" + name + "' is defined on 2-dimensional lattices only");
        if (name != "systole") traj.observables.push_back({name, sample_observable(spec, x0, obs, traj.t_grid, s.threads)});
        const TimeAverage a = time_average(spec, LatticeBasis::standard(spec.n), obs, s.T, steps, s.threads);
        traj.averages.push_back({name, s.T, a.value});
        ordered_json entry = report::time_average_json(name, a);
        if (s.haar_samples && spec.n == 2)
            entry["haar_reference"] = haar_mean(obs, s.seed, s.haar_samples, s.threads);
        avgs.push_back(entry);
    }

    ordered_json j = report::envelope("orbit");
    j["curve"] = report::curve_header(spec);
    j["T"] = s.T;
    j["trajectory"] = report::trajectory_json(traj);
    j["time_averages"] = avgs;
    if (s.kleinbock) {
        KleinbockOptions opt;
        opt.points = s.kleinbock_points;
        opt.seed = s.seed;
        opt.threads = s.threads;
        j["kleinbock"] = report::kleinbock_json(kleinbock_check(spec, x0, Interval(t0, s.T), s.eps, opt));
    }
    emit_json(s, "orbit", j);
    if (wants_csv(s)) {
        auto os = open_out(s, "trajectory.csv");
        write_trajectory_csv(os, traj);
    }
    return kExitOk;
}

int run_circle(const Settings& s) {
    const CircleAverage c = circle_average(s.T);
    emit_json(s, "circle", report::circle_json(c));
    if (wants_csv(s)) {
        // geometric grid from 1 to T
        const std::size_t points = s.steps ? s.steps : 400;
        std::vector<double> Ts, As;
        for (std::size_t i = 0; i < points; ++i) {
            const double T = std::exp(std::log(s.T) * static_cast<double>(i + 1) / static_cast<double>(points));
            Ts.push_back(T);
            As.push_back(circle_average_at(T));
        }
        auto os = open_out(s, "circle.csv");
        os << "T,average\n";
        os.precision(17);
        for (std::size_t i = 0; i < Ts.size(); ++i) os << Ts[i] << ',' << As[i] << '\n';
        auto dat = open_out(s, "circle.dat");
        write_two_column(dat, Ts, As);
    }
    return kExitOk;
}

// Precedence is flag, then OMINLAB_SEED, then config file.
void apply_seed_env(Settings& s) {
    for (const auto& a : s.argv)
        if (a == "--seed" || a.rfind("--seed=", 0) == 0) return;
    const char* env = std::getenv("OMINLAB_SEED");
    if (!env || !*env) return;
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
        s.seed = v;
    } catch (const std::exception&) {
        throw invalid_input(std::string("OMINLAB_SEED must be a non-negative integer, got '") + env + "'");
    }
}

} // namespace

int main(int argc, char** argv) {
    Settings s;
    for (int i = 0; i < argc; ++i) s.argv.emplace_back(argv[i]);

    CLI::App app{"ominlab: power-series analysis of matrix curves and their orbits on lattice spaces"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file with option values; flags and the environment take precedence");
    app.option_defaults()->always_capture_default();
    app.fallthrough();

    app.add_option("--seed", s.seed, "Random seed (OMINLAB_SEED overrides the config file)");
    app.add_option("--out", s.out, "Output directory");
    app.add_option("--format", s.format, "Artifacts to write")->check(CLI::IsMember({"json", "csv", "both"}));
    app.add_option("--threads", s.threads, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);

    auto* analyze = app.add_subcommand("analyze", "Degree matrix, wedge scan, family conditions, P.S. group and SUC");
    analyze->add_option("--curve", s.curve, "Curve file")->required()->check(CLI::ExistingFile);

    auto* good = app.add_subcommand("good", "Sublevel-set fit and Remez ratios for a family of power sums");
    good->add_option("--family,--curve", s.curve, "Family file, one expression per line")
        ->required()
        ->check(CLI::ExistingFile);
    good->add_option("--interval", s.interval, "Interval a,b with 0 < a < b")->delimiter(',')->expected(2);
    good->add_option("--eps", s.eps, "Comma-separated epsilon grid")->delimiter(',')->check(CLI::PositiveNumber);
    good->add_option("--delta", s.delta, "Remez sub-interval fraction in (0, 1]")->check(CLI::Range(1e-12, 1.0));

    auto* orbit = app.add_subcommand("orbit", "Systole series and time averages along phi(t) Z^n");
    orbit->add_option("--curve", s.curve, "Curve file")->required()->check(CLI::ExistingFile);
    orbit->add_option("--T", s.T, "Final time")->check(CLI::PositiveNumber);
    orbit->add_option("--steps", s.steps, "Quadrature steps (default 100 per unit time, at least 1000)");
    orbit->add_option("--grid-points", s.grid_points, "Points in the sampled series")->check(CLI::Range(2, 10000000));
    orbit->add_option("--observable", s.observables, "Observables: systole-bump, systole, bump, cusp")
        ->delimiter(',')
        ->check(CLI::IsMember(builtin_observables()));
    orbit->add_option("--haar-samples", s.haar_samples, "Monte Carlo reference size for 2x2 curves (0 disables)");
    orbit->add_flag("--check-kleinbock", s.kleinbock, "Run the quantitative non-divergence check");
    orbit->add_option("--eps", s.eps, "Comma-separated epsilon grid")->delimiter(',')->check(CLI::PositiveNumber);
    orbit->add_option("--kleinbock-points", s.kleinbock_points, "Sample points for the measure estimate")
        ->check(CLI::PositiveNumber);

    auto* circle = app.add_subcommand("circle", "Averages of sin(2 pi log(t+1)) at the two phases near T");
    circle->add_option("--T", s.T, "Time scale, at least 1")->check(CLI::Range(1.0, 1e300));
    circle->add_option("--steps", s.steps, "Points in the CSV curve (default 400)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        apply_seed_env(s);
        if (*analyze) return run_analyze(s);
        if (*good) return run_good(s);
        if (*orbit) return run_orbit(s);
        return run_circle(s);
    } catch (const invalid_input& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const error& e) {
        std::cerr << "numeric certification failed: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
}
