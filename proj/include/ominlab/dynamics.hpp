#pragma once

// Trajectories t -> phi(t) x0 in the space of lattices: systole series,
// quadrature of time averages, the Kleinbock non-divergence harness, the
// invariance defect of the P.S. group and the logarithmic circle average.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "curves.hpp"
#include "errors.hpp"
#include "goodness.hpp"
#include "lattice.hpp"
#include "parallel.hpp"
#include "parser.hpp"
#include "psgroup.hpp"

namespace ominlab {

inline constexpr double kDivergenceThreshold = 0.05;

// ---------------------------------------------------------------------------
// Observables

enum class ObservableKind { SystoleBump, Systole, HeightBump, CuspSmooth, Custom };

// Built-ins:
//   systole-bump  exp(-((lambda_1 - 1) / 0.25)^2)
//   systole       lambda_1
//   bump          exp(-(y - 1.2)^2), y the height of the reduced point (SL(2) only)
//   cusp          1 / (1 + exp(-(y - 2) / 0.05)), a smoothed indicator of y > 2 (SL(2) only)
struct Observable {
    ObservableKind kind = ObservableKind::HeightBump;
    std::string name = "bump";
    std::function<double(const LatticeBasis&)> custom; // used when kind == Custom
    double sup_bound = 1.0;                             // bound on |f|, +inf when unknown

    static Observable builtin(const std::string& name) {
        Observable o;
        o.name = name;
        if (name == "systole-bump") o.kind = ObservableKind::SystoleBump;
        else if (name == "systole") {
            o.kind = ObservableKind::Systole;
            o.sup_bound = std::numeric_limits<double>::infinity();
        } else if (name == "bump") o.kind = ObservableKind::HeightBump;
        else if (name == "cusp") o.kind = ObservableKind::CuspSmooth;
        else throw invalid_input("unknown observable '" + name + "' (expected systole-bump, systole, bump or cusp)");
        return o;
    }

    static Observable plugin(std::string name, std::function<double(const LatticeBasis&)> fn,
                             double sup = std::numeric_limits<double>::infinity()) {
        Observable o;
        o.kind = ObservableKind::Custom;
        o.name = std::move(name);
        o.custom = std::move(fn);
        o.sup_bound = sup;
        return o;
    }

    bool needs_sl2() const { return kind == ObservableKind::HeightBump || kind == ObservableKind::CuspSmooth; }
};

inline std::vector<std::string> builtin_observables() { return {"systole-bump", "systole", "bump", "cusp"}; }

namespace detail {

inline LatticeBasis frame_lattice(const Eigen::MatrixXd& basis) {
    return LatticeBasis(basis, std::abs(std::abs(basis.determinant()) - 1.0) <= 1e-9);
}

} // namespace detail

// f on the lattice spanned by the columns of `basis` (assumed unimodular).
inline double evaluate_observable(const Observable& obs, const Eigen::MatrixXd& basis) {
    if (obs.kind == ObservableKind::Custom) return obs.custom(detail::frame_lattice(basis));
    if (basis.rows() == 2) {
        const UpperHalfPoint p = reduce_tau(tau_of(basis));
        switch (obs.kind) {
        case ObservableKind::HeightBump: return std::exp(-(p.y - 1.2) * (p.y - 1.2));
        case ObservableKind::CuspSmooth: return 1.0 / (1.0 + std::exp(-(p.y - 2.0) / 0.05));
        default: break;
        }
        // the shortest vector of the reduced lattice has length sqrt(covolume / y)
        const double lambda = std::sqrt(std::abs(basis.determinant()) / p.y);
        if (obs.kind == ObservableKind::Systole) return lambda;
        return std::exp(-((lambda - 1.0) / 0.25) * ((lambda - 1.0) / 0.25));
    }
    if (obs.needs_sl2()) throw invalid_input("observable '" + obs.name + "' is defined on 2-dimensional lattices only");
    const double lambda = systole(detail::frame_lattice(basis));
    if (obs.kind == ObservableKind::Systole) return lambda;
    return std::exp(-((lambda - 1.0) / 0.25) * ((lambda - 1.0) / 0.25));
}

// ---------------------------------------------------------------------------
// Trajectories

inline Eigen::MatrixXd trajectory_point(const CurveSpec& phi, const Eigen::MatrixXd& x0, double t) {
    if (!(t >= phi.t_start) || !std::isfinite(t))
        throw invalid_input("t = " + std::to_string(t) + " lies outside the curve domain [" +
                            std::to_string(phi.t_start) + ", inf)");
    return eval_spec(phi, t) * x0;
}

struct NamedSeries {
    std::string name;
    std::vector<double> values;
};

struct NamedAverage {
    std::string name;
    double T = 0.0;
    double value = 0.0;
};

struct TrajectoryReport {
    std::vector<double> t_grid;
    std::vector<NamedSeries> observables;
    std::vector<NamedAverage> averages;
    std::uint64_t seed = 0;
    bool diverges = false;
    double divergence_threshold = kDivergenceThreshold;
};

inline void check_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw invalid_input("time grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw invalid_input("time grid must lie in (0, inf)");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw invalid_input("time grid must be strictly increasing");
    }
}

inline std::vector<double> uniform_grid(double a, double b, std::size_t points) {
    if (points < 2) throw invalid_input("a grid needs at least two points");
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i)
        g[i] = i + 1 == points ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
    return g;
}

inline std::vector<double> sample_observable(const CurveSpec& phi, const Eigen::MatrixXd& x0, const Observable& obs,
                                             const std::vector<double>& grid, unsigned threads = 1) {
    std::vector<double> out(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        out[i] = evaluate_observable(obs, trajectory_point(phi, x0, grid[i]));
    });
    return out;
}

// lambda_1(phi(t) g Z^n) along the grid; `diverges` is set when every point of
// the trailing 10% of the grid has lambda_1 below the threshold.
inline TrajectoryReport systole_series(const CurveSpec& phi, const Eigen::MatrixXd& g, const std::vector<double>& grid,
                                       double threshold = kDivergenceThreshold, unsigned threads = 1) {
    check_grid(grid);
    TrajectoryReport rep;
    rep.t_grid = grid;
    rep.divergence_threshold = threshold;
    rep.observables.push_back({"systole", sample_observable(phi, g, Observable::builtin("systole"), grid, threads)});
    const std::vector<double>& s = rep.observables.front().values;
    const std::size_t tail = std::max<std::size_t>(1, (grid.size() + 9) / 10);
    rep.diverges = std::all_of(s.end() - static_cast<std::ptrdiff_t>(tail), s.end(),
                               [&](double v) { return v < threshold; });
    return rep;
}

// ---------------------------------------------------------------------------
// Quadrature

struct TimeAverage {
    double value = 0.0;
    double richardson_error = 0.0; // |S_n - S_{n/2}| / 15, normalized
    double head_bound = 0.0;       // sup|f| t_min / T for the skipped [0, t_min]
    double t_min = 0.0;
    double T = 0.0;
    std::size_t steps = 0;
    double error_budget() const { return richardson_error + head_bound; }
};

namespace detail {

inline constexpr std::size_t kQuadratureChunk = 4096;

// Composite Simpson sums of g over [a, b] with `steps` panels and with steps/2
// panels on the even nodes. Chunks of nodes are summed independently and combined
// in chunk order so the result does not depend on the thread count.
template <class G>
std::pair<double, double> simpson_pair(double a, double b, std::size_t steps, unsigned threads, G&& g,
                                       double* sup_abs = nullptr) {
    const std::size_t nodes = steps + 1;
    const double h = (b - a) / static_cast<double>(steps);
    const std::size_t chunks = (nodes + kQuadratureChunk - 1) / kQuadratureChunk;
    std::vector<double> fine(chunks, 0.0), coarse(chunks, 0.0), sup(chunks, 0.0);
    parallel_for(chunks, threads, [&](std::size_t c) {
        const std::size_t lo = c * kQuadratureChunk, hi = std::min(nodes, lo + kQuadratureChunk);
        double sf = 0.0, sc = 0.0, m = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double t = i == steps ? b : a + h * static_cast<double>(i);
            const double v = g(t);
            if (!std::isfinite(v)) throw numerical_error("observable is undefined on the trajectory at t = " + std::to_string(t));
            m = std::max(m, std::abs(v));
            const bool end = i == 0 || i == steps;
            sf += (end ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0)) * v;
            if (i % 2 == 0) sc += (end ? 1.0 : (i % 4 == 2 ? 4.0 : 2.0)) * v;
        }
        fine[c] = sf;
        coarse[c] = sc;
        sup[c] = m;
    });
    double sf = 0.0, sc = 0.0, m = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) {
        sf += fine[c];
        sc += coarse[c];
        m = std::max(m, sup[c]);
    }
    if (sup_abs) *sup_abs = m;
    return {sf * h / 3.0, sc * 2.0 * h / 3.0};
}

inline std::size_t simpson_steps(std::size_t steps) {
    if (steps < 4) throw invalid_input("quadrature needs at least 4 panels");
    return (steps + 3) / 4 * 4;
}

template <class G>
TimeAverage average_over_trajectory(double t_min, double T, std::size_t steps, unsigned threads, double sup_bound,
                                    G&& g) {
    if (!(T > t_min)) throw invalid_input("T must exceed the start of the integration range " + std::to_string(t_min));
    TimeAverage out;
    out.t_min = t_min;
    out.T = T;
    out.steps = simpson_steps(steps);
    double sup_seen = 0.0;
    const auto [fine, coarse] = simpson_pair(t_min, T, out.steps, threads, g, &sup_seen);
    const double len = T - t_min;
    out.value = fine / len;
    out.richardson_error = std::abs(fine - coarse) / 15.0 / len;
    const double sup = std::isfinite(sup_bound) ? sup_bound : sup_seen;
    out.head_bound = sup * t_min / T;
    return out;
}

} // namespace detail

inline double integration_start(const CurveSpec& phi) { return std::max(1.0, phi.t_start); }

// Average of t -> f(phi(t) x0) over [t_min, T], t_min = max(1, domain start).
inline TimeAverage time_average(const CurveSpec& phi, const LatticeBasis& x0, const Observable& obs, double T,
                                std::size_t steps, unsigned threads = 1) {
    const Eigen::MatrixXd X = x0.matrix();
    return detail::average_over_trajectory(integration_start(phi), T, steps, threads, obs.sup_bound, [&](double t) {
        return evaluate_observable(obs, trajectory_point(phi, X, t));
    });
}

// rho(s) of the curve; bounded curves converge, so their P.S. group is trivial.
inline Eigen::MatrixXd one_parameter_element(const CurveSpec& phi, double s) {
    if (s == 0.0) return Eigen::MatrixXd::Identity(phi.n, phi.n);
    const MatrixCurve curve = lower_curve(phi);
    if (is_bounded(curve)) return Eigen::MatrixXd::Identity(phi.n, phi.n);
    return ps_one_param(curve, ps_order(curve), s);
}

// |average of f(rho(s) phi(t) x0) - f(phi(t) x0)| over [t_min, T].
inline TimeAverage invariance_defect(const CurveSpec& phi, const LatticeBasis& x0, const Observable& obs, double s,
                                     double T, std::size_t steps, unsigned threads = 1) {
    TimeAverage out;
    out.t_min = integration_start(phi);
    out.T = T;
    out.steps = detail::simpson_steps(steps);
    if (s == 0.0) return out;
    const Eigen::MatrixXd rho = one_parameter_element(phi, s);
    if (rho == Eigen::MatrixXd::Identity(phi.n, phi.n)) return out;
    const Eigen::MatrixXd X = x0.matrix();
    out = detail::average_over_trajectory(out.t_min, T, steps, threads, 2.0 * obs.sup_bound, [&](double t) {
        const Eigen::MatrixXd p = trajectory_point(phi, X, t);
        return evaluate_observable(obs, rho * p) - evaluate_observable(obs, p);
    });
    out.value = std::abs(out.value);
    return out;
}

// ---------------------------------------------------------------------------
// Kleinbock's quantitative non-divergence, checked empirically

struct KleinbockEntry {
    double eps = 0.0;
    double measure = 0.0;
    double bound = 0.0;
    bool asserted = false; // eps < rho and the non-contraction hypothesis was not refuted
    bool holds = true;
};

struct KleinbockReport {
    double rho = 0.0;
    double C = 0.0;
    double alpha = 0.0;
    bool fitted = false;
    std::size_t wedges_checked = 0;
    std::size_t fit_violations = 0;
    std::string hypothesis; // non-contraction verdict
    bool hypothesis_holds = true;
    std::size_t points = 0;
    double min_systole = 0.0;
    std::vector<KleinbockEntry> entries;
    std::size_t violations() const {
        return static_cast<std::size_t>(
            std::count_if(entries.begin(), entries.end(), [](const KleinbockEntry& e) { return e.asserted && !e.holds; }));
    }
};

struct KleinbockOptions {
    std::size_t points = 100000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::size_t random_wedges = 24;
    std::optional<double> C; // fitted from the wedge norms when absent
    std::optional<double> alpha;
};

namespace detail {

// |phi(t) w|^2 for the decomposable w = v_1 ^ ... ^ v_k (columns of V)
inline PowerSum wedge_norm_squared(const MatrixCurve& W, const Eigen::VectorXd& w) {
    PowerSum acc;
    for (std::size_t row = 0; row < W.n(); ++row) {
        PowerSum c;
        for (std::size_t col = 0; col < W.n(); ++col)
            if (w(static_cast<Eigen::Index>(col)) != 0.0) c = c + w(static_cast<Eigen::Index>(col)) * W(row, col);
        if (!c.is_zero()) acc = acc + c * c;
    }
    return acc;
}

// Measure of {lambda_1 <= eps} from samples, refining each crossing by bisection.
template <class F>
double sublevel_from_samples(const std::vector<double>& grid, const std::vector<double>& vals, double eps, F&& value_at) {
    double measure = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const bool in0 = vals[i] <= eps, in1 = vals[i + 1] <= eps;
        const double len = grid[i + 1] - grid[i];
        if (in0 && in1) {
            measure += len;
        } else if (in0 != in1) {
            double lo = grid[i], hi = grid[i + 1];
            for (int it = 0; it < 40; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((value_at(mid) <= eps) == in0) lo = mid;
                else hi = mid;
            }
            measure += in0 ? lo - grid[i] : grid[i + 1] - lo;
        }
    }
    return measure;
}

} // namespace detail

// |{x in B : lambda_1(phi(x) g Z^n) <= eps}| <= C n 2^n (eps / rho)^alpha |B|
//
// rho is the least (sup_B |phi(x) g w|)^(1/k) over the standard and seeded random
// integer decomposables w of every grade k < n, capped at 1. Unless supplied, C
// and alpha are fitted to the squared wedge norms, which are power sums; a
// (C, a)-good square gives a (C, 2a)-good norm.
inline KleinbockReport kleinbock_check(const CurveSpec& phi, const Eigen::MatrixXd& g, const Interval& B,
                                       const std::vector<double>& eps_grid, const KleinbockOptions& opt = {}) {
    const std::size_t n = phi.n;
    if (static_cast<std::size_t>(g.rows()) != n || static_cast<std::size_t>(g.cols()) != n)
        throw invalid_input("g must be " + std::to_string(n) + "x" + std::to_string(n));
    if (B.a < phi.t_start) throw invalid_input("B leaves the curve domain");
    KleinbockReport rep;
    const MatrixCurve curve = lower_curve(phi);

    const NonContractionReport nc = non_contraction_verdict(curve, opt.seed);
    rep.hypothesis = to_string(nc.verdict);
    if (nc.verdict == NonContraction::WitnessFound) {
        rep.hypothesis += ": " + nc.witness;
        rep.hypothesis_holds = false;
    }

    // wedge norms of decomposables: standard e_I, then seeded random integer ones
    std::vector<PowerSum> norms2;
    std::vector<std::size_t> grade;
    const CounterRng rng(opt.seed);
    for (std::size_t k = 1; k < n; ++k) {
        const MatrixCurve W = wedge_rep(curve, k);
        std::vector<Eigen::MatrixXd> frames;
        for (const auto& subset : subsets_colex(n, k)) {
            Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, k);
            for (std::size_t j = 0; j < k; ++j) V(subset[j], j) = 1.0;
            frames.push_back(V);
        }
        for (std::size_t r = 0; r < opt.random_wedges; ++r) {
            Eigen::MatrixXd V(n, k);
            std::uint64_t idx = 0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < k; ++j)
                    V(i, j) = static_cast<double>(rng.integer(1000 + 100 * k + r, idx++, -2, 2));
            frames.push_back(V);
        }
        for (const Eigen::MatrixXd& V : frames) {
            const Eigen::VectorXd w = wedge_vector(g * V);
            if (w.cwiseAbs().maxCoeff() < 1e-12) continue;
            PowerSum f = detail::wedge_norm_squared(W, w);
            if (!f.is_exact())
                throw invalid_input("wedge norms of this curve are not exact power sums; supply C and alpha");
            norms2.push_back(std::move(f));
            grade.push_back(k);
        }
    }
    rep.wedges_checked = norms2.size();
    rep.rho = 1.0;
    std::vector<PowerSum> normalized;
    for (std::size_t i = 0; i < norms2.size(); ++i) {
        const double sup2 = sup_norm(norms2[i], B);
        rep.rho = std::min(rep.rho, std::pow(std::sqrt(sup2), 1.0 / static_cast<double>(grade[i])));
        if (sup2 > 0.0) normalized.push_back((1.0 / sup2) * norms2[i]);
    }

    if (opt.C && opt.alpha) {
        rep.C = *opt.C;
        rep.alpha = *opt.alpha;
    } else {
        if (normalized.empty()) throw invalid_input("no nonzero wedge norm to fit (C, alpha) from");
        const std::vector<double> levels{1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.25, 0.5};
        GoodnessOptions gopt;
        gopt.threads = opt.threads;
        const GoodnessReport fit = estimate_alpha(normalized, B, levels, gopt);
        if (!fit.alpha_hat || !fit.C_hat) throw invalid_input("(C, alpha) fit is degenerate: " + fit.degenerate_reason);
        rep.C = *fit.C_hat;
        rep.alpha = 2.0 * *fit.alpha_hat;
        rep.fit_violations = fit.violations.size();
        rep.fitted = true;
    }

    const std::vector<double> grid = uniform_grid(B.a, B.b, std::max<std::size_t>(opt.points, 2));
    rep.points = grid.size();
    const Observable sys = Observable::builtin("systole");
    const std::vector<double> lam = sample_observable(phi, g, sys, grid, opt.threads);
    rep.min_systole = *std::min_element(lam.begin(), lam.end());
    const auto value_at = [&](double t) { return evaluate_observable(sys, trajectory_point(phi, g, t)); };
    rep.entries.resize(eps_grid.size());
    parallel_for(eps_grid.size(), opt.threads, [&](std::size_t i) {
        KleinbockEntry& e = rep.entries[i];
        e.eps = eps_grid[i];
        e.measure = detail::sublevel_from_samples(grid, lam, e.eps, value_at);
        e.bound = rep.C * static_cast<double>(n) * std::pow(2.0, static_cast<double>(n)) *
                  std::pow(e.eps / rep.rho, rep.alpha) * B.length();
        e.asserted = rep.hypothesis_holds && e.eps < rep.rho;
        e.holds = e.measure <= e.bound;
    });
    return rep;
}

// ---------------------------------------------------------------------------
// Logarithmic circle average

struct CircleAverage {
    std::int64_t k = 0;
    double T_phase0 = 0.0;
    double T_phase_pi = 0.0;
    double value_phase0 = 0.0;
    double value_phase_pi = 0.0;
    double quadrature_change = 0.0; // largest change from the last step doubling
};

namespace detail {

// (1/T) int_0^T sin(2 pi log(t+1)) dt = (1/T) int_0^{log(T+1)} sin(2 pi u) e^u du,
// composite Simpson in u with doubling until two successive values agree to 1e-12.
inline std::pair<double, double> log_circle_average(double T) {
    const double U = std::log1p(T);
    const auto g = [](double u) { return std::sin(2.0 * std::numbers::pi * u) * std::exp(u); };
    std::size_t steps = 64 * static_cast<std::size_t>(std::ceil(U) + 1);
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int round = 0; round < 12; ++round, steps *= 2) {
        const double v = simpson_pair(0.0, U, steps, 1, g).first / T;
        if (std::isfinite(prev) && std::abs(v - prev) < 1e-12) return {v, std::abs(v - prev)};
        if (round == 11) return {v, std::abs(v - prev)};
        prev = v;
    }
    return {prev, 0.0};
}

} // namespace detail

inline double circle_average_at(double T) {
    if (!(T > 0.0)) throw invalid_input("circle average needs T > 0");
    return detail::log_circle_average(T).first;
}

// A(T) at T = e^{2 pi k} and T = e^{2 pi k + pi}, k = ceil(log(T) / 2 pi).
inline CircleAverage circle_average(double T) {
    if (!(T >= 1.0)) throw invalid_input("circle_average needs T >= 1");
    CircleAverage out;
    out.k = static_cast<std::int64_t>(std::ceil(std::log(T) / (2.0 * std::numbers::pi)));
    out.T_phase0 = std::exp(2.0 * std::numbers::pi * static_cast<double>(out.k));
    out.T_phase_pi = std::exp(2.0 * std::numbers::pi * static_cast<double>(out.k) + std::numbers::pi);
    const auto a = detail::log_circle_average(out.T_phase0);
    const auto b = detail::log_circle_average(out.T_phase_pi);
    out.value_phase0 = a.first;
    out.value_phase_pi = b.first;
    out.quadrature_change = std::max(a.second, b.second);
    return out;
}

// ---------------------------------------------------------------------------
// Text emitters

inline void write_trajectory_csv(std::ostream& os, const TrajectoryReport& rep) {
    os << 't';
    for (const auto& s : rep.observables) os << ',' << s.name;
    os << '\n';
    os.precision(17);
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i) {
        os << rep.t_grid[i];
        for (const auto& s : rep.observables) os << ',' << s.values[i];
        os << '\n';
    }
}

// Two whitespace-separated columns, ready for gnuplot's `plot 'file'`.
inline void write_two_column(std::ostream& os, const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw invalid_input("columns differ in length");
    os.precision(17);
    for (std::size_t i = 0; i < x.size(); ++i) os << x[i] << ' ' << y[i] << '\n';
}

} // namespace ominlab
