#pragma once

// JSON payloads shared by the command-line tool and the acceptance runner.
// Payloads never contain timestamps or thread counts, so equal inputs and seeds
// serialize to identical bytes.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "curves.hpp"
#include "dynamics.hpp"
#include "goodness.hpp"
#include "parser.hpp"
#include "psgroup.hpp"

namespace ominlab::report {

using nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1";

inline ordered_json rational(const Rational& r) { return {{"num", r.num()}, {"den", r.den()}}; }

inline ordered_json degree(const DegreeValue& d) {
    if (d.is_neg_inf()) return "-inf";
    return rational(d.value());
}

inline ordered_json matrix(const Eigen::MatrixXd& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline ordered_json series(const PowerSum& f) {
    ordered_json terms = ordered_json::array();
    for (const auto& [e, c] : f.terms()) terms.push_back({{"exponent", rational(e)}, {"coefficient", c}});
    return {{"text", f.str()}, {"terms", terms}, {"truncation", degree(f.trunc())}};
}

inline ordered_json curve_matrix(const MatrixCurve& m) {
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < m.n(); ++i) {
        ordered_json row = ordered_json::array();
        for (std::size_t j = 0; j < m.n(); ++j) row.push_back(m(i, j).str());
        rows.push_back(row);
    }
    return rows;
}

inline ordered_json envelope(const std::string& command) {
    return {{"schema_version", kSchemaVersion}, {"command", command}};
}

inline ordered_json curve_header(const CurveSpec& spec) {
    ordered_json entries = ordered_json::array();
    for (const auto& row : spec.entries) {
        ordered_json r = ordered_json::array();
        for (const auto& e : row) r.push_back(to_string(e));
        entries.push_back(r);
    }
    return {{"name", spec.name}, {"n", spec.n}, {"start", spec.t_start}, {"entries", entries}};
}

// ---------------------------------------------------------------------------
// analyze

struct Outcome {
    ordered_json payload;
    bool certification_failed = false; // a section hit truncation or an indeterminate verdict
};

inline Outcome analyze(const CurveSpec& spec, std::uint64_t seed) {
    Outcome out;
    ordered_json& j = out.payload;
    j = envelope("analyze");
    j["curve"] = curve_header(spec);
    const MatrixCurve phi = lower_curve(spec);
    j["curve"]["unimodular"] = phi.unimodular();

    ordered_json deg = ordered_json::array();
    for (const auto& row : degree_matrix(phi)) {
        ordered_json r = ordered_json::array();
        for (const auto& d : row) r.push_back(degree(d));
        deg.push_back(r);
    }
    j["degree_matrix"] = deg;

    const auto section = [&](const char* name, auto&& body) {
        try {
            j[name] = body();
        } catch (const truncation_error& e) {
            j[name] = {{"status", "truncation"}, {"message", e.what()}};
            out.certification_failed = true;
        } catch (const consistency_error& e) {
            j[name] = {{"status", "inconsistent"}, {"message", e.what()}};
            out.certification_failed = true;
        } catch (const numerical_error& e) {
            j[name] = {{"status", "numerical"}, {"message", e.what()}};
            out.certification_failed = true;
        }
    };

    section("wedge_scan", [&]() -> ordered_json {
        if (!phi.unimodular()) return {{"status", "skipped"}, {"message", "determinant is not one"}};
        ordered_json entries = ordered_json::array();
        for (const auto& e : standard_wedge_scan(phi)) {
            if (e.verdict == WedgeVerdict::Indeterminate) out.certification_failed = true;
            entries.push_back({{"k", e.k}, {"subset", subset_str(e.subset)}, {"verdict", to_string(e.verdict)},
                               {"degree", degree(e.degree)}});
        }
        return {{"status", "ok"}, {"entries", entries}};
    });

    section("example_family", [&]() -> ordered_json {
        const auto fam = extract_example_family(phi);
        if (!fam) return {{"status", "not_applicable"}};
        const ExampleConditionsReport rep = check_example_conditions(*fam);
        ordered_json r = {{"status", "ok"},
                          {"pass", rep.pass},
                          {"violated", rep.violated},
                          {"numeric_fallback", rep.numeric_fallback}};
        r["certificate"] = rep.certificate.empty() ? ordered_json(nullptr) : ordered_json(rep.certificate);
        return r;
    });

    section("non_contraction", [&]() -> ordered_json {
        if (!phi.unimodular()) return {{"status", "skipped"}, {"message", "determinant is not one"}};
        const NonContractionReport rep = non_contraction_verdict(phi, seed);
        return {{"status", "ok"},
                {"verdict", to_string(rep.verdict)},
                {"witness", rep.witness},
                {"random_checked", rep.random_checked},
                {"seed", rep.seed}};
    });

    section("ps", [&]() -> ordered_json {
        if (is_bounded(phi)) return {{"status", "bounded"}, {"message", "the curve is bounded; its P.S. group is trivial"}};
        const PSResult ps = ps_order(phi);
        ordered_json r = {{"status", "ok"}, {"r", rational(ps.r)}, {"M", matrix(ps.M)}, {"kind", to_string(ps.kind)}};
        r["note"] = ps.note;
        if (ps.kind == PSKind::Indeterminate) out.certification_failed = true;
        ordered_json rho = ordered_json::array();
        for (double s : {1.0, 2.0}) rho.push_back({{"s", s}, {"matrix", matrix(ps_one_param(phi, ps, s))}});
        r["rho"] = rho;
        return r;
    });

    section("suc", [&]() -> ordered_json {
        const SUCDecomposition suc = suc_decompose(phi);
        ordered_json r = {{"status", "ok"},
                          {"essentially_diagonal", suc.essentially_diagonal},
                          {"sigma_limit", matrix(suc.sigma_limit)},
                          {"sigma_deviation_at_100", suc.sigma_deviation_at_100},
                          {"b", curve_matrix(suc.b)},
                          {"C", matrix(suc.C)},
                          {"steps", suc.steps},
                          {"notes", suc.notes}};
        return r;
    });
    return out;
}

// ---------------------------------------------------------------------------
// good

struct GoodInputs {
    std::vector<std::string> members; // source text
    std::vector<PowerSum> family;
    Interval interval;
    std::vector<double> eps;
    double delta = 0.5;
};

inline Outcome good(const GoodInputs& in, unsigned threads) {
    Outcome out;
    ordered_json& j = out.payload;
    j = envelope("good");
    j["interval"] = {in.interval.a, in.interval.b};
    j["eps_grid"] = in.eps;
    j["delta"] = in.delta;
    GoodnessOptions opt;
    opt.threads = threads;
    const GoodnessReport rep = estimate_alpha(in.family, in.interval, in.eps, opt);

    std::vector<double> remez(in.family.size());
    parallel_for(in.family.size(), threads,
                 [&](std::size_t m) { remez[m] = remez_ratio(in.family[m], in.interval, in.delta); });
    ordered_json members = ordered_json::array();
    for (std::size_t m = 0; m < in.family.size(); ++m) {
        const MemberFit& fit = rep.members[m];
        ordered_json samples = ordered_json::array();
        for (const auto& s : fit.samples)
            samples.push_back({{"eps", s.eps},
                               {"measure", s.measure},
                               {"relative_eps", s.rel_eps},
                               {"relative_measure", s.rel_measure}});
        members.push_back({{"id", m},
                           {"expression", in.members[m]},
                           {"sup_norm", fit.norm},
                           {"slope", fit.slope ? ordered_json(*fit.slope) : ordered_json(nullptr)},
                           {"remez_ratio", remez[m]},
                           {"samples", samples}});
    }
    j["members"] = members;
    j["alpha_hat"] = rep.alpha_hat ? ordered_json(*rep.alpha_hat) : ordered_json(nullptr);
    j["C_hat"] = rep.C_hat ? ordered_json(*rep.C_hat) : ordered_json(nullptr);
    j["degenerate_reason"] = rep.degenerate_reason;
    j["samples"] = rep.samples;
    j["right_max_checked"] = rep.right_max_checked;
    ordered_json viol = ordered_json::array();
    for (const auto& v : rep.violations)
        viol.push_back({{"member", v.member},
                        {"interval", {v.interval.a, v.interval.b}},
                        {"eps", v.eps},
                        {"measure", v.measure},
                        {"bound", v.bound},
                        {"right_max", v.right_max}});
    j["violations"] = viol;

    // T0: smallest point of a doubling grid from the interval start past which the fit holds
    ordered_json t0 = nullptr;
    if (rep.alpha_hat && rep.C_hat) {
        std::vector<double> grid;
        for (double T = in.interval.a; T <= in.interval.b * (1 + 1e-12); T *= 2.0) grid.push_back(T);
        std::vector<double> rel_eps;
        for (const auto& s : rep.members.front().samples) rel_eps.push_back(s.eps);
        if (auto T0 = smallest_good_T0(in.family, grid, rel_eps, *rep.C_hat, *rep.alpha_hat)) t0 = *T0;
    }
    j["T0_grid_estimate"] = t0;
    return out;
}

// ---------------------------------------------------------------------------
// orbit

inline ordered_json time_average_json(const std::string& name, const TimeAverage& a) {
    return {{"observable", name},     {"T", a.T},
            {"t_min", a.t_min},       {"steps", a.steps},
            {"value", a.value},       {"richardson_error", a.richardson_error},
            {"head_bound", a.head_bound}, {"error_budget", a.error_budget()}};
}

inline ordered_json kleinbock_json(const KleinbockReport& r) {
    ordered_json entries = ordered_json::array();
    for (const auto& e : r.entries)
        entries.push_back({{"eps", e.eps},
                           {"measure", e.measure},
                           {"bound", e.bound},
                           {"asserted", e.asserted},
                           {"holds", e.holds}});
    return {{"rho", r.rho},
            {"C", r.C},
            {"alpha", r.alpha},
            {"fitted", r.fitted},
            {"fit_violations", r.fit_violations},
            {"wedges_checked", r.wedges_checked},
            {"hypothesis", r.hypothesis},
            {"hypothesis_holds", r.hypothesis_holds},
            {"points", r.points},
            {"min_systole", r.min_systole},
            {"violations", r.violations()},
            {"entries", entries}};
}

inline ordered_json trajectory_json(const TrajectoryReport& rep) {
    ordered_json obs = ordered_json::array();
    for (const auto& s : rep.observables) obs.push_back({{"name", s.name}, {"values", s.values}});
    ordered_json avg = ordered_json::array();
    for (const auto& a : rep.averages) avg.push_back({{"name", a.name}, {"T", a.T}, {"value", a.value}});
    return {{"t_grid", rep.t_grid},
            {"observables", obs},
            {"averages", avg},
            {"seed", rep.seed},
            {"diverges", rep.diverges},
            {"divergence_threshold", rep.divergence_threshold}};
}

// ---------------------------------------------------------------------------
// circle

inline ordered_json circle_json(const CircleAverage& c) {
    ordered_json j = envelope("circle");
    j["k"] = c.k;
    j["T_phase0"] = c.T_phase0;
    j["T_phase_pi"] = c.T_phase_pi;
    j["value_phase0"] = c.value_phase0;
    j["value_phase_pi"] = c.value_phase_pi;
    j["gap"] = std::abs(c.value_phase0 - c.value_phase_pi);
    j["quadrature_change"] = c.quadrature_change;
    return j;
}

} // namespace ominlab::report
