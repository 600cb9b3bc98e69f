#pragma once

// Sup-norms, sublevel-set measures and Remez ratios of exact power sums on
// intervals of (0, inf), plus empirical (C, alpha)-goodness fits.
//
// Every computation substitutes u = t^(1/L), L the lcm of the exponent
// denominators, which turns the power sum into a Laurent polynomial in u whose
// real roots are isolated exactly (up to bisection tolerance).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"
#include "power_sum.hpp"

namespace ominlab {

struct Interval {
    double a = 0.0;
    double b = 0.0;

    Interval() = default;
    Interval(double lo, double hi) : a(lo), b(hi) {
        if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi))
            throw invalid_input("interval must satisfy 0 < a < b < inf");
    }
    double length() const { return b - a; }
};

inline constexpr std::size_t kDefaultDegreeCap = 64;
inline constexpr double kRootTolerance = 1e-12;

namespace detail {

// sum_k c[k] u^(low + k)
struct LaurentPoly {
    std::int64_t L = 1;
    std::int64_t low = 0;
    std::vector<double> c;

    double operator()(double u) const {
        double acc = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) acc = acc * u + c[k];
        return low == 0 ? acc : acc * std::pow(u, static_cast<double>(low));
    }

    LaurentPoly derivative() const {
        LaurentPoly d;
        d.L = L;
        d.low = low - 1;
        d.c.resize(c.size());
        for (std::size_t k = 0; k < c.size(); ++k) d.c[k] = c[k] * static_cast<double>(low + static_cast<std::int64_t>(k));
        return d;
    }

    // Ascending coefficients of u^s (P(u) - shift_by) with s >= 0 chosen minimal
    // so that the result is a polynomial; it has the same positive roots.
    std::vector<double> cleared(double shift_by) const {
        const std::int64_t m = std::min<std::int64_t>(low, 0);
        const std::size_t size = std::max(static_cast<std::size_t>(low - m) + c.size(), static_cast<std::size_t>(1 - m));
        std::vector<double> q(size, 0.0);
        for (std::size_t k = 0; k < c.size(); ++k) q[static_cast<std::size_t>(low - m) + k] += c[k];
        q[static_cast<std::size_t>(-m)] -= shift_by;
        while (q.size() > 1 && q.back() == 0.0) q.pop_back();
        return q;
    }
};

inline LaurentPoly to_laurent(const PowerSum& f, std::size_t degree_cap) {
    if (!f.is_exact()) throw invalid_input("goodness computations need an exact power sum, got " + f.str());
    LaurentPoly p;
    if (f.empty()) {
        p.c = {0.0};
        return p;
    }
    for (const auto& [e, c] : f.terms()) p.L = lcm_checked(p.L, e.den());
    const auto scaled = [&](const Exponent& e) { return e.num() * (p.L / e.den()); };
    const std::int64_t hi = scaled(f.terms().front().first);
    p.low = scaled(f.terms().back().first);
    const std::int64_t span = hi - p.low;
    // degree after clearing negative powers of u
    const std::int64_t degree = std::max({span, hi, -p.low});
    if (degree > static_cast<std::int64_t>(degree_cap))
        throw invalid_input("power sum " + f.str() + " becomes a polynomial of degree " + std::to_string(degree) +
                            " in t^(1/" + std::to_string(p.L) + "), above the cap " + std::to_string(degree_cap));
    p.c.assign(static_cast<std::size_t>(span) + 1, 0.0);
    for (const auto& [e, c] : f.terms()) p.c[static_cast<std::size_t>(scaled(e) - p.low)] = c;
    return p;
}

inline double horner(const std::vector<double>& q, double x) {
    double acc = 0.0;
    for (std::size_t k = q.size(); k-- > 0;) acc = acc * x + q[k];
    return acc;
}

inline std::vector<double> poly_derivative(const std::vector<double>& q) {
    if (q.size() <= 1) return {0.0};
    std::vector<double> d(q.size() - 1);
    for (std::size_t k = 1; k < q.size(); ++k) d[k - 1] = q[k] * static_cast<double>(k);
    return d;
}

inline double bisect_root(const std::vector<double>& q, double lo, double hi, double flo) {
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi || hi - lo <= kRootTolerance * std::max(1.0, std::abs(mid))) return mid;
        const double fm = horner(q, mid);
        if (!std::isfinite(fm))
            throw numerical_error("polynomial evaluation overflowed at u = " + std::to_string(mid));
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    throw numerical_error("bisection did not reach width " + std::to_string(kRootTolerance) + " (residual width " +
                          std::to_string(hi - lo) + ")");
}

// Real roots of q in [lo, hi], ascending. Roots of q' split the interval into
// pieces on which q is monotone; each sign change there brackets one root.
inline std::vector<double> real_roots(std::vector<double> q, double lo, double hi) {
    while (q.size() > 1 && q.back() == 0.0) q.pop_back();
    std::vector<double> out;
    if (q.size() <= 1) return out;
    if (q.size() == 2) {
        const double r = -q[0] / q[1];
        if (r >= lo && r <= hi) out.push_back(r);
        return out;
    }
    std::vector<double> cuts{lo};
    for (double r : real_roots(poly_derivative(q), lo, hi))
        if (r > cuts.back()) cuts.push_back(r);
    if (hi > cuts.back()) cuts.push_back(hi);
    std::vector<double> vals(cuts.size());
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        vals[i] = horner(q, cuts[i]);
        if (!std::isfinite(vals[i]))
            throw numerical_error("polynomial evaluation overflowed at u = " + std::to_string(cuts[i]));
    }
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        if (vals[i] == 0.0) out.push_back(cuts[i]);
        if (i + 1 < cuts.size() && vals[i] != 0.0 && vals[i + 1] != 0.0 && (vals[i] < 0.0) != (vals[i + 1] < 0.0))
            out.push_back(bisect_root(q, cuts[i], cuts[i + 1], vals[i]));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline double to_u(double t, std::int64_t L) { return L == 1 ? t : std::pow(t, 1.0 / static_cast<double>(L)); }
inline double to_t(double u, std::int64_t L) { return L == 1 ? u : std::pow(u, static_cast<double>(L)); }

} // namespace detail

inline double sup_norm(const PowerSum& f, const Interval& I, std::size_t degree_cap = kDefaultDegreeCap) {
    const detail::LaurentPoly p = detail::to_laurent(f, degree_cap);
    const double ua = detail::to_u(I.a, p.L), ub = detail::to_u(I.b, p.L);
    double best = std::max(std::abs(ps_eval(f, I.a)), std::abs(ps_eval(f, I.b)));
    for (double u : detail::real_roots(p.derivative().cleared(0.0), ua, ub)) best = std::max(best, std::abs(p(u)));
    return best;
}

inline double sublevel_measure(const PowerSum& f, const Interval& I, double eps,
                               std::size_t degree_cap = kDefaultDegreeCap) {
    if (!(eps > 0.0)) throw invalid_input("sublevel_measure needs eps > 0");
    const detail::LaurentPoly p = detail::to_laurent(f, degree_cap);
    const double ua = detail::to_u(I.a, p.L), ub = detail::to_u(I.b, p.L);
    std::vector<double> cuts{ua, ub};
    for (double s : {eps, -eps})
        for (double r : detail::real_roots(p.cleared(s), ua, ub)) cuts.push_back(r);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const auto t_of = [&](double u) { return u == ua ? I.a : u == ub ? I.b : detail::to_t(u, p.L); };
    double measure = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        if (std::abs(p(0.5 * (cuts[i] + cuts[i + 1]))) <= eps) measure += t_of(cuts[i + 1]) - t_of(cuts[i]);
    return std::min(measure, I.length());
}

// sup over placements of I_delta inside I of |f|_I / |f|_{I_delta}. A grid over
// the start point locates the worst placement, golden-section search refines it.
inline double remez_ratio(const PowerSum& f, const Interval& I, double delta,
                          std::size_t degree_cap = kDefaultDegreeCap) {
    if (!(delta > 0.0) || delta > 1.0) throw invalid_input("remez_ratio needs 0 < delta <= 1");
    const double whole = sup_norm(f, I, degree_cap);
    if (whole == 0.0) throw invalid_input("remez_ratio of the zero function is undefined");
    const double w = delta * I.length();
    const double last = I.b - w;
    const auto window = [&](double s) {
        s = std::clamp(s, I.a, last);
        const double hi = std::min(s + w, I.b);
        return hi > s ? sup_norm(f, Interval(s, hi), degree_cap) : std::abs(ps_eval(f, s));
    };
    if (last <= I.a) return whole / window(I.a);

    constexpr int kGrid = 256;
    const double step = (last - I.a) / kGrid;
    double best = std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 0; i <= kGrid; ++i) {
        const double v = window(I.a + step * i);
        if (v < best) {
            best = v;
            best_i = i;
        }
    }
    double lo = I.a + step * std::max(best_i - 1, 0), hi = I.a + step * std::min(best_i + 1, kGrid);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = window(x1), f2 = window(x2);
    while (hi - lo > 1e-6 * I.length()) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = window(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = window(x2);
        }
    }
    best = std::min({best, f1, f2});
    if (best <= 0.0) throw consistency_error("a nonzero power sum vanished on a whole subinterval of " + f.str());
    return whole / best;
}

inline double polynomial_remez_bound(std::size_t n, double delta) {
    const double dn = static_cast<double>(n);
    return (dn + 1.0) * std::pow(dn / delta, dn);
}

// Remez constant implied by (C, alpha)-goodness: the set {|f| <= |f|_{I_delta}}
// contains I_delta, so delta <= C (|f|_{I_delta} / |f|_I)^alpha.
inline double remez_bound_from_c_alpha(double C, double alpha, double delta) {
    return std::pow(C / delta, 1.0 / alpha);
}

struct CAlphaCheck {
    bool holds = false;
    double measure = 0.0;
    double bound = 0.0;
    double norm = 0.0;
};

inline CAlphaCheck evaluate_c_alpha(const PowerSum& f, const Interval& I, double eps, double C, double alpha,
                                    std::size_t degree_cap = kDefaultDegreeCap) {
    if (!(C > 0.0) || !(alpha > 0.0) || !(eps > 0.0)) throw invalid_input("check_c_alpha needs C, alpha, eps > 0");
    CAlphaCheck out;
    out.norm = sup_norm(f, I, degree_cap);
    out.measure = sublevel_measure(f, I, eps, degree_cap);
    out.bound = out.norm == 0.0 ? std::numeric_limits<double>::infinity()
                                : C * std::pow(eps / out.norm, alpha) * I.length();
    // root refinement may misplace each cut point by about kRootTolerance
    out.holds = out.measure <= out.bound + 16.0 * kRootTolerance * I.length();
    return out;
}

inline bool check_c_alpha(const PowerSum& f, const Interval& I, double eps, double C, double alpha) {
    return evaluate_c_alpha(f, I, eps, C, alpha).holds;
}

// ---------------------------------------------------------------------------
// Empirical (C, alpha) fits

struct GoodnessSample {
    double eps = 0.0;
    double measure = 0.0;
    double rel_eps = 0.0;     // eps / |f|_I
    double rel_measure = 0.0; // measure / |I|
};

struct MemberFit {
    double norm = 0.0;
    std::vector<GoodnessSample> samples;
    std::optional<double> slope;
};

struct GoodnessViolation {
    std::size_t member = 0;
    Interval interval;
    double eps = 0.0;
    double measure = 0.0;
    double bound = 0.0;
    bool right_max = false;
};

struct GoodnessReport {
    std::optional<double> C_hat;
    std::optional<double> alpha_hat;
    std::string degenerate_reason; // set when alpha_hat is undefined
    std::vector<GoodnessViolation> violations;
    std::size_t samples = 0;
    std::size_t right_max_checked = 0;
    std::vector<MemberFit> members;
};

struct GoodnessOptions {
    double fit_cutoff = 0.5; // only samples with eps / |f|_I at most this enter the fit
    unsigned threads = 1;
    std::size_t right_max_points = 16;
};

namespace detail {

inline std::optional<double> least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 2) return std::nullopt;
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 1e-24)) return std::nullopt;
    return sxy / sxx;
}

} // namespace detail

// alpha_hat is the smallest per-member log-log slope, so the worst member governs;
// C_hat is the least constant making every fitted sample satisfy the inequality.
inline GoodnessReport estimate_alpha(const std::vector<PowerSum>& family, const Interval& I,
                                     const std::vector<double>& eps_grid, const GoodnessOptions& opt = {}) {
    if (family.empty()) throw invalid_input("estimate_alpha needs a nonempty family");
    if (eps_grid.empty()) throw invalid_input("estimate_alpha needs a nonempty eps grid");
    for (const PowerSum& f : family)
        if (f.is_zero()) throw invalid_input("estimate_alpha needs nonzero family members");

    GoodnessReport rep;
    rep.members.resize(family.size());
    parallel_for(family.size(), opt.threads, [&](std::size_t m) {
        MemberFit& fit = rep.members[m];
        fit.norm = sup_norm(family[m], I);
        std::vector<double> lx, ly;
        for (double eps : eps_grid) {
            GoodnessSample s;
            s.eps = eps;
            s.measure = sublevel_measure(family[m], I, eps);
            s.rel_eps = eps / fit.norm;
            s.rel_measure = s.measure / I.length();
            fit.samples.push_back(s);
            if (s.rel_eps <= opt.fit_cutoff && s.rel_measure > 0.0) {
                lx.push_back(std::log(s.rel_eps));
                ly.push_back(std::log(s.rel_measure));
            }
        }
        fit.slope = detail::least_squares_slope(lx, ly);
    });

    for (const MemberFit& fit : rep.members) {
        rep.samples += fit.samples.size();
        if (fit.slope && (!rep.alpha_hat || *fit.slope < *rep.alpha_hat)) rep.alpha_hat = fit.slope;
    }
    if (!rep.alpha_hat) {
        rep.degenerate_reason = "no member has two distinct usable ratios below the fit cutoff";
        return rep;
    }
    if (!(*rep.alpha_hat > 0.0)) {
        rep.degenerate_reason = "fitted slope " + std::to_string(*rep.alpha_hat) + " is not positive";
        rep.alpha_hat.reset();
        return rep;
    }
    const double alpha = *rep.alpha_hat;
    double C = 0.0;
    for (const MemberFit& fit : rep.members)
        for (const GoodnessSample& s : fit.samples)
            if (s.rel_eps <= opt.fit_cutoff && s.rel_measure > 0.0)
                C = std::max(C, s.rel_measure / std::pow(s.rel_eps, alpha));
    if (!(C > 0.0)) {
        rep.degenerate_reason = "no sample has positive sublevel measure";
        rep.alpha_hat.reset();
        return rep;
    }
    rep.C_hat = C;

    // re-check every sample, then intervals [a, b'] whose right end realizes the max
    std::vector<std::vector<GoodnessViolation>> found(family.size());
    std::vector<std::size_t> right_max(family.size(), 0);
    parallel_for(family.size(), opt.threads, [&](std::size_t m) {
        for (const GoodnessSample& s : rep.members[m].samples) {
            CAlphaCheck chk = evaluate_c_alpha(family[m], I, s.eps, C, alpha);
            if (!chk.holds) found[m].push_back({m, I, s.eps, chk.measure, chk.bound, false});
        }
        for (std::size_t k = 1; k <= opt.right_max_points; ++k) {
            const double b = I.a + I.length() * static_cast<double>(k) / static_cast<double>(opt.right_max_points);
            const Interval J(I.a, b);
            const double norm = sup_norm(family[m], J);
            if (norm == 0.0 || std::abs(ps_eval(family[m], b)) < norm * (1.0 - 1e-12)) continue;
            ++right_max[m];
            for (double eps : eps_grid) {
                CAlphaCheck chk = evaluate_c_alpha(family[m], J, eps, C, alpha);
                if (!chk.holds) found[m].push_back({m, J, eps, chk.measure, chk.bound, true});
            }
        }
    });
    for (std::size_t m = 0; m < family.size(); ++m) {
        rep.violations.insert(rep.violations.end(), found[m].begin(), found[m].end());
        rep.right_max_checked += right_max[m];
    }
    return rep;
}

// Smallest grid point T0 such that (C, alpha) holds on [T, T*m] for every grid
// point T >= T0, every span factor m and every eps. Empty when even the last
// grid point fails.
inline std::optional<double> smallest_good_T0(const std::vector<PowerSum>& family, std::vector<double> T_grid,
                                              const std::vector<double>& eps_grid, double C, double alpha,
                                              const std::vector<double>& spans = {2.0, 10.0}) {
    std::sort(T_grid.begin(), T_grid.end());
    std::optional<double> T0;
    for (std::size_t i = T_grid.size(); i-- > 0;) {
        bool ok = true;
        for (const PowerSum& f : family) {
            for (double m : spans) {
                const Interval J(T_grid[i], T_grid[i] * m);
                for (double eps : eps_grid)
                    if (!check_c_alpha(f, J, eps, C, alpha)) ok = false;
            }
        }
        if (!ok) break;
        T0 = T_grid[i];
    }
    return T0;
}

inline void write_sublevel_csv(std::ostream& os, const GoodnessReport& rep) {
    os << "member,epsilon,measure,relative_epsilon,relative_measure\n";
    os.precision(17);
    for (std::size_t m = 0; m < rep.members.size(); ++m)
        for (const GoodnessSample& s : rep.members[m].samples)
            os << m << ',' << s.eps << ',' << s.measure << ',' << s.rel_eps << ',' << s.rel_measure << '\n';
}

} // namespace ominlab
