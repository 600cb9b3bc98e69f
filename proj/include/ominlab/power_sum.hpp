#pragma once

// Truncated generalized power series  sum_i c_i t^{r_i}  with exact rational
// exponents and double coefficients. These model germs at +infinity of
// functions definable in a polynomially bounded structure through their
// finite asymptotic expansion.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "exponent.hpp"

namespace ominlab {

// A coefficient produced by a sum or product is treated as zero when
// |c| <= kZeroThreshold * scale, where scale is the largest magnitude among
// the contributions that were added to form it.
inline constexpr double kZeroThreshold = 1e-12;

// Depth below the leading exponent used when no truncation order is given.
inline constexpr std::int64_t kDefaultDepth = 8;

class PowerSum {
public:
    using Term = std::pair<Exponent, double>;

    // The exact zero series.
    PowerSum() = default;

    // Terms may be unsorted and may repeat exponents; trunc == -inf marks an exact series.
    PowerSum(std::vector<Term> terms, DegreeValue trunc) : trunc_(trunc) {
        std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.first > b.first; });
        std::vector<Term> merged;
        std::vector<double> scale;
        for (auto& [e, c] : terms) {
            if (!merged.empty() && merged.back().first == e) {
                merged.back().second += c;
                scale.back() = std::max(scale.back(), std::abs(c));
            } else {
                merged.emplace_back(e, c);
                scale.push_back(std::abs(c));
            }
        }
        for (std::size_t i = 0; i < merged.size(); ++i) {
            if (std::abs(merged[i].second) <= kZeroThreshold * scale[i]) merged[i].second = 0.0;
        }
        terms_ = std::move(merged);
        normalize();
    }

    static PowerSum constant(double c) { return PowerSum({{Exponent(0), c}}, DegreeValue::neg_inf()); }
    static PowerSum monomial(double c, Exponent e) { return PowerSum({{e, c}}, DegreeValue::neg_inf()); }
    static PowerSum variable() { return monomial(1.0, Exponent(1)); }
    // Zero up to the given order: every known term cancelled, terms <= order unknown.
    static PowerSum unknown_below(Exponent order) { return PowerSum({}, order); }

    const std::vector<Term>& terms() const noexcept { return terms_; }
    const DegreeValue& trunc() const noexcept { return trunc_; }
    bool is_exact() const noexcept { return trunc_.is_neg_inf(); }
    bool empty() const noexcept { return terms_.empty(); }
    // Certified zero: no surviving terms and nothing unknown.
    bool is_zero() const noexcept { return terms_.empty() && is_exact(); }

    DegreeValue degree() const noexcept {
        if (terms_.empty()) return DegreeValue::neg_inf();
        return terms_.front().first;
    }
    // max(degree, trunc): an upper bound for the true degree.
    DegreeValue degree_bound() const noexcept { return max(degree(), trunc_); }

    double leading_coefficient() const noexcept { return terms_.empty() ? 0.0 : terms_.front().second; }

    double coefficient(const Exponent& e) const noexcept {
        for (const auto& [x, c] : terms_)
            if (x == e) return c;
        return 0.0;
    }

    double max_abs_coefficient() const noexcept {
        double m = 0.0;
        for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
        return m;
    }

    // Drop every term at or below `order` and mark it unknown.
    PowerSum truncated(const DegreeValue& order) const {
        if (order <= trunc_) return *this;
        PowerSum r = *this;
        r.trunc_ = order;
        r.normalize();
        return r;
    }

    std::string str() const {
        std::ostringstream os;
        os.precision(12);
        bool first = true;
        for (const auto& [e, c] : terms_) {
            const double mag = std::abs(c);
            if (!first) os << (c < 0 ? " - " : " + ");
            else if (c < 0) os << "-";
            if (e == Exponent(0)) {
                os << mag;
            } else {
                if (mag != 1.0) os << mag << "*";
                os << "t";
                if (e != Exponent(1)) os << "^" << (e.is_integer() && e.num() >= 0 ? e.str() : "(" + e.str() + ")");
            }
            first = false;
        }
        if (first) os << "0";
        if (!is_exact()) os << " + O(t^" << trunc_.str() << ")";
        return os.str();
    }

private:
    void normalize() {
        std::erase_if(terms_, [&](const Term& t) { return t.second == 0.0 || DegreeValue(t.first) <= trunc_; });
    }

    std::vector<Term> terms_;
    DegreeValue trunc_ = DegreeValue::neg_inf();
};

// ---------------------------------------------------------------------------
// Ring operations

inline PowerSum operator+(const PowerSum& f, const PowerSum& g) {
    std::vector<PowerSum::Term> out;
    std::vector<double> scale;
    const auto& a = f.terms();
    const auto& b = g.terms();
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first > b[j].first)) {
            out.push_back(a[i++]);
        } else if (i == a.size() || b[j].first > a[i].first) {
            out.push_back(b[j++]);
        } else {
            const double s = a[i].second + b[j].second;
            const double sc = std::max(std::abs(a[i].second), std::abs(b[j].second));
            if (std::abs(s) > kZeroThreshold * sc) out.emplace_back(a[i].first, s);
            ++i;
            ++j;
        }
    }
    return PowerSum(std::move(out), max(f.trunc(), g.trunc()));
}

inline PowerSum operator*(double c, const PowerSum& f) {
    if (c == 0.0) return PowerSum({}, f.trunc());
    std::vector<PowerSum::Term> out = f.terms();
    for (auto& t : out) t.second *= c;
    return PowerSum(std::move(out), f.trunc());
}

inline PowerSum operator-(const PowerSum& f) { return -1.0 * f; }
inline PowerSum operator-(const PowerSum& f, const PowerSum& g) { return f + (-g); }

inline PowerSum operator*(const PowerSum& f, const PowerSum& g) {
    DegreeValue trunc = max(f.degree_bound() + g.trunc(), f.trunc() + g.degree_bound());
    std::map<Exponent, std::pair<double, double>, std::greater<>> acc;
    for (const auto& [ea, ca] : f.terms()) {
        for (const auto& [eb, cb] : g.terms()) {
            const Exponent e = ea + eb;
            if (DegreeValue(e) <= trunc) continue;
            auto& slot = acc[e];
            slot.first += ca * cb;
            slot.second += std::abs(ca * cb);
        }
    }
    std::vector<PowerSum::Term> out;
    out.reserve(acc.size());
    for (const auto& [e, s] : acc)
        if (std::abs(s.first) > kZeroThreshold * s.second) out.emplace_back(e, s.first);
    return PowerSum(std::move(out), trunc);
}

// Multiply by t^k.
inline PowerSum shift(const PowerSum& f, const Exponent& k) {
    std::vector<PowerSum::Term> out = f.terms();
    for (auto& t : out) t.first += k;
    DegreeValue tr = f.trunc().is_neg_inf() ? DegreeValue::neg_inf() : DegreeValue(f.trunc().value() + k);
    return PowerSum(std::move(out), tr);
}

enum class ArithOp { Add, Sub, Mul };

inline PowerSum ps_arith(ArithOp op, const PowerSum& f, const PowerSum& g) {
    switch (op) {
    case ArithOp::Add: return f + g;
    case ArithOp::Sub: return f - g;
    case ArithOp::Mul: return f * g;
    }
    return {};
}

inline DegreeValue ps_degree(const PowerSum& f) { return f.degree(); }

// ---------------------------------------------------------------------------
// Inverse and powers

namespace detail {

// f = c t^d (1 + g) with deg g < 0.  Returns g.
inline PowerSum normalized_tail(const PowerSum& f) {
    const double c = f.leading_coefficient();
    const Exponent d = f.degree().value();
    PowerSum tail = shift((1.0 / c) * f, -d);
    return tail - PowerSum::constant(1.0);
}

// sum_k coef(k) g^k truncated strictly above `order` (g has negative degree).
template <typename CoefFn>
PowerSum binomial_sum(const PowerSum& g, const DegreeValue& order, CoefFn coef) {
    PowerSum acc = PowerSum::constant(coef(0)).truncated(order);
    if (g.empty() && g.is_exact()) return acc;
    PowerSum power = PowerSum::constant(1.0);
    for (std::int64_t k = 1;; ++k) {
        power = (power * g).truncated(order);
        if (power.empty()) break;
        const double ck = coef(k);
        if (ck == 0.0) break; // nonnegative integer exponent: series terminates
        acc = acc + (ck * power).truncated(order);
        if (k > 100000) throw truncation_error("binomial expansion did not terminate");
    }
    return acc.truncated(order);
}

inline double binomial_coefficient(double q, std::int64_t k) {
    double r = 1.0;
    for (std::int64_t j = 0; j < k; ++j) r *= (q - static_cast<double>(j)) / static_cast<double>(j + 1);
    return r;
}

} // namespace detail

// Deepest order to which 1/f can be certified.
inline DegreeValue achievable_inverse_order(const PowerSum& f) {
    if (f.is_exact()) return DegreeValue::neg_inf();
    const Exponent d = f.degree().value();
    return f.trunc().value() - d - d;
}

// 1/f, certified for all exponents above `order`.
inline PowerSum ps_inv(const PowerSum& f, const Exponent& order) {
    if (f.empty()) throw invalid_input("inverse of the zero series");
    const DegreeValue achievable = achievable_inverse_order(f);
    if (DegreeValue(order) < achievable)
        throw truncation_error("inverse requested to order " + order.str() + " but input only certifies order " +
                               achievable.str());
    const double c = f.leading_coefficient();
    const Exponent d = f.degree().value();
    const PowerSum g = detail::normalized_tail(f);
    if (g.is_zero()) return PowerSum::monomial(1.0 / c, -d);
    // (1+g)^{-1} = sum (-g)^k, certified above order + d
    const DegreeValue inner_order = DegreeValue(order + d);
    PowerSum series = detail::binomial_sum(-1.0 * g, inner_order, [](std::int64_t) { return 1.0; });
    PowerSum r = shift((1.0 / c) * series, -d);
    return r.truncated(max(DegreeValue(order), achievable));
}

inline PowerSum ps_inv(const PowerSum& f) {
    if (f.empty()) throw invalid_input("inverse of the zero series");
    const Exponent order = -f.degree().value() - Exponent(kDefaultDepth);
    const DegreeValue a = achievable_inverse_order(f);
    return ps_inv(f, a.is_finite() && a.value() > order ? a.value() : order);
}

// 1/f to `order`, or to the deepest certified order when `order` is too deep.
inline PowerSum ps_inv_clamped(const PowerSum& f, const Exponent& order) {
    const DegreeValue a = achievable_inverse_order(f);
    return ps_inv(f, a.is_finite() && a.value() > order ? a.value() : order);
}

// f^q certified above `order`. Integer q >= 0 on an exact series stays exact.
inline PowerSum ps_pow(const PowerSum& f, const Rational& q, const Exponent& order) {
    if (q == Rational(0)) return PowerSum::constant(1.0);
    if (f.empty()) {
        if (q > Rational(0) && f.is_exact()) return PowerSum();
        throw invalid_input("power of the zero series");
    }
    if (q.is_integer() && q.num() > 0) {
        PowerSum base = f, acc = PowerSum::constant(1.0);
        std::int64_t k = q.num();
        const bool exact = f.is_exact();
        while (k > 0) {
            if (k & 1) acc = exact ? acc * base : (acc * base).truncated(order);
            k >>= 1;
            if (k) base = exact ? base * base : (base * base).truncated(order);
        }
        return exact ? acc : acc.truncated(order);
    }
    const double c = f.leading_coefficient();
    if (!q.is_integer() && c <= 0.0)
        throw invalid_input("fractional power " + q.str() + " of a series with non-positive leading coefficient");
    const Exponent d = f.degree().value();
    const PowerSum g = detail::normalized_tail(f);
    const double cq = q.is_integer() ? std::pow(c, static_cast<double>(q.num())) : std::pow(c, q.to_double());
    const Exponent lead = q * d;
    if (g.is_zero()) return PowerSum::monomial(cq, lead);
    DegreeValue achievable = DegreeValue::neg_inf();
    if (!f.is_exact()) achievable = lead + (f.trunc().value() - d);
    const DegreeValue target = max(DegreeValue(order), achievable);
    const DegreeValue inner = target.is_neg_inf() ? target : DegreeValue(target.value() - lead);
    const double qd = q.to_double();
    PowerSum series =
        detail::binomial_sum(g, inner, [qd](std::int64_t k) { return detail::binomial_coefficient(qd, k); });
    return shift(cq * series, lead).truncated(target);
}

inline PowerSum ps_pow(const PowerSum& f, const Rational& q) {
    if (f.empty()) return ps_pow(f, q, Exponent(0));
    return ps_pow(f, q, q * f.degree().value() - Exponent(kDefaultDepth));
}

// ---------------------------------------------------------------------------
// Calculus

inline PowerSum ps_derivative(const PowerSum& f) {
    std::vector<PowerSum::Term> out;
    for (const auto& [e, c] : f.terms()) {
        if (e == Exponent(0)) continue;
        out.emplace_back(e - Exponent(1), c * e.to_double());
    }
    DegreeValue tr = f.is_exact() ? DegreeValue::neg_inf() : DegreeValue(f.trunc().value() - Exponent(1));
    return PowerSum(std::move(out), tr);
}

// f(h_{r,s}(t)) where h_{r,s}(t) = (t^{1-r} + (1-r)s)^{1/(1-r)} for r < 1 and h_{1,s}(t) = s t.
inline PowerSum ps_compose_speed(const PowerSum& f, const Rational& r, double s, const Exponent& order) {
    if (r > Rational(1)) throw invalid_input("change of speed requires r <= 1, got " + r.str());
    if (r == Rational(1)) {
        if (!(s > 0.0)) throw invalid_input("h_{1,s}(t) = s t requires s > 0");
        std::vector<PowerSum::Term> out = f.terms();
        for (auto& [e, c] : out) c *= std::pow(s, e.to_double());
        return PowerSum(std::move(out), f.trunc());
    }
    if (s == 0.0) return f;
    const Rational one_minus_r = Rational(1) - r;
    const double a = one_minus_r.to_double() * s;
    const DegreeValue target = max(DegreeValue(order), f.trunc());
    const bool exact_target = target.is_neg_inf();
    // t^rho (1 + a t^{r-1})^{rho/(1-r)}
    PowerSum x = PowerSum::monomial(a, r - Rational(1));
    PowerSum acc = PowerSum({}, target);
    for (const auto& [rho, c] : f.terms()) {
        const Rational q = rho / one_minus_r;
        const bool finite = q.is_integer() && q.num() >= 0;
        if (exact_target && !finite)
            throw invalid_input("non-terminating speed change of an exact series needs a finite order");
        const DegreeValue inner = exact_target ? target : DegreeValue(target.value() - rho);
        const double qd = q.to_double();
        PowerSum series =
            detail::binomial_sum(x, inner, [qd](std::int64_t k) { return detail::binomial_coefficient(qd, k); });
        acc = acc + shift(c * series, rho);
    }
    return acc.truncated(target);
}

// Smallest t at which h_{r,s}(t) is defined (t^{1-r} + (1-r)s > 0).
inline double speed_change_domain_start(const Rational& r, double s) {
    if (r >= Rational(1) || s >= 0.0) return 0.0;
    const double om = (Rational(1) - r).to_double();
    return std::pow(-om * s, 1.0 / om);
}

// ---------------------------------------------------------------------------
// Limits and evaluation

struct LimitValue {
    enum class Kind { Finite, PosInf, NegInf, Zero };
    Kind kind = Kind::Zero;
    double value = 0.0;

    double as_double() const {
        switch (kind) {
        case Kind::Finite: return value;
        case Kind::Zero: return 0.0;
        case Kind::PosInf: return HUGE_VAL;
        case Kind::NegInf: return -HUGE_VAL;
        }
        return 0.0;
    }
    bool is_finite() const noexcept { return kind == Kind::Finite || kind == Kind::Zero; }
};

// Limit as t -> infinity. Throws truncation_error when the answer depends on unknown terms.
inline LimitValue ps_limit(const PowerSum& f) {
    const DegreeValue deg = f.degree();
    if (deg.is_finite() && deg.value() > Exponent(0)) {
        return {f.leading_coefficient() > 0 ? LimitValue::Kind::PosInf : LimitValue::Kind::NegInf, 0.0};
    }
    if (f.trunc().is_finite() && f.trunc().value() >= Exponent(0))
        throw truncation_error("limit not certified: truncation order " + f.trunc().str() + " >= 0");
    if (deg.is_finite() && deg.value() == Exponent(0)) return {LimitValue::Kind::Finite, f.leading_coefficient()};
    return {LimitValue::Kind::Zero, 0.0};
}

struct EvalResult {
    double value = 0.0;
    double error_bound = 0.0; // heuristic size of the unknown tail
};

inline EvalResult ps_eval_bounded(const PowerSum& f, double t) {
    if (!(t > 0.0)) throw invalid_input("power sums are evaluated at t > 0 only");
    EvalResult r;
    for (const auto& [e, c] : f.terms()) {
        r.value += c * (e.is_integer() ? std::pow(t, static_cast<double>(e.num())) : std::pow(t, e.to_double()));
    }
    if (!f.is_exact()) {
        // guard constant: 8 * max(1, largest coefficient)
        const double guard = 8.0 * std::max(1.0, f.max_abs_coefficient());
        r.error_bound = guard * std::pow(t, f.trunc().value().to_double());
    }
    return r;
}

inline double ps_eval(const PowerSum& f, double t) { return ps_eval_bounded(f, t).value; }

} // namespace ominlab
