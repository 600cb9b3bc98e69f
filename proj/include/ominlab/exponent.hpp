#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <variant>

#include "errors.hpp"

namespace ominlab {

// Exact rational number num/den with den > 0 and gcd(num, den) == 1.
// All arithmetic is overflow-checked.
class Exponent {
public:
    constexpr Exponent() noexcept = default;
    constexpr Exponent(std::int64_t n) noexcept : num_(n), den_(1) {} // NOLINT: implicit from integers
    Exponent(std::int64_t n, std::int64_t d) { assign(n, d); }

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }

    bool is_integer() const noexcept { return den_ == 1; }
    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Exponent operator+(const Exponent& a, const Exponent& b) {
        const std::int64_t g = std::gcd(a.den_, b.den_);
        const std::int64_t ad = a.den_ / g;
        const std::int64_t bd = b.den_ / g;
        return Exponent(add(mul(a.num_, bd), mul(b.num_, ad)), mul(a.den_, bd));
    }
    friend Exponent operator-(const Exponent& a) {
        if (a.num_ == INT64_MIN) throw exponent_overflow("exponent negation overflow");
        Exponent r;
        r.num_ = -a.num_;
        r.den_ = a.den_;
        return r;
    }
    friend Exponent operator-(const Exponent& a, const Exponent& b) { return a + (-b); }
    friend Exponent operator*(const Exponent& a, const Exponent& b) {
        // cross-reduce first so intermediate products stay small
        const std::int64_t g1 = std::gcd(a.num_, b.den_);
        const std::int64_t g2 = std::gcd(b.num_, a.den_);
        const std::int64_t n1 = g1 ? a.num_ / g1 : a.num_;
        const std::int64_t d2 = g1 ? b.den_ / g1 : b.den_;
        const std::int64_t n2 = g2 ? b.num_ / g2 : b.num_;
        const std::int64_t d1 = g2 ? a.den_ / g2 : a.den_;
        return Exponent(mul(n1, n2), mul(d1, d2));
    }
    friend Exponent operator/(const Exponent& a, const Exponent& b) {
        if (b.num_ == 0) throw invalid_input("division of exponent by zero");
        return a * Exponent(b.den_, b.num_);
    }
    Exponent& operator+=(const Exponent& o) { return *this = *this + o; }
    Exponent& operator-=(const Exponent& o) { return *this = *this - o; }
    Exponent& operator*=(const Exponent& o) { return *this = *this * o; }

    friend bool operator==(const Exponent& a, const Exponent& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Exponent& a, const Exponent& b) noexcept {
        const __int128 l = static_cast<__int128>(a.num_) * b.den_;
        const __int128 r = static_cast<__int128>(b.num_) * a.den_;
        if (l < r) return std::strong_ordering::less;
        if (l > r) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    // Largest integer <= value.
    std::int64_t floor() const noexcept {
        std::int64_t q = num_ / den_;
        if ((num_ % den_ != 0) && (num_ < 0)) --q;
        return q;
    }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }
    friend std::ostream& operator<<(std::ostream& os, const Exponent& e) { return os << e.str(); }

private:
    static std::int64_t add(std::int64_t a, std::int64_t b) {
        std::int64_t r;
        if (__builtin_add_overflow(a, b, &r)) throw exponent_overflow("exponent addition overflow");
        return r;
    }
    static std::int64_t mul(std::int64_t a, std::int64_t b) {
        std::int64_t r;
        if (__builtin_mul_overflow(a, b, &r)) throw exponent_overflow("exponent multiplication overflow");
        return r;
    }
    void assign(std::int64_t n, std::int64_t d) {
        if (d == 0) throw invalid_input("rational with zero denominator");
        if (n == INT64_MIN || d == INT64_MIN) throw exponent_overflow("exponent out of range");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        const std::int64_t g = std::gcd(n, d);
        num_ = n / g;
        den_ = d / g;
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

using Rational = Exponent;

inline std::int64_t lcm_checked(std::int64_t a, std::int64_t b) {
    const std::int64_t g = std::gcd(a, b);
    std::int64_t r;
    if (__builtin_mul_overflow(a / g, b, &r)) throw exponent_overflow("lcm overflow");
    return r;
}

// Either an exact exponent or -infinity (the eventually-zero function).
class DegreeValue {
public:
    DegreeValue() noexcept : value_(NegInf{}) {}
    DegreeValue(Exponent e) noexcept : value_(e) {} // NOLINT: implicit

    static DegreeValue neg_inf() noexcept { return DegreeValue(); }

    bool is_neg_inf() const noexcept { return std::holds_alternative<NegInf>(value_); }
    bool is_finite() const noexcept { return !is_neg_inf(); }
    const Exponent& value() const {
        if (is_neg_inf()) throw invalid_input("degree is -inf");
        return std::get<Exponent>(value_);
    }

    friend bool operator==(const DegreeValue& a, const DegreeValue& b) noexcept {
        if (a.is_neg_inf() || b.is_neg_inf()) return a.is_neg_inf() && b.is_neg_inf();
        return std::get<Exponent>(a.value_) == std::get<Exponent>(b.value_);
    }
    friend std::strong_ordering operator<=>(const DegreeValue& a, const DegreeValue& b) noexcept {
        if (a.is_neg_inf() && b.is_neg_inf()) return std::strong_ordering::equal;
        if (a.is_neg_inf()) return std::strong_ordering::less;
        if (b.is_neg_inf()) return std::strong_ordering::greater;
        return std::get<Exponent>(a.value_) <=> std::get<Exponent>(b.value_);
    }

    std::string str() const { return is_neg_inf() ? std::string("-inf") : value().str(); }
    friend std::ostream& operator<<(std::ostream& os, const DegreeValue& d) { return os << d.str(); }

private:
    struct NegInf {};
    std::variant<NegInf, Exponent> value_;
};

inline DegreeValue operator+(const DegreeValue& a, const DegreeValue& b) {
    if (a.is_neg_inf() || b.is_neg_inf()) return DegreeValue::neg_inf();
    return a.value() + b.value();
}

inline DegreeValue max(const DegreeValue& a, const DegreeValue& b) { return a < b ? b : a; }

} // namespace ominlab
