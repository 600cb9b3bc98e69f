#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ominlab/power_sum.hpp"

using namespace ominlab;

namespace {

PowerSum poly(std::vector<PowerSum::Term> terms) { return PowerSum(std::move(terms), DegreeValue::neg_inf()); }
PowerSum t() { return PowerSum::variable(); }
PowerSum c(double v) { return PowerSum::constant(v); }

void expect_terms(const PowerSum& f, std::vector<PowerSum::Term> want, double tol = 1e-12) {
    ASSERT_EQ(f.terms().size(), want.size()) << f.str();
    for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_EQ(f.terms()[i].first, want[i].first) << f.str();
        EXPECT_NEAR(f.terms()[i].second, want[i].second, tol) << f.str();
    }
}

// Random series with distinct exponents of denominator up to 3 in [-3, 3].
PowerSum random_series(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> count(1, 4), num(-9, 9), den(1, 3);
    std::uniform_real_distribution<double> coef(0.5, 2.0);
    std::bernoulli_distribution sign(0.5);
    std::vector<PowerSum::Term> terms;
    const int k = count(rng);
    for (int i = 0; i < k; ++i) terms.emplace_back(Exponent(num(rng), den(rng)), (sign(rng) ? -1 : 1) * coef(rng));
    PowerSum f = poly(terms);
    return f.empty() ? c(1.0) : f;
}

} // namespace

TEST(Exponent, ReducedAndOrdered) {
    Exponent a(6, -4);
    EXPECT_EQ(a.num(), -3);
    EXPECT_EQ(a.den(), 2);
    EXPECT_LT(Exponent(1, 3), Exponent(1, 2));
    EXPECT_EQ(Exponent(1, 2) + Exponent(1, 3), Exponent(5, 6));
    EXPECT_EQ((Exponent(3, 2) * Exponent(2, 3)), Exponent(1));
    EXPECT_EQ(Exponent(-7, 2).floor(), -4);
}

TEST(Exponent, OverflowIsDetected) {
    Exponent big(INT64_MAX / 2 + 1);
    EXPECT_THROW(big + big, exponent_overflow);
    EXPECT_THROW(Exponent(1, INT64_MAX - 1) + Exponent(1, INT64_MAX - 2), exponent_overflow);
}

TEST(DegreeValue, NegInfOrdering) {
    EXPECT_LT(DegreeValue::neg_inf(), DegreeValue(Exponent(-1000)));
    EXPECT_EQ(DegreeValue::neg_inf().str(), "-inf");
    EXPECT_TRUE((DegreeValue::neg_inf() + Exponent(3)).is_neg_inf());
}

TEST(PsArith, DifferenceOfSquares) {
    PowerSum f = ps_arith(ArithOp::Mul, t() + c(1), t() - c(1));
    expect_terms(f, {{2, 1.0}, {0, -1.0}});
    EXPECT_TRUE(f.is_exact());
}

TEST(PsArith, ProductOfLinearFactors) { expect_terms(ps_arith(ArithOp::Mul, t(), t()), {{2, 1.0}}); }

TEST(PsArith, ExactCancellation) {
    PowerSum f = ps_arith(ArithOp::Add, poly({{2, 1.0}}), poly({{2, -1.0}, {1, 1.0}}));
    expect_terms(f, {{1, 1.0}});
    EXPECT_EQ(ps_degree(f), DegreeValue(Exponent(1)));
}

TEST(PsArith, TruncationOrders) {
    PowerSum f = PowerSum({{1, 1.0}}, Exponent(-2));
    PowerSum g = PowerSum({{2, 1.0}}, Exponent(-1));
    EXPECT_EQ((f + g).trunc(), DegreeValue(Exponent(-1)));
    // max(1 + (-1), -2 + 2) = 0
    EXPECT_EQ((f * g).trunc(), DegreeValue(Exponent(0)));
}

TEST(PsInv, Monomials) {
    expect_terms(ps_inv(t()), {{-1, 1.0}});
    expect_terms(ps_inv(poly({{2, 2.0}})), {{-2, 0.5}});
}

TEST(PsInv, GeometricSeriesOracle) {
    // 1/(1+x) = sum (-x)^k with x = 1/t
    PowerSum f = ps_inv(c(1) + poly({{-1, 1.0}}), Exponent(-4));
    std::vector<PowerSum::Term> want;
    for (int k = 0; k <= 3; ++k) want.emplace_back(-k, (k % 2 ? -1.0 : 1.0));
    expect_terms(f, want);
    EXPECT_EQ(f.trunc(), DegreeValue(Exponent(-4)));
}

TEST(PsInv, ZeroAndTooDeep) {
    EXPECT_THROW(ps_inv(PowerSum(), Exponent(-3)), invalid_input);
    PowerSum f = PowerSum({{0, 1.0}, {-1, 1.0}}, Exponent(-3));
    EXPECT_NO_THROW(ps_inv(f, Exponent(-3)));
    EXPECT_THROW(ps_inv(f, Exponent(-5)), truncation_error);
}

TEST(PsInv, RoundTripOnRandomSeries) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        PowerSum f = random_series(rng);
        const Exponent d = f.degree().value();
        const Exponent order = -d - Exponent(6);
        PowerSum prod = f * ps_inv(f, order);
        // every term above the certified order is the constant 1
        for (const auto& [e, cf] : prod.terms()) {
            const double want = e == Exponent(0) ? 1.0 : 0.0;
            EXPECT_NEAR(cf, want, 1e-9 * std::max(1.0, f.max_abs_coefficient())) << f.str();
        }
        EXPECT_LE(prod.trunc(), DegreeValue(Exponent(-6)));
    }
}

TEST(PsPow, Monomials) {
    expect_terms(ps_pow(poly({{2, 1.0}}), Rational(1, 2)), {{1, 1.0}});
    expect_terms(ps_pow(poly({{1, 4.0}}), Rational(1, 2)), {{Exponent(1, 2), 2.0}});
}

TEST(PsPow, BinomialOracle) {
    const double s = 0.7;
    PowerSum f = ps_pow(c(1) + poly({{-3, 3 * s}}), Rational(1, 3), Exponent(-7));
    // (1+x)^{1/3} = 1 + x/3 - x^2/9 with x = 3 s t^-3
    expect_terms(f, {{0, 1.0}, {-3, s}, {-6, -s * s}}, 1e-12);
}

TEST(PsPow, FractionalPowerNeedsPositiveLead) {
    EXPECT_THROW(ps_pow(poly({{1, -1.0}}), Rational(1, 2)), invalid_input);
    EXPECT_NO_THROW(ps_pow(poly({{1, -1.0}}), Rational(2)));
}

TEST(PsPow, RoundTrip) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 40; ++i) {
        PowerSum f = random_series(rng);
        if (f.leading_coefficient() < 0) f = -f;
        for (Rational q : {Rational(1, 2), Rational(3), Rational(-2, 3)}) {
            const Exponent d = f.degree().value();
            PowerSum g = ps_pow(f, q, q * d - Exponent(12));
            PowerSum back = ps_pow(g, Rational(1) / q, d - Exponent(12));
            for (const auto& [e, cf] : f.terms()) {
                if (DegreeValue(e) <= back.trunc()) continue;
                EXPECT_NEAR(back.coefficient(e), cf, 1e-10 * f.max_abs_coefficient()) << f.str() << " q=" << q;
            }
        }
    }
}

TEST(PsDerivative, Examples) {
    expect_terms(ps_derivative(poly({{Exponent(3, 2), 1.0}})), {{Exponent(1, 2), 1.5}});
    EXPECT_TRUE(ps_derivative(c(7)).is_zero());
    expect_terms(ps_derivative(poly({{2, 1.0}, {-1, 1.0}})), {{1, 2.0}, {-2, -1.0}});
}

TEST(PsDegree, Examples) {
    EXPECT_EQ(ps_degree(poly({{Exponent(3, 2), 1.0}, {1, 5.0}})), DegreeValue(Exponent(3, 2)));
    EXPECT_TRUE(ps_degree(PowerSum()).is_neg_inf());
    EXPECT_EQ(ps_degree(poly({{2, 1.0}, {2, -1.0}, {1, 1.0}})), DegreeValue(Exponent(1)));
}

TEST(PsDegree, ProductAndSumLaws) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
        PowerSum f = random_series(rng), g = random_series(rng);
        EXPECT_EQ(ps_degree(f * g), ps_degree(f) + ps_degree(g));
        EXPECT_LE(ps_degree(f + g), max(ps_degree(f), ps_degree(g)));
        if (ps_degree(f) != ps_degree(g)) {
            EXPECT_EQ(ps_degree(f + g), max(ps_degree(f), ps_degree(g)));
        }
        if (f.degree().value() != Exponent(0)) {
            EXPECT_EQ(ps_degree(ps_derivative(f)), DegreeValue(f.degree().value() - Exponent(1)));
        }
    }
}

TEST(PsComposeSpeed, Examples) {
    expect_terms(ps_compose_speed(t(), Rational(0), 2.5, Exponent(-5)), {{1, 1.0}, {0, 2.5}});
    expect_terms(ps_compose_speed(t(), Rational(1), 3.0, Exponent(-5)), {{1, 3.0}});
    EXPECT_THROW(ps_compose_speed(t(), Rational(2), 1.0, Exponent(-5)), invalid_input);
}

TEST(PsComposeSpeed, BinomialOracleOnCubeRoot) {
    // h_{-2,s}(t) = (t^3 + 3s)^{1/3};  h^2 = t^2 (1 + 3s t^-3)^{2/3} = t^2 + 2s t^-1 - s^2 t^-4 + ...
    const double s = 1.3;
    PowerSum f = ps_compose_speed(poly({{2, 1.0}}), Rational(-2), s, Exponent(-4));
    expect_terms(f, {{2, 1.0}, {-1, 2 * s}});
    EXPECT_EQ(f.trunc(), DegreeValue(Exponent(-4)));
    PowerSum deeper = ps_compose_speed(poly({{2, 1.0}}), Rational(-2), s, Exponent(-5));
    expect_terms(deeper, {{2, 1.0}, {-1, 2 * s}, {-4, -s * s}});
    const double tt = 5.0;
    EXPECT_NEAR(ps_eval(deeper, tt), std::pow(tt * tt * tt + 3 * s, 2.0 / 3.0), 1e-3);
}

TEST(PsLimit, Examples) {
    EXPECT_DOUBLE_EQ(ps_limit(c(1) + poly({{-1, 1.0}})).as_double(), 1.0);
    EXPECT_EQ(ps_limit(poly({{Exponent(1, 2), 1.0}})).kind, LimitValue::Kind::PosInf);
    EXPECT_EQ(ps_limit(poly({{-2, -3.0}})).kind, LimitValue::Kind::Zero);
    EXPECT_THROW(ps_limit(PowerSum::unknown_below(Exponent(0))), truncation_error);
}

TEST(PsEval, Examples) {
    EXPECT_DOUBLE_EQ(ps_eval(poly({{2, 1.0}, {0, -1.0}}), 3.0), 8.0);
    EXPECT_DOUBLE_EQ(ps_eval(poly({{Exponent(3, 2), 1.0}}), 4.0), 8.0);
    EXPECT_NEAR(ps_eval(poly({{0, 1.0}, {-1, -1.0}, {-2, 1.0}}), 10.0), 0.91, 1e-15);
    EXPECT_THROW(ps_eval(t(), 0.0), invalid_input);
}

TEST(PsEval, ProductWithinBounds) {
    PowerSum f = ps_inv(c(1) + poly({{-1, 1.0}}), Exponent(-6));
    PowerSum g = ps_pow(c(2) + poly({{-1, 1.0}}), Rational(1, 2), Exponent(-6));
    for (double x : {10.0, 100.0, 1000.0}) {
        EvalResult a = ps_eval_bounded(f, x), b = ps_eval_bounded(g, x), ab = ps_eval_bounded(f * g, x);
        const double budget = ab.error_bound + std::abs(a.value) * b.error_bound + std::abs(b.value) * a.error_bound;
        EXPECT_LE(std::abs(ab.value - a.value * b.value), budget + 1e-15);
        EXPECT_NEAR(a.value, 1.0 / (1.0 + 1.0 / x), a.error_bound + 1e-15);
    }
}
