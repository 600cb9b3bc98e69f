#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "ominlab/goodness.hpp"
#include "ominlab/parser.hpp"

using namespace ominlab;

namespace {

PowerSum ps(const char* text) { return expr_to_series(parse_expr(text), Exponent(-64)); }

// Measure of {|f| <= eps} by counting midpoints of a uniform grid.
double grid_measure(const PowerSum& f, const Interval& I, double eps, int points) {
    const double h = I.length() / points;
    long count = 0;
    for (int i = 0; i < points; ++i)
        if (std::abs(ps_eval(f, I.a + (i + 0.5) * h)) <= eps) ++count;
    return count * h;
}

// Real roots in [lo, hi] from eigenvalues of the companion matrix.
std::vector<double> companion_roots(const std::vector<double>& q, double lo, double hi) {
    const std::size_t d = q.size() - 1;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 1; i < d; ++i) M(i, i - 1) = 1.0;
    for (std::size_t i = 0; i < d; ++i) M(i, d - 1) = -q[i] / q[d];
    Eigen::EigenSolver<Eigen::MatrixXd> es(M);
    std::vector<double> out;
    for (const auto& z : es.eigenvalues())
        if (std::abs(z.imag()) < 1e-9 && z.real() >= lo && z.real() <= hi) out.push_back(z.real());
    std::sort(out.begin(), out.end());
    return out;
}

PowerSum random_polynomial(std::mt19937_64& rng, std::size_t degree) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::vector<PowerSum::Term> terms;
    for (std::size_t k = 0; k <= degree; ++k) terms.emplace_back(Exponent(static_cast<std::int64_t>(k)), coef(rng));
    return PowerSum(terms, DegreeValue::neg_inf());
}

// Sums of up to four terms with exponents in {-2, -3/2, ..., 3}.
PowerSum random_power_sum(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> count(1, 4), half(-4, 6);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::vector<PowerSum::Term> terms;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) terms.emplace_back(Exponent(half(rng), 2), coef(rng));
    return PowerSum(terms, DegreeValue::neg_inf());
}

} // namespace

TEST(SupNorm, Examples) {
    EXPECT_NEAR(sup_norm(ps("t"), Interval(0.1, 1)), 1.0, 1e-14);
    EXPECT_NEAR(sup_norm(ps("t^2 - t"), Interval(0.1, 1)), 0.25, 1e-14);
    EXPECT_NEAR(sup_norm(ps("t^(1/2)"), Interval(1, 4)), 2.0, 1e-14);
    EXPECT_NEAR(sup_norm(ps("t + 1/t"), Interval(0.5, 3)), 3.0 + 1.0 / 3.0, 1e-14);
    EXPECT_EQ(sup_norm(PowerSum(), Interval(1, 2)), 0.0);
}

TEST(SupNorm, InteriorMinimumOfLaurentSum) {
    // t + 1/t has its minimum 2 at t = 1; -(t + 1/t) + 3 peaks there at 1
    EXPECT_NEAR(sup_norm(ps("3 - t - 1/t"), Interval(0.9, 1.1)), 1.0, 1e-12);
}

TEST(SupNorm, DegreeCap) {
    // the cap bounds the degree in u = t^(1/L), not L itself
    EXPECT_NO_THROW(sup_norm(ps("t^(1/65)"), Interval(1, 2)));
    EXPECT_NO_THROW(sup_norm(ps("t^64"), Interval(1, 2)));
    EXPECT_THROW(sup_norm(ps("t^65"), Interval(1, 2)), invalid_input);
    EXPECT_THROW(sup_norm(ps("t^(1/2) + t^33"), Interval(1, 2)), invalid_input);
}

TEST(SupNorm, RejectsTruncatedSeries) {
    EXPECT_THROW(sup_norm(PowerSum::constant(1.0).truncated(DegreeValue(Exponent(-1))), Interval(1, 2)),
                 invalid_input);
}

TEST(RootIsolation, AgreesWithCompanionMatrix) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> q(2 + trial % 7);
        std::uniform_real_distribution<double> coef(-1.0, 1.0);
        for (double& c : q) c = coef(rng);
        const std::vector<double> want = companion_roots(q, 0.01, 3.0);
        const std::vector<double> got = detail::real_roots(q, 0.01, 3.0);
        // near-double roots can split or merge between the two methods
        bool clustered = false;
        for (std::size_t i = 0; i + 1 < want.size(); ++i) clustered |= want[i + 1] - want[i] < 1e-5;
        if (clustered) continue;
        ASSERT_EQ(got.size(), want.size()) << "trial " << trial;
        for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-8);
    }
}

TEST(SublevelMeasure, Examples) {
    EXPECT_NEAR(sublevel_measure(ps("t"), Interval(0.001, 1), 0.3), 0.299, 1e-12);
    EXPECT_EQ(sublevel_measure(ps("1"), Interval(0.001, 1), 0.5), 0.0);
    EXPECT_NEAR(sublevel_measure(ps("1"), Interval(0.001, 1), 2.0), 0.999, 1e-15);
    const Interval I(0.001, 1);
    EXPECT_NEAR(sublevel_measure(ps("t^2 - t"), I, 0.09), grid_measure(ps("t^2 - t"), I, 0.09, 1000000), 1e-4);
}

TEST(SublevelMeasure, ClosedFormForPower) {
    // |t^(3/2)| <= eps on [0.01, 2] is [0.01, eps^(2/3)]
    EXPECT_NEAR(sublevel_measure(ps("t^(3/2)"), Interval(0.01, 2), 0.5), std::pow(0.5, 2.0 / 3.0) - 0.01, 1e-12);
}

TEST(SublevelMeasure, MonotoneAndScaleInvariant) {
    std::mt19937_64 rng(5);
    const Interval I(0.05, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        PowerSum f = random_power_sum(rng);
        double prev = 0.0;
        for (double eps : {0.001, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0}) {
            const double m = sublevel_measure(f, I, eps);
            EXPECT_GE(m, prev - 1e-12);
            EXPECT_LE(m, I.length());
            EXPECT_NEAR(sublevel_measure(3.5 * f, I, 3.5 * eps), m, 1e-10);
            prev = m;
        }
    }
}

TEST(SublevelMeasure, GridOracleOnRandomPowerSums) {
    std::mt19937_64 rng(2024);
    const Interval I(0.1, 4.0);
    for (int trial = 0; trial < 10; ++trial) {
        PowerSum f = random_power_sum(rng);
        const double eps = 0.25 * sup_norm(f, I);
        EXPECT_NEAR(sublevel_measure(f, I, eps), grid_measure(f, I, eps, 1000000), 1e-4 * I.length()) << f.str();
    }
}

TEST(RemezRatio, Examples) {
    const Interval I(0.001, 1);
    EXPECT_NEAR(remez_ratio(ps("2"), I, 0.3), 1.0, 1e-14);
    EXPECT_NEAR(remez_ratio(ps("t"), I, 0.5), 1.0 / 0.5005, 1e-5);
    EXPECT_LE(remez_ratio(ps("t"), I, 0.5), polynomial_remez_bound(1, 0.5));
    EXPECT_NEAR(remez_ratio(ps("t^2"), I, 0.5), 1.0 / (0.5005 * 0.5005), 1e-4);
    EXPECT_LE(remez_ratio(ps("t^2"), I, 0.5), polynomial_remez_bound(2, 0.5));
    EXPECT_DOUBLE_EQ(polynomial_remez_bound(2, 0.5), 48.0);
    EXPECT_NEAR(remez_ratio(ps("t^3 - t"), I, 1.0), 1.0, 1e-14);
}

TEST(RemezRatio, InteriorPlacement) {
    // |t - 1/2| on [0, 1]-like interval is smallest on a window centred at 1/2
    const Interval I(0.001, 1.001);
    EXPECT_NEAR(remez_ratio(ps("t - 0.501"), I, 0.2), 0.5 / 0.1, 1e-4);
}

TEST(RemezRatio, PolynomialBoundOnRandomPolynomials) {
    std::mt19937_64 rng(99);
    const Interval I(0.001, 1);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 1 + trial % 5;
        PowerSum f = random_polynomial(rng, n);
        for (double delta : {0.1, 0.25, 0.5}) EXPECT_LE(remez_ratio(f, I, delta), polynomial_remez_bound(n, delta));
    }
}

TEST(CheckCAlpha, Examples) {
    const Interval I(0.001, 1);
    EXPECT_TRUE(check_c_alpha(ps("t"), I, 0.3, 2.0, 1.0));
    EXPECT_FALSE(check_c_alpha(ps("t^2"), I, 0.01, 0.1, 3.0));
    EXPECT_TRUE(check_c_alpha(ps("t^2 - t"), I, 10.0, 1.0, 0.7));
    CAlphaCheck c = evaluate_c_alpha(ps("t"), I, 0.3, 2.0, 1.0);
    EXPECT_NEAR(c.measure, 0.299, 1e-12);
    EXPECT_NEAR(c.bound, 2.0 * 0.3 * 0.999, 1e-12);
}

TEST(CheckCAlpha, ImpliesRemezBound) {
    std::mt19937_64 rng(3);
    const Interval I(0.01, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        PowerSum f = random_power_sum(rng);
        const double norm = sup_norm(f, I);
        for (double delta : {0.25, 0.5}) {
            // the grid must contain the level |f|_{I_delta} of the worst window
            const double ratio = remez_ratio(f, I, delta);
            std::vector<double> eps_grid{1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.2, 0.4, 0.8, 1.0 / ratio};
            double C = 0.0; // least C making alpha = 1/4 hold on the grid
            for (double e : eps_grid)
                C = std::max(C, sublevel_measure(f, I, e * norm) / I.length() / std::pow(e, 0.25));
            for (double e : eps_grid) EXPECT_TRUE(check_c_alpha(f, I, e * norm, C * (1 + 1e-9), 0.25));
            EXPECT_LE(ratio, remez_bound_from_c_alpha(C, 0.25, delta) * (1 + 1e-6)) << f.str();
        }
    }
}

TEST(EstimateAlpha, LinearFamily) {
    std::vector<PowerSum> fam{ps("t"), ps("t - 0.25"), ps("t - 0.5"), ps("t - 0.75")};
    GoodnessReport rep = estimate_alpha(fam, Interval(0.001, 1), {0.001, 0.003, 0.01, 0.03, 0.1});
    ASSERT_TRUE(rep.alpha_hat.has_value()) << rep.degenerate_reason;
    EXPECT_NEAR(*rep.alpha_hat, 1.0, 0.05);
    EXPECT_TRUE(rep.violations.empty());
    EXPECT_EQ(rep.samples, 20u);
    EXPECT_GT(rep.right_max_checked, 0u);
}

TEST(EstimateAlpha, WorstPowerGoverns) {
    std::vector<PowerSum> fam{ps("t"), ps("t^2"), ps("t^3"), ps("t^4"), ps("t^5")};
    GoodnessReport rep = estimate_alpha(fam, Interval(0.001, 1), {1e-4, 1e-3, 1e-2, 0.1, 0.3}, {0.5, 4, 16});
    ASSERT_TRUE(rep.alpha_hat.has_value());
    EXPECT_NEAR(*rep.alpha_hat, 0.2, 0.02);
    EXPECT_TRUE(rep.violations.empty());
}

TEST(EstimateAlpha, ConstantIsDegenerate) {
    GoodnessReport rep = estimate_alpha({ps("2")}, Interval(0.001, 1), {0.01, 0.1, 0.5});
    EXPECT_FALSE(rep.alpha_hat.has_value());
    EXPECT_FALSE(rep.degenerate_reason.empty());
    EXPECT_THROW(estimate_alpha({}, Interval(0.001, 1), {0.1}), invalid_input);
    EXPECT_THROW(estimate_alpha({PowerSum()}, Interval(0.001, 1), {0.1}), invalid_input);
}

TEST(EstimateAlpha, ThreadCountDoesNotChangeResult) {
    std::mt19937_64 rng(8);
    std::vector<PowerSum> fam;
    for (int i = 0; i < 12; ++i) fam.push_back(random_power_sum(rng));
    const std::vector<double> eps{1e-3, 1e-2, 0.1};
    GoodnessReport a = estimate_alpha(fam, Interval(0.1, 3), eps, {0.5, 1, 16});
    GoodnessReport b = estimate_alpha(fam, Interval(0.1, 3), eps, {0.5, 5, 16});
    ASSERT_EQ(a.alpha_hat.has_value(), b.alpha_hat.has_value());
    if (a.alpha_hat) {
        EXPECT_EQ(*a.alpha_hat, *b.alpha_hat);
    }
    EXPECT_EQ(a.violations.size(), b.violations.size());
    std::ostringstream ca, cb;
    write_sublevel_csv(ca, a);
    write_sublevel_csv(cb, b);
    EXPECT_EQ(ca.str(), cb.str());
}

TEST(SmallestGoodT0, ReturnedThresholdIsTight) {
    const std::vector<PowerSum> fam{ps("t - 3")};
    const std::vector<double> grid{1, 2, 4, 8, 16, 32};
    const std::vector<double> eps{0.01, 0.1, 1.0};
    auto T0 = smallest_good_T0(fam, grid, eps, 1.0, 1.0);
    ASSERT_TRUE(T0.has_value());
    for (double T : grid) {
        bool ok = true;
        for (double m : {2.0, 10.0})
            for (double e : eps) ok &= check_c_alpha(fam[0], Interval(T, T * m), e, 1.0, 1.0);
        if (T >= *T0) {
            EXPECT_TRUE(ok) << T;
        }
    }
    EXPECT_GT(*T0, 1.0); // the root at 3 spoils intervals starting below it
}

TEST(Csv, HeaderAndRows) {
    GoodnessReport rep = estimate_alpha({ps("t"), ps("t^2")}, Interval(0.001, 1), {0.01, 0.1});
    std::ostringstream os;
    write_sublevel_csv(os, rep);
    const std::string s = os.str();
    EXPECT_EQ(s.substr(0, s.find('\n')), "member,epsilon,measure,relative_epsilon,relative_measure");
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 5);
}
