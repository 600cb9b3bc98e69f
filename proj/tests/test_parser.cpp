#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ominlab/parser.hpp"

using namespace ominlab;

TEST(ParseExpr, PrecedenceAndSexpr) {
    EXPECT_EQ(to_sexpr(parse_expr("t^(3/2) + 2*t")), "add(pow(t,3/2),mul(2,t))");
    EXPECT_EQ(to_sexpr(parse_expr("1/t")), "div(1,t)");
    EXPECT_EQ(to_sexpr(parse_expr("-t^2")), "neg(pow(t,2))");
    EXPECT_EQ(to_sexpr(parse_expr("2^3^2")), "pow(2,9)");
    EXPECT_EQ(to_sexpr(parse_expr("1 - t - t")), "sub(sub(1,t),t)");
    EXPECT_EQ(to_sexpr(parse_expr("-2*t")), "mul(neg(2),t)");
    EXPECT_EQ(to_sexpr(parse_expr("t^-2*3")), "mul(pow(t,-2),3)");
    EXPECT_EQ(to_sexpr(parse_expr("0.25*t")), "mul(1/4,t)");
}

TEST(ParseExpr, SyntaxErrorColumn) {
    try {
        parse_expr("t^^2");
        FAIL() << "expected syntax_error";
    } catch (const syntax_error& e) {
        EXPECT_EQ(e.line(), 1);
        EXPECT_EQ(e.column(), 3);
    }
}

TEST(ParseExpr, RejectedConstructs) {
    EXPECT_THROW(parse_expr("log(t)"), syntax_error);
    EXPECT_THROW(parse_expr("exp(t)"), syntax_error);
    EXPECT_THROW(parse_expr("sin(t)"), syntax_error);
    EXPECT_THROW(parse_expr("t^t"), syntax_error);
    EXPECT_THROW(parse_expr("t^(2^(1/2))"), syntax_error);
    EXPECT_THROW(parse_expr("x + 1"), syntax_error);
    EXPECT_THROW(parse_expr("(t + 1"), syntax_error);
    EXPECT_THROW(parse_expr("t +"), syntax_error);
    try {
        parse_expr("log(t)");
    } catch (const syntax_error& e) {
        EXPECT_NE(std::string(e.what()).find("disallowed identifier"), std::string::npos);
    }
}

namespace {

// Random well-formed expression text.
std::string random_text(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 8 : 2);
    std::uniform_int_distribution<int> small(1, 9);
    switch (pick(rng)) {
    case 0: return "t";
    case 1: return std::to_string(small(rng));
    case 2: return std::to_string(small(rng)) + ".5";
    case 3: return "-" + random_text(rng, depth - 1);
    case 4: return "(" + random_text(rng, depth - 1) + " + " + random_text(rng, depth - 1) + ")";
    case 5: return random_text(rng, depth - 1) + " - " + random_text(rng, depth - 1);
    case 6: return random_text(rng, depth - 1) + "*" + random_text(rng, depth - 1);
    case 7: return random_text(rng, depth - 1) + "/(" + random_text(rng, depth - 1) + ")";
    default: return "(" + random_text(rng, depth - 1) + ")^(" + std::to_string(small(rng)) + "/" + std::to_string(small(rng)) + ")";
    }
}

} // namespace

TEST(ParseExpr, PrettyPrintRoundTrip) {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 500; ++i) {
        const std::string text = random_text(rng, 4);
        Expr e = parse_expr(text);
        const std::string printed = to_string(e);
        Expr again = parse_expr(printed);
        EXPECT_TRUE(structurally_equal(e, again)) << text << "  ->  " << printed;
    }
}

TEST(ExprToSeries, Examples) {
    PowerSum a = expr_to_series(parse_expr("t*(1+1/t)"), Exponent(-8));
    ASSERT_EQ(a.terms().size(), 2u) << a.str();
    EXPECT_EQ(a.terms()[0].first, Exponent(1));
    EXPECT_NEAR(a.terms()[0].second, 1.0, 1e-14);
    EXPECT_EQ(a.terms()[1].first, Exponent(0));
    EXPECT_NEAR(a.terms()[1].second, 1.0, 1e-14);

    // (t^3+3)^{1/3} = t (1 + 3 t^-3)^{1/3} = t + t^-2 - t^-5 + (5/3) t^-8 ...
    PowerSum b = expr_to_series(parse_expr("(t^3+3)^(1/3)"), Exponent(-8));
    ASSERT_EQ(b.terms().size(), 3u) << b.str();
    EXPECT_EQ(b.terms()[1].first, Exponent(-2));
    EXPECT_NEAR(b.terms()[1].second, 1.0, 1e-14);
    EXPECT_EQ(b.terms()[2].first, Exponent(-5));
    EXPECT_NEAR(b.terms()[2].second, -1.0, 1e-14);

    EXPECT_THROW(expr_to_series(parse_expr("1/(t - t)"), Exponent(-8)), invalid_input);
    EXPECT_THROW(expr_to_series(parse_expr("(-t)^(1/2)"), Exponent(-8)), invalid_input);
}

TEST(ExprToSeries, AgreesWithNumericEvaluation) {
    const char* exprs[] = {"t*(1+1/t)", "(t^3+3)^(1/3)", "1/(t^2 + t + 1)", "(t + 2)^(3/2)/(t - 1)",
                           "t^(1/4)*(1 + t^(-1/2))^(-2)", "(2*t^2 - 1)/(t^(1/2) + 3)"};
    for (const char* s : exprs) {
        Expr e = parse_expr(s);
        PowerSum f = expr_to_series(e, Exponent(-10));
        for (double x : {10.0, 100.0, 1000.0}) {
            EvalResult r = ps_eval_bounded(f, x);
            EXPECT_NEAR(r.value, eval_expr(e, x), r.error_bound + 1e-12 * std::abs(r.value)) << s << " at " << x;
        }
    }
}

TEST(ParseCurve, QuadraticCorner) {
    CurveSpec spec = parse_curve("t, t^2; 0, 1/t");
    EXPECT_EQ(spec.n, 2u);
    EXPECT_EQ(to_sexpr(spec.entries[0][1]), "pow(t,2)");
    EXPECT_EQ(to_sexpr(spec.entries[1][1]), "div(1,t)");
}

TEST(ParseCurve, IdentityWithMetadata) {
    CurveSpec spec = parse_curve("# constant curve\nname = identity\nstart = 2\ndet = 1\n1,0;\n0,1;\n");
    EXPECT_EQ(spec.n, 2u);
    EXPECT_EQ(spec.name, "identity");
    EXPECT_DOUBLE_EQ(spec.t_start, 2.0);
    EXPECT_TRUE(spec.assert_unimodular);
}

TEST(ParseCurve, Errors) {
    EXPECT_THROW(parse_curve("t,t;t"), invalid_input);
    EXPECT_THROW(parse_curve("t"), invalid_input);
    EXPECT_THROW(parse_curve("t,1,2;0,1,2"), invalid_input);
    EXPECT_THROW(parse_curve("t,,1;0,1"), syntax_error);
    try {
        parse_curve("1, 0;\n0, t^^2");
        FAIL();
    } catch (const syntax_error& e) {
        EXPECT_EQ(e.line(), 2);
        EXPECT_EQ(e.column(), 6);
    }
}

TEST(ParseFamily, EmptyIsRejected) {
    try {
        parse_family("# nothing\n\n");
        FAIL();
    } catch (const invalid_input& e) {
        EXPECT_NE(std::string(e.what()).find("family must be nonempty"), std::string::npos);
    }
    EXPECT_EQ(parse_family("t - 0.25\nt^2\n").size(), 2u);
}
