#pragma once

// Curve-definition language:
//
//   expr   := expr ('+'|'-') expr | expr ('*'|'/') expr | '-' expr
//           | expr '^' exponent | '(' expr ')' | 't' | number
//   number := digits ['.' digits]
//
// Precedence, tightest first: '^' (right associative), unary '-', '*' '/', '+' '-'.
// Exponents must fold to a rational constant.  A curve file holds optional
// `key = value` metadata lines (name, start, det), '#' comments, and a matrix
// body whose entries are separated by ',' and rows terminated by ';'.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "exponent.hpp"
#include "power_sum.hpp"

namespace ominlab {

enum class ExprKind { Var, Num, Neg, Add, Sub, Mul, Div, Pow };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    ExprKind kind;
    Rational value; // Num: the literal; Pow: the exponent
    Expr lhs;       // Neg operand, binary lhs, Pow base
    Expr rhs;
};

namespace expr {

inline Expr var() { return std::make_shared<ExprNode>(ExprNode{ExprKind::Var, {}, nullptr, nullptr}); }
inline Expr num(Rational v) { return std::make_shared<ExprNode>(ExprNode{ExprKind::Num, v, nullptr, nullptr}); }
inline Expr neg(Expr a) { return std::make_shared<ExprNode>(ExprNode{ExprKind::Neg, {}, std::move(a), nullptr}); }
inline Expr binary(ExprKind k, Expr a, Expr b) {
    return std::make_shared<ExprNode>(ExprNode{k, {}, std::move(a), std::move(b)});
}
inline Expr pow(Expr base, Rational q) {
    return std::make_shared<ExprNode>(ExprNode{ExprKind::Pow, q, std::move(base), nullptr});
}

} // namespace expr

inline bool structurally_equal(const Expr& a, const Expr& b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case ExprKind::Var: return true;
    case ExprKind::Num: return a->value == b->value;
    case ExprKind::Neg: return structurally_equal(a->lhs, b->lhs);
    case ExprKind::Pow: return a->value == b->value && structurally_equal(a->lhs, b->lhs);
    default: return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
    }
}

// S-expression debug form, e.g. add(pow(t,3/2),mul(2,t)).
inline std::string to_sexpr(const Expr& e) {
    switch (e->kind) {
    case ExprKind::Var: return "t";
    case ExprKind::Num: return e->value.str();
    case ExprKind::Neg: return "neg(" + to_sexpr(e->lhs) + ")";
    case ExprKind::Add: return "add(" + to_sexpr(e->lhs) + "," + to_sexpr(e->rhs) + ")";
    case ExprKind::Sub: return "sub(" + to_sexpr(e->lhs) + "," + to_sexpr(e->rhs) + ")";
    case ExprKind::Mul: return "mul(" + to_sexpr(e->lhs) + "," + to_sexpr(e->rhs) + ")";
    case ExprKind::Div: return "div(" + to_sexpr(e->lhs) + "," + to_sexpr(e->rhs) + ")";
    case ExprKind::Pow: return "pow(" + to_sexpr(e->lhs) + "," + e->value.str() + ")";
    }
    return {};
}

namespace detail {

inline int precedence(ExprKind k) {
    switch (k) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::Pow: return 4;
    default: return 5;
    }
}

// Literals come from decimal text, so their denominators divide a power of ten.
inline std::string decimal_string(const Rational& v) {
    if (v.is_integer()) return std::to_string(v.num());
    std::int64_t n = v.num(), d = v.den();
    std::string out = std::to_string(n / d) + ".";
    std::int64_t rem = n % d;
    for (int i = 0; rem != 0 && i < 40; ++i) {
        rem *= 10;
        out += static_cast<char>('0' + rem / d);
        rem %= d;
    }
    return out;
}

inline std::string exponent_string(const Rational& q) {
    if (q.is_integer() && q.num() >= 0) return std::to_string(q.num());
    return "(" + q.str() + ")";
}

} // namespace detail

// Infix form that re-parses to a structurally identical tree.
inline std::string to_string(const Expr& e) {
    using detail::precedence;
    auto wrap = [](const Expr& c, bool paren) { return paren ? "(" + to_string(c) + ")" : to_string(c); };
    switch (e->kind) {
    case ExprKind::Var: return "t";
    case ExprKind::Num: return detail::decimal_string(e->value);
    case ExprKind::Neg: return "-" + wrap(e->lhs, precedence(e->lhs->kind) < 3);
    case ExprKind::Pow: return wrap(e->lhs, precedence(e->lhs->kind) < 5) + "^" + detail::exponent_string(e->value);
    default: {
        const int p = precedence(e->kind);
        const char* op = e->kind == ExprKind::Add ? " + " : e->kind == ExprKind::Sub ? " - " : e->kind == ExprKind::Mul ? "*" : "/";
        return wrap(e->lhs, precedence(e->lhs->kind) < p) + op + wrap(e->rhs, precedence(e->rhs->kind) <= p);
    }
    }
}

// ---------------------------------------------------------------------------
// Lexer / Pratt parser

namespace detail {

enum class Tok { Num, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, Semi, End };

struct Token {
    Tok kind;
    std::string text;
    Rational value;
    int line;
    int column;
};

inline const char* tok_name(Tok k) {
    switch (k) {
    case Tok::Num: return "number";
    case Tok::Ident: return "identifier";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Caret: return "'^'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::End: return "end of input";
    }
    return "?";
}

inline Rational parse_decimal(const std::string& s, int line, int col) {
    std::int64_t num = 0, den = 1;
    bool frac = false;
    for (char c : s) {
        if (c == '.') {
            frac = true;
            continue;
        }
        if (__builtin_mul_overflow(num, 10, &num) || __builtin_add_overflow(num, c - '0', &num))
            throw syntax_error("numeric literal '" + s + "' out of range", line, col);
        if (frac && __builtin_mul_overflow(den, 10, &den))
            throw syntax_error("numeric literal '" + s + "' has too many digits", line, col);
    }
    return Rational(num, den);
}

inline std::vector<Token> tokenize(std::string_view src, int line0 = 1, int col0 = 1) {
    std::vector<Token> out;
    int line = line0, col = col0;
    std::size_t i = 0;
    while (i < src.size()) {
        const char c = src[i];
        if (c == '\n') {
            ++line;
            col = 1;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++col;
            ++i;
            continue;
        }
        const int start_col = col;
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t j = i;
            bool dot = false;
            while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || (src[j] == '.' && !dot))) {
                if (src[j] == '.') dot = true;
                ++j;
            }
            std::string text(src.substr(i, j - i));
            if (text == ".") throw syntax_error("stray '.'", line, start_col);
            if (j < src.size() && src[j] == '.') throw syntax_error("malformed number", line, static_cast<int>(col + j - i));
            out.push_back({Tok::Num, text, parse_decimal(text, line, start_col), line, start_col});
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), {}, line, start_col});
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        Tok k;
        switch (c) {
        case '+': k = Tok::Plus; break;
        case '-': k = Tok::Minus; break;
        case '*': k = Tok::Star; break;
        case '/': k = Tok::Slash; break;
        case '^': k = Tok::Caret; break;
        case '(': k = Tok::LParen; break;
        case ')': k = Tok::RParen; break;
        case ',': k = Tok::Comma; break;
        case ';': k = Tok::Semi; break;
        default: throw syntax_error(std::string("unexpected character '") + c + "'", line, start_col);
        }
        out.push_back({k, std::string(1, c), {}, line, start_col});
        ++col;
        ++i;
    }
    out.push_back({Tok::End, "", {}, line, col});
    return out;
}

inline bool is_disallowed_function(const std::string& id) {
    static const char* names[] = {"log", "ln", "exp", "sin", "cos", "tan", "sqrt", "abs", "asin", "acos",
                                  "atan", "sinh", "cosh", "tanh", "pi", "e", "arcsin", "arctan"};
    for (const char* n : names)
        if (id == n) return true;
    return false;
}

// Constant value of an exponent expression, or nullopt when it depends on t.
inline std::optional<Rational> fold_constant(const Expr& e, const Token& at) {
    switch (e->kind) {
    case ExprKind::Var: return std::nullopt;
    case ExprKind::Num: return e->value;
    case ExprKind::Neg: {
        auto a = fold_constant(e->lhs, at);
        if (!a) return std::nullopt;
        return -*a;
    }
    case ExprKind::Pow: {
        auto a = fold_constant(e->lhs, at);
        if (!a) return std::nullopt;
        if (!e->value.is_integer())
            throw syntax_error("irrational exponent construct: fractional power inside an exponent", at.line, at.column);
        Rational r(1);
        std::int64_t k = e->value.num();
        const Rational base = k < 0 ? Rational(1) / *a : *a;
        for (std::int64_t i = 0; i < (k < 0 ? -k : k); ++i) r *= base;
        return r;
    }
    default: {
        auto a = fold_constant(e->lhs, at);
        auto b = fold_constant(e->rhs, at);
        if (!a || !b) return std::nullopt;
        switch (e->kind) {
        case ExprKind::Add: return *a + *b;
        case ExprKind::Sub: return *a - *b;
        case ExprKind::Mul: return *a * *b;
        case ExprKind::Div:
            if (b->num() == 0) throw syntax_error("division by zero in exponent", at.line, at.column);
            return *a / *b;
        default: return std::nullopt;
        }
    }
    }
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    Expr parse(int rbp = 0) {
        Token t = next();
        Expr left = nud(t);
        while (rbp < lbp(peek().kind)) {
            t = next();
            left = led(t, left);
        }
        return left;
    }

    const Token& peek() const { return toks_[pos_]; }
    Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void unexpected(const Token& t) const {
        if (t.kind == Tok::End) throw syntax_error("unexpected end of input", t.line, t.column);
        throw syntax_error(std::string("unexpected ") + tok_name(t.kind), t.line, t.column);
    }

private:
    static int lbp(Tok k) {
        switch (k) {
        case Tok::Plus:
        case Tok::Minus: return 10;
        case Tok::Star:
        case Tok::Slash: return 20;
        case Tok::Caret: return 40;
        default: return 0;
        }
    }

    Expr nud(const Token& t) {
        switch (t.kind) {
        case Tok::Num: return expr::num(t.value);
        case Tok::Ident:
            if (t.text == "t") return expr::var();
            if (is_disallowed_function(t.text))
                throw syntax_error("disallowed identifier '" + t.text + "' (only power sums in t are supported)", t.line,
                                   t.column);
            throw syntax_error("unknown identifier '" + t.text + "'", t.line, t.column);
        case Tok::Minus: return expr::neg(parse(30));
        case Tok::LParen: {
            Expr inner = parse(0);
            Token close = next();
            if (close.kind != Tok::RParen) {
                if (close.kind == Tok::End) throw syntax_error("missing ')'", close.line, close.column);
                unexpected(close);
            }
            return inner;
        }
        default: unexpected(t);
        }
    }

    Expr led(const Token& t, Expr left) {
        switch (t.kind) {
        case Tok::Plus: return expr::binary(ExprKind::Add, left, parse(10));
        case Tok::Minus: return expr::binary(ExprKind::Sub, left, parse(10));
        case Tok::Star: return expr::binary(ExprKind::Mul, left, parse(20));
        case Tok::Slash: return expr::binary(ExprKind::Div, left, parse(20));
        case Tok::Caret: {
            const Token& at = peek();
            Expr exponent = parse(39);
            auto q = fold_constant(exponent, at);
            if (!q) throw syntax_error("irrational exponent construct: exponent must be a rational constant", at.line, at.column);
            return expr::pow(left, *q);
        }
        default: unexpected(t);
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline Expr parse_expr(std::string_view text) {
    detail::Parser p(detail::tokenize(text));
    Expr e = p.parse();
    if (p.peek().kind != detail::Tok::End) p.unexpected(p.peek());
    return e;
}

// ---------------------------------------------------------------------------
// Evaluation and lowering

inline double eval_expr(const Expr& e, double t) {
    switch (e->kind) {
    case ExprKind::Var: return t;
    case ExprKind::Num: return e->value.to_double();
    case ExprKind::Neg: return -eval_expr(e->lhs, t);
    case ExprKind::Add: return eval_expr(e->lhs, t) + eval_expr(e->rhs, t);
    case ExprKind::Sub: return eval_expr(e->lhs, t) - eval_expr(e->rhs, t);
    case ExprKind::Mul: return eval_expr(e->lhs, t) * eval_expr(e->rhs, t);
    case ExprKind::Div: return eval_expr(e->lhs, t) / eval_expr(e->rhs, t);
    case ExprKind::Pow: {
        const double b = eval_expr(e->lhs, t);
        if (e->value.is_integer()) return std::pow(b, static_cast<double>(e->value.num()));
        if (b < 0.0) return std::nan("");
        return std::pow(b, e->value.to_double());
    }
    }
    return std::nan("");
}

// Lower an expression to a power sum certified above `order` (exact when no
// division or fractional power forces an infinite expansion).
inline PowerSum expr_to_series(const Expr& e, const Exponent& order) {
    auto shifted = [](const Exponent& o, const DegreeValue& by) {
        return by.is_finite() ? o - by.value() : o;
    };
    auto finish = [&](PowerSum r) { return r.is_exact() ? r : r.truncated(order); };
    switch (e->kind) {
    case ExprKind::Var: return PowerSum::variable();
    case ExprKind::Num: return PowerSum::constant(e->value.to_double());
    case ExprKind::Neg: return -expr_to_series(e->lhs, order);
    case ExprKind::Add: return finish(expr_to_series(e->lhs, order) + expr_to_series(e->rhs, order));
    case ExprKind::Sub: return finish(expr_to_series(e->lhs, order) - expr_to_series(e->rhs, order));
    case ExprKind::Mul: {
        PowerSum a = expr_to_series(e->lhs, order);
        if (a.is_zero()) return a;
        PowerSum b = expr_to_series(e->rhs, shifted(order, a.degree_bound()));
        if (!a.is_exact()) a = expr_to_series(e->lhs, shifted(order, b.degree_bound()));
        return finish(a * b);
    }
    case ExprKind::Div: {
        PowerSum b = expr_to_series(e->rhs, order);
        if (b.is_zero()) throw invalid_input("division by the zero series in '" + to_string(e) + "'");
        if (b.empty())
            throw truncation_error("denominator of '" + to_string(e) + "' vanishes to the requested order " + order.str());
        const Exponent db = b.degree().value();
        PowerSum a = expr_to_series(e->lhs, order + db);
        if (a.is_zero()) return a;
        const Exponent want = shifted(order, a.degree_bound());
        if (!b.is_exact()) b = expr_to_series(e->rhs, want + db + db);
        return finish(a * ps_inv_clamped(b, want));
    }
    case ExprKind::Pow: {
        const Rational q = e->value;
        if (q == Rational(0)) return PowerSum::constant(1.0);
        PowerSum base = expr_to_series(e->lhs, order);
        if (base.empty()) {
            if (base.is_exact() && q > Rational(0)) return base;
            if (base.is_exact()) throw invalid_input("division by the zero series in '" + to_string(e) + "'");
            throw truncation_error("base of '" + to_string(e) + "' vanishes to the requested order");
        }
        const Exponent d = base.degree().value();
        if (!base.is_exact()) base = expr_to_series(e->lhs, order - q * d + d);
        if (base.is_exact() && q.is_integer() && q.num() > 0) return ps_pow(base, q, order);
        if (!q.is_integer() && base.leading_coefficient() <= 0.0)
            throw invalid_input("fractional power of a series with non-positive leading coefficient in '" + to_string(e) + "'");
        return finish(ps_pow(base, q, order));
    }
    }
    return {};
}

// ---------------------------------------------------------------------------
// Curve files

struct CurveSpec {
    std::size_t n = 0;
    std::vector<std::vector<Expr>> entries;
    std::string name;
    double t_start = 0.0;
    bool assert_unimodular = false;
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

} // namespace detail

inline CurveSpec parse_curve(std::string_view text) {
    CurveSpec spec;
    std::string body;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        ++line_no;
        std::string kept(line);
        if (auto h = kept.find('#'); h != std::string::npos) kept.erase(h);
        if (auto eq = kept.find('='); eq != std::string::npos) {
            const std::string key = detail::trim(std::string_view(kept).substr(0, eq));
            const std::string val = detail::trim(std::string_view(kept).substr(eq + 1));
            if (key == "name") {
                spec.name = val;
            } else if (key == "start") {
                try {
                    spec.t_start = std::stod(val);
                } catch (const std::exception&) {
                    throw syntax_error("invalid start value '" + val + "'", line_no, static_cast<int>(eq) + 2);
                }
            } else if (key == "det") {
                if (val != "1") throw syntax_error("only det = 1 may be asserted", line_no, static_cast<int>(eq) + 2);
                spec.assert_unimodular = true;
            } else {
                throw syntax_error("unknown curve metadata key '" + key + "'", line_no, 1);
            }
            kept.clear();
        }
        body += kept;
        body += '\n';
        pos = nl + 1;
    }

    auto toks = detail::tokenize(body);
    detail::Parser p(std::move(toks));
    std::vector<Expr> row;
    while (p.peek().kind != detail::Tok::End) {
        Expr e = p.parse();
        row.push_back(e);
        const detail::Token sep = p.next();
        if (sep.kind == detail::Tok::Comma) {
            if (p.peek().kind == detail::Tok::Semi || p.peek().kind == detail::Tok::End) p.unexpected(p.peek());
            continue;
        }
        if (sep.kind == detail::Tok::Semi || sep.kind == detail::Tok::End) {
            spec.entries.push_back(std::move(row));
            row.clear();
            if (sep.kind == detail::Tok::End) break;
            continue;
        }
        p.unexpected(sep);
    }
    if (!row.empty()) spec.entries.push_back(std::move(row));
    if (spec.entries.empty()) throw invalid_input("curve has no entries");
    spec.n = spec.entries.size();
    for (std::size_t i = 0; i < spec.entries.size(); ++i) {
        if (spec.entries[i].size() != spec.entries[0].size())
            throw invalid_input("ragged rows: row " + std::to_string(i + 1) + " has " +
                                std::to_string(spec.entries[i].size()) + " entries, row 1 has " +
                                std::to_string(spec.entries[0].size()));
    }
    if (spec.entries[0].size() != spec.n)
        throw invalid_input("curve matrix must be square, got " + std::to_string(spec.n) + "x" +
                            std::to_string(spec.entries[0].size()));
    if (spec.n < 2) throw invalid_input("curve dimension must be at least 2");
    return spec;
}

// One expression per non-empty line; '#' starts a comment.
inline std::vector<Expr> parse_family(std::string_view text) {
    std::vector<Expr> out;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string line(text.substr(pos, nl - pos));
        ++line_no;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        if (!detail::trim(line).empty()) {
            detail::Parser p(detail::tokenize(line, line_no, 1));
            Expr e = p.parse();
            if (p.peek().kind != detail::Tok::End) p.unexpected(p.peek());
            out.push_back(e);
        }
        pos = nl + 1;
    }
    if (out.empty()) throw invalid_input("family must be nonempty");
    return out;
}

} // namespace ominlab
