#pragma once

// Peterzil-Steinhorn data of a matrix curve: the order r and tangent matrix
// M = lim t^r phi'(t) phi(t)^{-1}, the one-parameter group
// rho(s) = lim phi(h_{r,s}(t)) phi(t)^{-1}, and the stable-unstable-constant
// decomposition phi = sigma(t) b(t) C deciding essential diagonality.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "curves.hpp"
#include "errors.hpp"
#include "power_sum.hpp"

namespace ominlab {

inline MatrixCurve log_derivative(const MatrixCurve& phi, std::int64_t depth = kDefaultDepth) {
    MatrixCurve d = entrywise(phi, [](const PowerSum& f) { return ps_derivative(f); });
    return d * curve_inverse(phi, depth);
}

enum class PSKind { Unipotent, Diagonalizable, Indeterminate };

inline const char* to_string(PSKind k) {
    switch (k) {
    case PSKind::Unipotent: return "Unipotent";
    case PSKind::Diagonalizable: return "Diagonalizable";
    case PSKind::Indeterminate: return "Indeterminate";
    }
    return "?";
}

struct PSResult {
    Rational r;
    Eigen::MatrixXd M;
    PSKind kind = PSKind::Indeterminate;
    std::string note; // reason for Indeterminate
};

// Entries of M^n at most tol * |M|^n count as zero.
inline bool is_nilpotent(const Eigen::MatrixXd& m, double tol = 1e-9) {
    const double norm = m.cwiseAbs().maxCoeff();
    if (norm == 0.0) return true;
    Eigen::MatrixXd p = m;
    for (Eigen::Index i = 1; i < m.rows(); ++i) p = p * m;
    return p.cwiseAbs().maxCoeff() <= tol * std::pow(norm, static_cast<double>(m.rows()));
}

inline bool is_bounded(const MatrixCurve& phi) {
    for (std::size_t i = 0; i < phi.n(); ++i)
        for (std::size_t j = 0; j < phi.n(); ++j)
            if (phi(i, j).degree_bound() > DegreeValue(Exponent(0))) return false;
    return true;
}

inline PSResult ps_order(const MatrixCurve& phi, std::int64_t depth = kDefaultDepth) {
    if (is_bounded(phi)) throw invalid_input("curve is bounded; the P.S. order needs an unbounded curve");
    const MatrixCurve L = log_derivative(phi, depth);
    const std::size_t n = phi.n();
    DegreeValue top = DegreeValue::neg_inf(), top_bound = DegreeValue::neg_inf();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            top = max(top, L(i, j).degree());
            top_bound = max(top_bound, L(i, j).degree_bound());
        }
    if (top.is_neg_inf()) {
        if (top_bound.is_neg_inf()) throw invalid_input("phi' phi^{-1} vanishes identically");
        throw truncation_error("phi' phi^{-1} vanishes to its truncation order " + top_bound.str());
    }
    PSResult res;
    res.r = -top.value();
    if (res.r > Rational(1))
        throw consistency_error("computed P.S. order r = " + res.r.str() + " exceeds 1; input is outside the model");
    res.M = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (L(i, j).degree() == top) res.M(i, j) = L(i, j).leading_coefficient();
    const bool nilpotent = is_nilpotent(res.M);
    if (top_bound > top) {
        res.kind = PSKind::Indeterminate;
        res.note = "an entry of phi' phi^{-1} is unknown above degree " + top.str();
    } else if (res.r == Rational(1)) {
        res.kind = nilpotent ? PSKind::Indeterminate : PSKind::Diagonalizable;
        if (nilpotent) res.note = "r = 1 but M is nilpotent";
    } else {
        res.kind = nilpotent ? PSKind::Unipotent : PSKind::Indeterminate;
        if (!nilpotent) res.note = "r < 1 but M is not nilpotent";
    }
    return res;
}

// rho(s) = lim phi(h_{r,s}(t)) phi(t)^{-1}
inline Eigen::MatrixXd ps_one_param(const MatrixCurve& phi, const PSResult& ps, double s,
                                    std::int64_t depth = kDefaultDepth) {
    const std::size_t n = phi.n();
    if (s == 0.0) return Eigen::MatrixXd::Identity(n, n);
    if (ps.r == Rational(1) && !(s > 0.0)) throw invalid_input("for r = 1 the parameter s must be positive");
    const MatrixCurve inv = curve_inverse(phi, depth);
    DegreeValue inv_top = DegreeValue::neg_inf();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv_top = max(inv_top, inv(i, j).degree_bound());
    const Exponent shift_by = inv_top.is_finite() ? inv_top.value() : Exponent(0);
    const Exponent order = -shift_by - Exponent(depth);
    MatrixCurve moved(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) moved(i, j) = ps_compose_speed(phi(i, j), ps.r, s, order);
    const MatrixCurve prod = moved * inv;
    Eigen::MatrixXd out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            LimitValue v;
            try {
                v = ps_limit(prod(i, j));
            } catch (const truncation_error&) {
                throw truncation_error("rho(s) entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                       ") is not resolved; needs expansion order below " + order.str());
            }
            if (!v.is_finite())
                throw consistency_error("rho(s) entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                        ") diverges");
            out(i, j) = v.as_double();
        }
    return out;
}

// ---------------------------------------------------------------------------
// SUC decomposition

struct SUCDecomposition {
    Eigen::MatrixXd sigma_limit;
    double sigma_deviation_at_100 = 0.0; // max |sigma(100) - sigma_limit|
    MatrixCurve sigma;                   // full series, kept for reconstruction checks
    MatrixCurve b;
    Eigen::MatrixXd C;
    bool essentially_diagonal = false;
    std::size_t steps = 0;
    std::vector<std::string> notes;
};

inline constexpr std::int64_t kSucDepth = 24;

namespace detail {

// Treat entries whose known terms all cancelled as eventually zero.
inline bool vanishes(const PowerSum& f) { return f.empty(); }

} // namespace detail

// Gram-Schmidt on columns: phi = k p with k orthogonal, p upper triangular
// with positive leading coefficients on the diagonal.
inline std::pair<MatrixCurve, MatrixCurve> symbolic_qr(const MatrixCurve& phi, std::int64_t depth = kSucDepth) {
    const std::size_t n = phi.n();
    MatrixCurve k(n), p(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<PowerSum> v(n);
        for (std::size_t r = 0; r < n; ++r) v[r] = phi(r, j);
        for (std::size_t i = 0; i < j; ++i) {
            PowerSum c;
            for (std::size_t r = 0; r < n; ++r)
                if (!k(r, i).is_zero() && !phi(r, j).is_zero()) c = c + k(r, i) * phi(r, j);
            p(i, j) = c;
            if (c.is_zero()) continue;
            for (std::size_t r = 0; r < n; ++r)
                if (!k(r, i).is_zero()) v[r] = v[r] - c * k(r, i);
        }
        PowerSum sq;
        for (std::size_t r = 0; r < n; ++r)
            if (!v[r].is_zero()) sq = sq + v[r] * v[r];
        if (sq.empty())
            throw truncation_error("Gram-Schmidt pivot " + std::to_string(j + 1) + " vanishes to order " + sq.trunc().str());
        if (sq.leading_coefficient() <= 0.0)
            throw consistency_error("Gram-Schmidt pivot " + std::to_string(j + 1) + " has a non-positive leading term");
        const Exponent dsq = sq.degree().value();
        const PowerSum norm = ps_pow(sq, Rational(1, 2), dsq / Exponent(2) - Exponent(depth));
        p(j, j) = norm;
        const Exponent dn = norm.degree().value();
        const PowerSum inv_norm = ps_inv_clamped(norm, -dn - Exponent(depth));
        for (std::size_t r = 0; r < n; ++r) k(r, j) = v[r].is_zero() ? PowerSum() : v[r] * inv_norm;
    }
    return {k, p};
}

inline Eigen::MatrixXd limit_matrix(const MatrixCurve& m) {
    Eigen::MatrixXd out(m.n(), m.n());
    for (std::size_t i = 0; i < m.n(); ++i)
        for (std::size_t j = 0; j < m.n(); ++j) {
            const LimitValue v = ps_limit(m(i, j));
            if (!v.is_finite())
                throw consistency_error("entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                        ") of a convergent factor diverges");
            out(i, j) = v.as_double();
        }
    return out;
}

inline SUCDecomposition suc_decompose(const MatrixCurve& phi, std::int64_t depth = kSucDepth) {
    const std::size_t n = phi.n();
    auto [sigma, b] = symbolic_qr(phi, depth);
    Eigen::MatrixXd C = Eigen::MatrixXd::Identity(n, n);
    SUCDecomposition out;

    std::size_t max_terms = 1;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) max_terms = std::max(max_terms, b(i, j).terms().size());
    const std::size_t guard = n * n * max_terms;

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && !b(i, j).is_zero() && detail::vanishes(b(i, j))) {
                out.notes.push_back("entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                    ") cancelled to its truncation order and is treated as zero");
                b(i, j) = PowerSum();
            }

    std::size_t steps = 0;
    bool diagonal = false;
    while (true) {
        // first non-zero off-diagonal entry in lexicographic order
        std::size_t fi = n, fj = n;
        for (std::size_t i = 0; i < n && fi == n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (!b(i, j).is_zero()) {
                    fi = i;
                    fj = j;
                    break;
                }
        if (fi == n) {
            diagonal = true;
            break;
        }
        if (++steps > guard)
            throw truncation_error("SUC iteration exceeded " + std::to_string(guard) + " steps");
        const std::size_t i = fi, j = fj;
        if (b(i, j).degree() == b(i, i).degree()) {
            // column j -= c * column i; only (i, j) changes since rows above i are diagonal
            const double c = b(i, j).leading_coefficient() / b(i, i).leading_coefficient();
            PowerSum rest = b(i, j) - c * b(i, i);
            Eigen::MatrixXd U = Eigen::MatrixXd::Identity(n, n);
            U(i, j) = c;
            C = U * C;
            if (detail::vanishes(rest)) {
                if (!rest.is_exact())
                    out.notes.push_back("column step at (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                        ") cancelled to truncation order " + rest.trunc().str());
                b(i, j) = PowerSum();
                continue;
            }
            b(i, j) = rest;
        }
        if (b(i, j).degree() > b(j, j).degree()) break;
        // row i -= g * row j with g = f_ij / f_jj of non-positive degree
        const PowerSum& fjj = b(j, j);
        const PowerSum g = b(i, j) * ps_inv_clamped(fjj, -fjj.degree().value() - Exponent(depth));
        for (std::size_t l = j + 1; l < n; ++l)
            if (!b(j, l).is_zero()) b(i, l) = b(i, l) - g * b(j, l);
        b(i, j) = PowerSum();
        for (std::size_t r = 0; r < n; ++r)
            if (!sigma(r, i).is_zero()) sigma(r, j) = sigma(r, j) + sigma(r, i) * g;
        for (std::size_t l = j + 1; l < n; ++l)
            if (!b(i, l).is_zero() && detail::vanishes(b(i, l))) b(i, l) = PowerSum();
    }

    out.sigma_limit = limit_matrix(sigma);
    out.sigma_deviation_at_100 = (sigma.eval(100.0) - out.sigma_limit).cwiseAbs().maxCoeff();
    out.sigma = sigma;
    out.b = b;
    out.C = C;
    out.essentially_diagonal = diagonal;
    out.steps = steps;
    return out;
}

// Essential diagonality from the SUC decomposition, cross-checked against the P.S. kind.
inline bool essentially_diagonal(const MatrixCurve& phi, std::int64_t depth = kSucDepth) {
    const SUCDecomposition suc = suc_decompose(phi, depth);
    if (!is_bounded(phi)) {
        const PSResult ps = ps_order(phi);
        if (ps.kind != PSKind::Indeterminate && (ps.kind == PSKind::Diagonalizable) != suc.essentially_diagonal)
            throw consistency_error(std::string("SUC says ") +
                                    (suc.essentially_diagonal ? "essentially diagonal" : "not essentially diagonal") +
                                    " but the P.S. group is " + to_string(ps.kind));
    }
    return suc.essentially_diagonal;
}

} // namespace ominlab
