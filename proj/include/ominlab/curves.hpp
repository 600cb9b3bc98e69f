#pragma once

// Matrix curves with power-sum entries: algebra, exterior powers, degree
// bookkeeping and the non-contraction diagnostics built on them.
//
// Wedge bases are indexed by k-subsets of {0, ..., n-1} in colexicographic
// order ({0,1} < {0,2} < {1,2} < {0,3} < ...).  The (I, J) entry of
// wedge_rep(phi, k) is the minor with rows I and columns J, so column J holds
// the coordinates of phi(t).e_J.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "parser.hpp"
#include "power_sum.hpp"
#include "rng.hpp"

namespace ominlab {

class MatrixCurve {
public:
    MatrixCurve() = default;
    explicit MatrixCurve(std::size_t n) : n_(n), entries_(n * n) {}

    static MatrixCurve identity(std::size_t n) {
        MatrixCurve m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = PowerSum::constant(1.0);
        m.unimodular_ = true;
        return m;
    }

    static MatrixCurve constant(const Eigen::MatrixXd& a) {
        if (a.rows() != a.cols()) throw invalid_input("constant curve must be square");
        MatrixCurve m(static_cast<std::size_t>(a.rows()));
        for (std::size_t i = 0; i < m.n_; ++i)
            for (std::size_t j = 0; j < m.n_; ++j)
                if (a(i, j) != 0.0) m(i, j) = PowerSum::constant(a(i, j));
        return m;
    }

    static MatrixCurve from_rows(const std::vector<std::vector<PowerSum>>& rows) {
        MatrixCurve m(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.size()) throw invalid_input("matrix curve must be square");
            for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    std::size_t n() const noexcept { return n_; }
    PowerSum& operator()(std::size_t i, std::size_t j) { return entries_[i * n_ + j]; }
    const PowerSum& operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }

    bool unimodular() const noexcept { return unimodular_; }
    void set_unimodular(bool v) noexcept { unimodular_ = v; }

    bool is_exact() const noexcept {
        return std::all_of(entries_.begin(), entries_.end(), [](const PowerSum& f) { return f.is_exact(); });
    }

    Eigen::MatrixXd eval(double t) const {
        Eigen::MatrixXd out(n_, n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) out(i, j) = ps_eval((*this)(i, j), t);
        return out;
    }

    // Largest heuristic truncation bound over the entries at t.
    double eval_error_bound(double t) const {
        double m = 0.0;
        for (const auto& f : entries_) m = std::max(m, ps_eval_bounded(f, t).error_bound);
        return m;
    }

    std::string str() const {
        std::string out;
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) out += (j ? ", " : "") + (*this)(i, j).str();
            out += ";\n";
        }
        return out;
    }

private:
    std::size_t n_ = 0;
    std::vector<PowerSum> entries_;
    bool unimodular_ = false;
};

inline MatrixCurve operator*(const MatrixCurve& a, const MatrixCurve& b) {
    if (a.n() != b.n()) throw invalid_input("dimension mismatch in curve product");
    MatrixCurve out(a.n());
    for (std::size_t i = 0; i < a.n(); ++i)
        for (std::size_t j = 0; j < a.n(); ++j) {
            PowerSum acc;
            for (std::size_t k = 0; k < a.n(); ++k) {
                if (a(i, k).is_zero() || b(k, j).is_zero()) continue;
                acc = acc + a(i, k) * b(k, j);
            }
            out(i, j) = acc;
        }
    out.set_unimodular(a.unimodular() && b.unimodular());
    return out;
}

inline MatrixCurve operator+(const MatrixCurve& a, const MatrixCurve& b) {
    if (a.n() != b.n()) throw invalid_input("dimension mismatch in curve sum");
    MatrixCurve out(a.n());
    for (std::size_t i = 0; i < a.n(); ++i)
        for (std::size_t j = 0; j < a.n(); ++j) out(i, j) = a(i, j) + b(i, j);
    return out;
}

inline MatrixCurve operator-(const MatrixCurve& a, const MatrixCurve& b) {
    if (a.n() != b.n()) throw invalid_input("dimension mismatch in curve difference");
    MatrixCurve out(a.n());
    for (std::size_t i = 0; i < a.n(); ++i)
        for (std::size_t j = 0; j < a.n(); ++j) out(i, j) = a(i, j) - b(i, j);
    return out;
}

inline MatrixCurve entrywise(const MatrixCurve& a, const auto& fn) {
    MatrixCurve out(a.n());
    for (std::size_t i = 0; i < a.n(); ++i)
        for (std::size_t j = 0; j < a.n(); ++j) out(i, j) = fn(a(i, j));
    return out;
}

// ---------------------------------------------------------------------------
// Minors and inverse

// Determinant of the submatrix with the given rows and columns, by Laplace
// expansion along rows with memoisation over the remaining column set.
inline PowerSum curve_minor(const MatrixCurve& phi, const std::vector<std::size_t>& rows,
                            const std::vector<std::size_t>& cols) {
    const std::size_t k = rows.size();
    if (cols.size() != k) throw invalid_input("minor needs as many rows as columns");
    if (k == 0) return PowerSum::constant(1.0);
    if (k > 20) throw invalid_input("minor too large");
    std::map<std::uint32_t, PowerSum> memo;
    auto rec = [&](auto&& self, std::size_t depth, std::uint32_t mask) -> PowerSum {
        if (depth == k) return PowerSum::constant(1.0);
        if (auto it = memo.find(mask); it != memo.end()) return it->second;
        PowerSum acc;
        int position = 0;
        for (std::size_t c = 0; c < k; ++c) {
            if (!(mask & (1u << c))) continue;
            const PowerSum& entry = phi(rows[depth], cols[c]);
            if (!entry.is_zero()) {
                PowerSum sub = self(self, depth + 1, mask & ~(1u << c));
                PowerSum term = entry * sub;
                acc = (position % 2 == 0) ? acc + term : acc - term;
            }
            ++position;
        }
        memo.emplace(mask, acc);
        return acc;
    };
    return rec(rec, 0, (k == 32 ? 0u : (1u << k)) - 1u);
}

inline PowerSum curve_det(const MatrixCurve& phi) {
    std::vector<std::size_t> idx(phi.n());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return curve_minor(phi, idx, idx);
}

// True when det(phi) - 1 has no certified term above the given tolerance.
inline bool determinant_is_one(const PowerSum& det, double tol = 1e-9) {
    if (det.trunc().is_finite() && det.trunc().value() >= Exponent(0)) return false;
    PowerSum d = det - PowerSum::constant(1.0);
    return std::all_of(d.terms().begin(), d.terms().end(), [&](const auto& t) { return std::abs(t.second) <= tol; });
}

inline MatrixCurve curve_inverse(const MatrixCurve& phi, std::int64_t depth = kDefaultDepth) {
    const std::size_t n = phi.n();
    PowerSum det = curve_det(phi);
    if (det.is_zero()) throw invalid_input("determinant series is zero; curve is not invertible");
    if (det.empty()) throw truncation_error("determinant vanishes to its truncation order " + det.trunc().str());
    PowerSum inv_det;
    if (phi.unimodular() && determinant_is_one(det)) {
        inv_det = PowerSum::constant(1.0);
    } else {
        inv_det = ps_inv_clamped(det, -det.degree().value() - Exponent(depth));
    }
    MatrixCurve out(n);
    std::vector<std::size_t> rows, cols;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            // inverse(i, j) = (-1)^{i+j} minor(phi without row j, column i) / det
            rows.clear();
            cols.clear();
            for (std::size_t r = 0; r < n; ++r)
                if (r != j) rows.push_back(r);
            for (std::size_t c = 0; c < n; ++c)
                if (c != i) cols.push_back(c);
            PowerSum cof = curve_minor(phi, rows, cols);
            if ((i + j) % 2) cof = -cof;
            out(i, j) = cof * inv_det;
        }
    }
    out.set_unimodular(phi.unimodular());
    return out;
}

// ---------------------------------------------------------------------------
// Lowering curve specs

// Each entry is certified to `depth` orders below its own leading exponent.
inline PowerSum lower_entry(const Expr& e, std::int64_t depth = kDefaultDepth) {
    PowerSum f = expr_to_series(e, Exponent(-depth));
    if (f.is_exact() || f.empty()) return f;
    return expr_to_series(e, f.degree().value() - Exponent(depth));
}

inline MatrixCurve lower_curve(const CurveSpec& spec, std::int64_t depth = kDefaultDepth) {
    MatrixCurve m(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i)
        for (std::size_t j = 0; j < spec.n; ++j) m(i, j) = lower_entry(spec.entries[i][j], depth);
    const PowerSum det = curve_det(m);
    const bool one = determinant_is_one(det);
    if (spec.assert_unimodular && !one)
        throw invalid_input("curve is flagged det = 1 but its determinant is " + det.str());
    m.set_unimodular(one);
    return m;
}

// Direct numeric evaluation of the curve's expressions (no truncation).
inline Eigen::MatrixXd eval_spec(const CurveSpec& spec, double t) {
    Eigen::MatrixXd out(spec.n, spec.n);
    for (std::size_t i = 0; i < spec.n; ++i)
        for (std::size_t j = 0; j < spec.n; ++j) {
            const double v = eval_expr(spec.entries[i][j], t);
            if (!std::isfinite(v))
                throw invalid_input("curve entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                    ") is not defined at t = " + std::to_string(t));
            out(i, j) = v;
        }
    return out;
}

// ---------------------------------------------------------------------------
// Exterior powers

inline std::vector<std::vector<std::size_t>> subsets_colex(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    if (k > n) return out;
    std::vector<std::size_t> cur(k);
    for (std::size_t i = 0; i < k; ++i) cur[i] = i;
    while (true) {
        out.push_back(cur);
        // colex successor: bump the first element that can move, reset the ones before it
        std::size_t i = 0;
        while (i < k && ((i + 1 < k) ? cur[i] + 1 == cur[i + 1] : cur[i] + 1 == n)) ++i;
        if (i == k) break;
        ++cur[i];
        for (std::size_t j = 0; j < i; ++j) cur[j] = j;
        if (k == 0) break;
    }
    return out;
}

inline std::string subset_str(const std::vector<std::size_t>& s) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
    return out + "}";
}

inline MatrixCurve wedge_rep(const MatrixCurve& phi, std::size_t k) {
    if (k < 1 || k > phi.n())
        throw invalid_input("wedge grade k = " + std::to_string(k) + " outside 1.." + std::to_string(phi.n()));
    const auto subsets = subsets_colex(phi.n(), k);
    MatrixCurve out(subsets.size());
    for (std::size_t a = 0; a < subsets.size(); ++a)
        for (std::size_t b = 0; b < subsets.size(); ++b) out(a, b) = curve_minor(phi, subsets[a], subsets[b]);
    out.set_unimodular(phi.unimodular());
    return out;
}

// Numeric k-th exterior power of a real matrix, same basis order.
inline Eigen::MatrixXd wedge_matrix(const Eigen::MatrixXd& a, std::size_t k) {
    const std::size_t n = static_cast<std::size_t>(a.rows());
    const auto subsets = subsets_colex(n, k);
    Eigen::MatrixXd out(subsets.size(), subsets.size());
    Eigen::MatrixXd sub(k, k);
    for (std::size_t p = 0; p < subsets.size(); ++p)
        for (std::size_t q = 0; q < subsets.size(); ++q) {
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) sub(i, j) = a(subsets[p][i], subsets[q][j]);
            out(p, q) = sub.determinant();
        }
    return out;
}

// Coordinates of v_1 ^ ... ^ v_k (columns of v) in the colex basis.
inline Eigen::VectorXd wedge_vector(const Eigen::MatrixXd& v) {
    const std::size_t n = static_cast<std::size_t>(v.rows()), k = static_cast<std::size_t>(v.cols());
    const auto subsets = subsets_colex(n, k);
    Eigen::VectorXd out(subsets.size());
    Eigen::MatrixXd sub(k, k);
    for (std::size_t p = 0; p < subsets.size(); ++p) {
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) sub(i, j) = v(subsets[p][i], j);
        out(p) = sub.determinant();
    }
    return out;
}

using DegreeGrid = std::vector<std::vector<DegreeValue>>;

inline DegreeGrid degree_matrix(const MatrixCurve& phi) {
    DegreeGrid out(phi.n(), std::vector<DegreeValue>(phi.n()));
    for (std::size_t i = 0; i < phi.n(); ++i)
        for (std::size_t j = 0; j < phi.n(); ++j) out[i][j] = ps_degree(phi(i, j));
    return out;
}

// ---------------------------------------------------------------------------
// Degrees over linear spans

// min over g in span(basis) of deg(f + g).
inline DegreeValue min_degree_over_span(const PowerSum& f, const std::vector<PowerSum>& basis) {
    // Echelon form: distinct leading exponents, strictly decreasing.
    std::vector<PowerSum> echelon;
    DegreeValue lost = DegreeValue::neg_inf(); // elements whose remainder fell below their truncation
    for (PowerSum b : basis) {
        while (true) {
            if (b.empty()) {
                if (!b.is_exact()) lost = max(lost, b.trunc());
                break;
            }
            auto it = std::find_if(echelon.begin(), echelon.end(),
                                   [&](const PowerSum& e) { return e.degree() == b.degree(); });
            if (it == echelon.end()) {
                echelon.push_back(b);
                std::sort(echelon.begin(), echelon.end(),
                          [](const PowerSum& x, const PowerSum& y) { return x.degree() > y.degree(); });
                break;
            }
            b = b - (b.leading_coefficient() / it->leading_coefficient()) * *it;
        }
    }
    PowerSum g = f;
    while (true) {
        if (g.empty()) {
            if (g.is_exact() && lost.is_neg_inf()) return DegreeValue::neg_inf();
            throw truncation_error("span reduction exhausted the known terms (truncation order " +
                                   max(g.trunc(), lost).str() + ")");
        }
        auto it = std::find_if(echelon.begin(), echelon.end(),
                               [&](const PowerSum& e) { return e.degree() == g.degree(); });
        if (it == echelon.end()) {
            if (g.degree() <= lost)
                throw truncation_error("span reduction reached degree " + g.degree().str() +
                                       " where a basis element is only known to order " + lost.str());
            return g.degree();
        }
        g = g - (g.leading_coefficient() / it->leading_coefficient()) * *it;
    }
}

// ---------------------------------------------------------------------------
// The upper-triangular example family
//
//   [ f0  f1  ...  fn   ]
//   [     1/h1          ]
//   [          ...      ]
//   [              1/hn ]

struct ExampleFamily {
    std::size_t n = 0;
    std::vector<PowerSum> f; // f0..fn
    std::vector<PowerSum> h; // h1..hn
};

inline std::optional<ExampleFamily> extract_example_family(const MatrixCurve& phi, std::int64_t depth = kDefaultDepth) {
    const std::size_t dim = phi.n();
    for (std::size_t i = 1; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            if (i != j && !phi(i, j).is_zero()) return std::nullopt;
    ExampleFamily fam;
    fam.n = dim - 1;
    for (std::size_t j = 0; j < dim; ++j) fam.f.push_back(phi(0, j));
    for (std::size_t i = 1; i < dim; ++i) {
        const PowerSum& d = phi(i, i);
        if (d.empty()) return std::nullopt;
        fam.h.push_back(ps_inv_clamped(d, -d.degree().value() - Exponent(depth)));
    }
    return fam;
}

inline MatrixCurve example_curve(const ExampleFamily& fam, std::int64_t depth = kDefaultDepth) {
    MatrixCurve m(fam.n + 1);
    for (std::size_t j = 0; j <= fam.n; ++j) m(0, j) = fam.f[j];
    for (std::size_t i = 1; i <= fam.n; ++i) {
        const PowerSum& h = fam.h[i - 1];
        m(i, i) = ps_inv_clamped(h, -h.degree().value() - Exponent(depth));
    }
    m.set_unimodular(determinant_is_one(curve_det(m)));
    return m;
}

struct ExampleConditionsReport {
    bool pass = false;
    std::vector<std::string> violated;
    bool numeric_fallback = false;
    std::string certificate; // set on pass
};

inline ExampleConditionsReport check_example_conditions(const ExampleFamily& fam) {
    ExampleConditionsReport rep;
    const std::size_t n = fam.n;
    if (fam.f.size() != n + 1 || fam.h.size() != n || n < 1) {
        rep.violated.push_back("shape: expected f0..fn and h1..hn with n >= 1");
        return rep;
    }
    const Exponent nn(static_cast<std::int64_t>(n));

    // condition 1: f0 = h1...hn
    PowerSum prod = PowerSum::constant(1.0);
    for (const auto& h : fam.h) prod = prod * h;
    const PowerSum diff = fam.f[0] - prod;
    const double scale = std::max(fam.f[0].max_abs_coefficient(), prod.max_abs_coefficient());
    bool equal = std::all_of(diff.terms().begin(), diff.terms().end(),
                             [&](const auto& t) { return std::abs(t.second) <= 1e-10 * std::max(1.0, scale); });
    if (equal && !diff.is_exact()) {
        rep.numeric_fallback = true;
        for (double t : {10.0, 100.0, 1000.0}) {
            EvalResult a = ps_eval_bounded(fam.f[0], t), b = ps_eval_bounded(prod, t);
            if (std::abs(a.value - b.value) > a.error_bound + b.error_bound + 1e-9 * std::abs(a.value)) equal = false;
        }
    }
    if (!equal) rep.violated.push_back("condition 1: f0 differs from h1*...*hn (difference " + diff.str() + ")");
    if (fam.f[0].degree() != DegreeValue(nn))
        rep.violated.push_back("condition 1: deg f0 = " + fam.f[0].degree().str() + " but n = " + nn.str());
    for (std::size_t i = 0; i < n; ++i) {
        const DegreeValue d = fam.h[i].degree();
        if (!(d > DegreeValue(Exponent(0))))
            rep.violated.push_back("condition 1: deg h" + std::to_string(i + 1) + " = " + d.str() + " is not positive");
        if (i > 0 && fam.h[i - 1].degree() < d)
            rep.violated.push_back("condition 1: deg h" + std::to_string(i) + " < deg h" + std::to_string(i + 1));
    }

    // condition 2: deg(f0 + g) >= n on span(f1..fn)
    try {
        std::vector<PowerSum> span(fam.f.begin() + 1, fam.f.end());
        const DegreeValue m = min_degree_over_span(fam.f[0], span);
        if (m < DegreeValue(nn))
            rep.violated.push_back("condition 2: min deg(f0 + g) over span(f1..fn) = " + m.str() + " < " + nn.str());
    } catch (const truncation_error& e) {
        rep.violated.push_back(std::string("condition 2: not certified: ") + e.what());
    }

    // condition 3: deg(f_i + g) > n - i on span(f_{i+1}..f_n)
    for (std::size_t i = 1; i <= n; ++i) {
        const Exponent bound = nn - Exponent(static_cast<std::int64_t>(i));
        try {
            std::vector<PowerSum> span(fam.f.begin() + static_cast<std::ptrdiff_t>(i) + 1, fam.f.end());
            const DegreeValue m = min_degree_over_span(fam.f[i], span);
            if (!(m > DegreeValue(bound)))
                rep.violated.push_back("condition 3 (i=" + std::to_string(i) + "): min deg(f" + std::to_string(i) +
                                       " + g) = " + m.str() + " <= " + bound.str());
        } catch (const truncation_error& e) {
            rep.violated.push_back("condition 3 (i=" + std::to_string(i) + "): not certified: " + e.what());
        }
    }

    rep.pass = rep.violated.empty();
    if (rep.pass) rep.certificate = "H_phi = SL(" + std::to_string(n + 1) + ",R)";
    return rep;
}

// ---------------------------------------------------------------------------
// Wedge scans and the non-contraction verdict

enum class WedgeVerdict { Contracts, Bounded, Diverges, Indeterminate };

inline const char* to_string(WedgeVerdict v) {
    switch (v) {
    case WedgeVerdict::Contracts: return "contracts";
    case WedgeVerdict::Bounded: return "bounded";
    case WedgeVerdict::Diverges: return "diverges";
    case WedgeVerdict::Indeterminate: return "indeterminate";
    }
    return "?";
}

struct WedgeScanEntry {
    std::size_t k;
    std::vector<std::size_t> subset;
    WedgeVerdict verdict;
    DegreeValue degree; // max degree over the coefficient series of phi(t).e_I
};

// Verdict for a vector of coefficient series.
inline std::pair<WedgeVerdict, DegreeValue> classify_coefficients(const std::vector<PowerSum>& coeffs) {
    DegreeValue known = DegreeValue::neg_inf(), bound = DegreeValue::neg_inf();
    for (const auto& c : coeffs) {
        known = max(known, c.degree());
        bound = max(bound, c.degree_bound());
    }
    // the true max degree lies in [known, bound]; decide only when both sides agree
    const DegreeValue zero(Exponent(0));
    if (known > zero) return {WedgeVerdict::Diverges, known};
    if (known == zero && bound == zero) return {WedgeVerdict::Bounded, known};
    if (bound < zero) return {WedgeVerdict::Contracts, known};
    if (known == zero && bound <= zero) return {WedgeVerdict::Bounded, known};
    return {WedgeVerdict::Indeterminate, known};
}

inline std::vector<WedgeScanEntry> standard_wedge_scan(const MatrixCurve& phi) {
    if (!phi.unimodular()) throw invalid_input("wedge scan requires a curve with determinant one");
    std::vector<WedgeScanEntry> out;
    for (std::size_t k = 1; k < phi.n(); ++k) {
        const MatrixCurve w = wedge_rep(phi, k);
        const auto subsets = subsets_colex(phi.n(), k);
        for (std::size_t col = 0; col < subsets.size(); ++col) {
            std::vector<PowerSum> coeffs;
            for (std::size_t row = 0; row < subsets.size(); ++row) coeffs.push_back(w(row, col));
            auto [verdict, degree] = classify_coefficients(coeffs);
            out.push_back({k, subsets[col], verdict, degree});
        }
    }
    return out;
}

enum class NonContraction { WitnessFound, NoWitness, CertifiedFamily };

inline const char* to_string(NonContraction v) {
    switch (v) {
    case NonContraction::WitnessFound: return "contraction witness found";
    case NonContraction::NoWitness: return "no witness among standard wedges and random decomposables";
    case NonContraction::CertifiedFamily: return "certified for the upper-triangular example family";
    }
    return "?";
}

struct NonContractionReport {
    NonContraction verdict = NonContraction::NoWitness;
    std::string witness; // human-readable description of the contracted vector
    std::size_t random_checked = 0;
    std::uint64_t seed = 0;
};

inline NonContractionReport non_contraction_verdict(const MatrixCurve& phi, std::uint64_t seed,
                                                    std::size_t random_count = 200) {
    NonContractionReport rep;
    rep.seed = seed;
    const auto scan = standard_wedge_scan(phi);
    for (const auto& e : scan) {
        if (e.verdict == WedgeVerdict::Contracts) {
            rep.verdict = NonContraction::WitnessFound;
            rep.witness = "e_" + subset_str(e.subset) + " (k=" + std::to_string(e.k) + ", degree " + e.degree.str() + ")";
            break;
        }
    }
    std::optional<ExampleConditionsReport> cert;
    if (auto fam = extract_example_family(phi)) cert = check_example_conditions(*fam);
    if (cert && cert->pass) {
        if (rep.verdict == NonContraction::WitnessFound)
            throw consistency_error("example conditions hold but " + rep.witness + " contracts");
        rep.verdict = NonContraction::CertifiedFamily;
        return rep;
    }
    if (rep.verdict == NonContraction::WitnessFound) return rep;

    const std::size_t dim = phi.n();
    const CounterRng rng(seed);
    std::vector<MatrixCurve> wedges;
    for (std::size_t k = 1; k < dim; ++k) wedges.push_back(wedge_rep(phi, k));
    for (std::size_t s = 0; s < random_count; ++s) {
        const std::size_t k = 1 + s % (dim - 1);
        Eigen::MatrixXd v(dim, k);
        std::uint64_t idx = 0;
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < k; ++j) v(i, j) = static_cast<double>(rng.integer(s, idx++, -2, 2));
        const Eigen::VectorXd w = wedge_vector(v);
        if (w.cwiseAbs().maxCoeff() == 0.0) continue;
        ++rep.random_checked;
        const MatrixCurve& W = wedges[k - 1];
        std::vector<PowerSum> coeffs;
        for (std::size_t row = 0; row < W.n(); ++row) {
            PowerSum acc;
            for (std::size_t col = 0; col < W.n(); ++col)
                if (w(col) != 0.0) acc = acc + w(col) * W(row, col);
            coeffs.push_back(acc);
        }
        if (classify_coefficients(coeffs).first == WedgeVerdict::Contracts) {
            rep.verdict = NonContraction::WitnessFound;
            std::string desc = "random decomposable #" + std::to_string(s) + " (k=" + std::to_string(k) + ")";
            rep.witness = desc;
            return rep;
        }
    }
    return rep;
}

} // namespace ominlab
