#pragma once

// Euclidean lattices g Z^n: LLL reduction, exact shortest vectors by enumeration,
// and the SL(2) toolkit (fundamental-domain reduction, Haar sampling).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace ominlab {

inline constexpr std::size_t kEnumerationCap = 6;
inline constexpr double kLllDelta = 0.99;

// Lattice spanned by the columns of `basis`.
class LatticeBasis {
public:
    LatticeBasis() = default;

    explicit LatticeBasis(Eigen::MatrixXd basis, bool unimodular = false)
        : basis_(std::move(basis)), unimodular_(unimodular) {
        if (basis_.rows() != basis_.cols() || basis_.rows() == 0)
            throw invalid_input("a lattice basis must be a nonempty square matrix");
        if (!basis_.allFinite()) throw invalid_input("lattice basis has non-finite entries");
        covolume_ = std::abs(basis_.determinant());
        double scale = 1.0;
        for (Eigen::Index j = 0; j < basis_.cols(); ++j) scale *= basis_.col(j).norm();
        if (unimodular_) {
            // long orbits produce very skewed frames, so only the covolume is checked
            if (std::abs(covolume_ - 1.0) > 1e-9)
                throw invalid_input("lattice flagged unimodular has covolume " + std::to_string(covolume_));
        } else if (!(covolume_ > 1e-13 * scale)) {
            throw invalid_input("lattice basis vectors are linearly dependent");
        }
    }

    // Rows of `vectors` are the basis vectors.
    static LatticeBasis from_rows(const Eigen::MatrixXd& vectors, bool unimodular = false) {
        return LatticeBasis(vectors.transpose(), unimodular);
    }

    static LatticeBasis standard(std::size_t n) {
        return LatticeBasis(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)), true);
    }

    std::size_t n() const { return static_cast<std::size_t>(basis_.cols()); }
    const Eigen::MatrixXd& matrix() const { return basis_; }
    Eigen::VectorXd vector(std::size_t i) const { return basis_.col(static_cast<Eigen::Index>(i)); }
    double covolume() const { return covolume_; }
    bool unimodular() const { return unimodular_; }

    // g L for a linear map g
    LatticeBasis transformed(const Eigen::MatrixXd& g) const { return LatticeBasis(g * basis_, unimodular_); }

private:
    Eigen::MatrixXd basis_;
    double covolume_ = 0.0;
    bool unimodular_ = false;
};

struct LllResult {
    LatticeBasis basis;
    Eigen::MatrixXd transform; // integer, det +-1, reduced = input * transform
};

namespace detail {

struct GramSchmidt {
    Eigen::MatrixXd mu;
    Eigen::VectorXd norms2;
};

inline GramSchmidt gram_schmidt(const Eigen::MatrixXd& b) {
    const Eigen::Index n = b.cols();
    GramSchmidt gs{Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n)};
    Eigen::MatrixXd star = b;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            gs.mu(i, j) = b.col(i).dot(star.col(j)) / gs.norms2(j);
            star.col(i) -= gs.mu(i, j) * star.col(j);
        }
        gs.norms2(i) = star.col(i).squaredNorm();
    }
    return gs;
}

} // namespace detail

inline LllResult lll_reduce_with_transform(const LatticeBasis& L, double delta = kLllDelta) {
    Eigen::MatrixXd b = L.matrix();
    const Eigen::Index n = b.cols();
    Eigen::MatrixXd U = Eigen::MatrixXd::Identity(n, n);
    detail::GramSchmidt gs = detail::gram_schmidt(b);
    Eigen::Index k = 1;
    std::size_t guard = 0;
    while (k < n) {
        if (++guard > 100000) throw numerical_error("LLL did not terminate within 100000 iterations");
        for (Eigen::Index j = k - 1; j >= 0; --j) {
            const double q = std::round(gs.mu(k, j));
            if (q != 0.0) {
                b.col(k) -= q * b.col(j);
                U.col(k) -= q * U.col(j);
                gs = detail::gram_schmidt(b);
            }
        }
        if (gs.norms2(k) >= (delta - gs.mu(k, k - 1) * gs.mu(k, k - 1)) * gs.norms2(k - 1)) {
            ++k;
        } else {
            b.col(k).swap(b.col(k - 1));
            U.col(k).swap(U.col(k - 1));
            gs = detail::gram_schmidt(b);
            k = std::max<Eigen::Index>(k - 1, 1);
        }
    }
    return {LatticeBasis(b, L.unimodular()), U};
}

inline LatticeBasis lll_reduce(const LatticeBasis& L, double delta = kLllDelta) {
    return lll_reduce_with_transform(L, delta).basis;
}

struct ShortestVector {
    Eigen::VectorXd vector;       // ambient coordinates
    Eigen::VectorXd coefficients; // integer coordinates in the input basis
    double length = 0.0;
};

namespace detail {

// Fincke-Pohst: every nonzero integer x with |b x|^2 <= radius2, as coordinates.
inline void enumerate(const GramSchmidt& gs, Eigen::Index level, Eigen::VectorXd& x, double partial, double radius2,
                      std::vector<Eigen::VectorXd>& out) {
    const Eigen::Index n = x.size();
    double center = 0.0;
    for (Eigen::Index j = level + 1; j < n; ++j) center -= gs.mu(j, level) * x(j);
    const double room = radius2 - partial;
    if (room < 0.0) return;
    const double half = std::sqrt(room / gs.norms2(level));
    const double lo = std::ceil(center - half - 1e-12), hi = std::floor(center + half + 1e-12);
    for (double v = lo; v <= hi; v += 1.0) {
        x(level) = v;
        const double d = (v - center) * (v - center) * gs.norms2(level);
        if (partial + d > radius2 * (1.0 + 1e-12)) continue;
        if (level == 0) {
            if (x.cwiseAbs().maxCoeff() > 0.0) out.push_back(x);
        } else {
            enumerate(gs, level - 1, x, partial + d, radius2, out);
        }
    }
    x(level) = 0.0;
}

inline bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a(i) < b(i)) return true;
        if (a(i) > b(i)) return false;
    }
    return false;
}

} // namespace detail

// Exact lambda_1. Among vectors whose squared length is within a relative 1e-12 of
// the minimum, the one whose input-basis coordinates are lexicographically smallest
// after fixing the sign of the first nonzero coordinate to be positive is returned.
inline ShortestVector shortest_vector(const LatticeBasis& L) {
    if (L.n() > kEnumerationCap)
        throw invalid_input("exact enumeration is capped at dimension " + std::to_string(kEnumerationCap) + ", got " +
                            std::to_string(L.n()));
    const LllResult red = lll_reduce_with_transform(L);
    const Eigen::MatrixXd& b = red.basis.matrix();
    const detail::GramSchmidt gs = detail::gram_schmidt(b);
    const Eigen::Index n = b.cols();
    double radius2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) radius2 = std::min(radius2, b.col(j).squaredNorm());
    std::vector<Eigen::VectorXd> found;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    detail::enumerate(gs, n - 1, x, 0.0, radius2, found);
    if (found.empty()) throw numerical_error("enumeration found no lattice vector within the basis radius");

    double best2 = std::numeric_limits<double>::infinity();
    std::vector<double> len2(found.size());
    for (std::size_t i = 0; i < found.size(); ++i) {
        len2[i] = (b * found[i]).squaredNorm();
        best2 = std::min(best2, len2[i]);
    }
    ShortestVector sv;
    bool have = false;
    for (std::size_t i = 0; i < found.size(); ++i) {
        if (len2[i] > best2 * (1.0 + 1e-12)) continue;
        Eigen::VectorXd coeff = red.transform * found[i];
        for (Eigen::Index j = 0; j < n; ++j)
            if (coeff(j) != 0.0) {
                if (coeff(j) < 0.0) coeff = -coeff;
                break;
            }
        if (!have || detail::lex_less(coeff, sv.coefficients)) {
            sv.coefficients = coeff;
            have = true;
        }
    }
    sv.vector = L.matrix() * sv.coefficients;
    sv.length = std::sqrt(best2);
    return sv;
}

inline double systole(const LatticeBasis& L) { return shortest_vector(L).length; }

// ---------------------------------------------------------------------------
// SL(2): the modular surface

struct UpperHalfPoint {
    double x = 0.0;
    double y = 1.0;
};

inline bool in_fundamental_domain(const UpperHalfPoint& p) {
    return p.y > 0.0 && std::abs(p.x) <= 0.5 && p.x * p.x + p.y * p.y >= 1.0 - 1e-12;
}

// Moves tau into |x| <= 1/2, |tau| >= 1. Points already there are returned unchanged.
inline UpperHalfPoint reduce_tau(UpperHalfPoint p) {
    if (!(p.y > 0.0) || !std::isfinite(p.x) || !std::isfinite(p.y))
        throw invalid_input("tau must lie in the upper half plane");
    for (int it = 0; it < 10000; ++it) {
        if (std::abs(p.x) > 0.5) p.x -= std::round(p.x);
        const double r2 = p.x * p.x + p.y * p.y;
        if (r2 >= 1.0 - 1e-12) return p;
        p.x = -p.x / r2;
        p.y = p.y / r2;
    }
    throw numerical_error("fundamental-domain reduction did not terminate");
}

// Point of the modular surface for a 2-dimensional lattice, forgetting rotation and scale.
inline UpperHalfPoint tau_of(const Eigen::Matrix2d& basis) {
    const std::complex<double> z1(basis(0, 0), basis(1, 0)), z2(basis(0, 1), basis(1, 1));
    if (std::abs(z1) == 0.0) throw invalid_input("degenerate lattice basis");
    std::complex<double> tau = z2 / z1;
    if (tau.imag() == 0.0) throw invalid_input("degenerate lattice basis");
    if (tau.imag() < 0.0) tau = std::conj(tau); // orientation-reversing basis
    return {tau.real(), tau.imag()};
}

inline UpperHalfPoint reduce_sl2(const LatticeBasis& L) {
    if (L.n() != 2) throw invalid_input("reduce_sl2 needs a 2-dimensional lattice");
    return reduce_tau(tau_of(L.matrix()));
}

// Unimodular lattice whose point on the modular surface is tau.
inline LatticeBasis lattice_of(const UpperHalfPoint& p) {
    const double s = std::sqrt(p.y);
    Eigen::MatrixXd b(2, 2);
    b << 1.0 / s, p.x / s, 0.0, s;
    return LatticeBasis(b, true);
}

// Samples of the normalized measure dx dy / y^2 on the fundamental domain: y has
// density proportional to y^-2 on [sqrt(3)/2, inf) by inversion, x is uniform, and
// points below the unit circle are rejected. Sample i uses counter stream i only.
inline std::vector<UpperHalfPoint> haar_sample_sl2(std::uint64_t seed, std::size_t count, unsigned threads = 1) {
    if (count == 0) throw invalid_input("haar_sample_sl2 needs count >= 1");
    const CounterRng rng(seed);
    const double y0 = std::sqrt(3.0) / 2.0;
    std::vector<UpperHalfPoint> out(count);
    parallel_for(count, threads, [&](std::size_t i) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            const double x = rng.uniform(i, 2 * attempt) - 0.5;
            const double y = y0 / (1.0 - rng.uniform(i, 2 * attempt + 1));
            if (x * x + y * y >= 1.0) {
                out[i] = {x, y};
                return;
            }
        }
    });
    return out;
}

} // namespace ominlab
