#pragma once

// Scalar N-function calculus for the (p,delta) family
//
//   phi'(t) = (delta + t)^(p-2) t,   phi(t) = int_0^t phi'(s) ds,
//
// together with the associated vector maps
//
//   A(a)  = (delta + |a|)^(p-2) a,
//   F(a)  = (delta + |a|)^((p-2)/2) a,
//   F*(z) = (delta^(p-1) + |z|)^((p'-2)/2) z,
//
// their inverses/derivatives, and the shifted functions phi_a. The shift
// is realized as a parameter change: phi_a for (p,delta) coincides with
// phi for (p, delta+a), since phi_a'(s) = (delta+a+s)^(p-2) s.

#include <cmath>
#include <limits>
#include <stdexcept>

namespace crfem {

/// Exponent/shift pair of the nonlinear operator. p > 1, delta >= 0.
struct PDelta {
    double p;
    double delta;

    PDelta(double p_, double delta_) : p(p_), delta(delta_) {
        if (!(p > 1.0)) throw std::invalid_argument("PDelta: requires p > 1");
        if (!(delta >= 0.0)) throw std::invalid_argument("PDelta: requires delta >= 0");
    }

    /// Conjugate exponent p' = p/(p-1).
    double p_conj() const { return p / (p - 1.0); }

    /// Parameters of the a-shifted function phi_a (same family, shifted delta).
    PDelta shifted(double a) const { return PDelta(p, delta + a); }
};

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 b) const { return {x + b.x, y + b.y}; }
    Vec2 operator-(Vec2 b) const { return {x - b.x, y - b.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double s) const { return {s * x, s * y}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    double dot(Vec2 b) const { return x * b.x + y * b.y; }
    double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

/// Symmetric 2x2 matrix, stored by entries.
struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    Vec2 apply(Vec2 v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
    static Mat2 identity(double s = 1.0) { return {s, 0.0, 0.0, s}; }
};

/// phi'(t) = (delta+t)^(p-2) t. Continuous extension phi'(0) = 0.
inline double phi_prime(const PDelta& pd, double t) {
    if (t < 0.0) throw std::domain_error("phi_prime: t < 0");
    if (t == 0.0) return 0.0;
    return std::pow(pd.delta + t, pd.p - 2.0) * t;
}

/// phi(t) via the closed form obtained from the substitution u = delta+s:
///   phi(t) = (delta+t)^p/p - delta (delta+t)^(p-1)/(p-1) - delta^p (1/p - 1/(p-1)).
inline double phi(const PDelta& pd, double t) {
    if (t < 0.0) throw std::domain_error("phi: t < 0");
    if (t == 0.0) return 0.0;
    const double p = pd.p, d = pd.delta;
    if (d == 0.0) return std::pow(t, p) / p;
    const double dt = d + t;
    return std::pow(dt, p) / p - d * std::pow(dt, p - 1.0) / (p - 1.0)
           - std::pow(d, p) * (1.0 / p - 1.0 / (p - 1.0));
}

/// Inverse of phi' on [0,inf): the unique t >= 0 with phi'(t) = s.
/// Bisection bracket followed by Newton polish; relative tolerance 1e-13.
inline double phi_prime_inv(const PDelta& pd, double s) {
    if (s < 0.0) throw std::domain_error("phi_prime_inv: s < 0");
    if (s == 0.0) return 0.0;
    const double p = pd.p, d = pd.delta;
    if (d == 0.0) return std::pow(s, 1.0 / (p - 1.0));

    double lo = 0.0;
    double hi = std::pow(s, 1.0 / (p - 1.0)) + s + 1.0;
    while (phi_prime(pd, hi) < s) hi *= 2.0;

    for (int i = 0; i < 80 && (hi - lo) > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (phi_prime(pd, mid) < s ? lo : hi) = mid;
    }
    double t = 0.5 * (lo + hi);
    // Newton on phi'(t) - s; the derivative (delta+t)^(p-3)(delta+(p-1)t) is positive.
    for (int i = 0; i < 8; ++i) {
        const double f = phi_prime(pd, t) - s;
        const double df = std::pow(d + t, p - 3.0) * (d + (p - 1.0) * t);
        const double step = f / df;
        const double tn = t - step;
        if (!(tn > 0.0)) break;
        t = tn;
        if (std::abs(step) <= 1e-15 * t) break;
    }
    return t;
}

/// Fenchel conjugate phi*(s) = s t - phi(t) at the maximizer t = (phi')^{-1}(s).
inline double phi_conj(const PDelta& pd, double s) {
    if (s < 0.0) throw std::domain_error("phi_conj: s < 0");
    if (s == 0.0) return 0.0;
    const double t = phi_prime_inv(pd, s);
    return s * t - phi(pd, t);
}

/// Shifted N-function phi_a(t); equals phi of the (p, delta+a) member.
inline double phi_shifted(const PDelta& pd, double a, double t) {
    if (a < 0.0) throw std::domain_error("phi_shifted: a < 0");
    return phi(pd.shifted(a), t);
}

/// Conjugate of the shifted N-function, (phi_a)*(s).
inline double phi_shifted_conj(const PDelta& pd, double a, double s) {
    if (a < 0.0) throw std::domain_error("phi_shifted_conj: a < 0");
    return phi_conj(pd.shifted(a), s);
}

/// A(a) = (delta+|a|)^(p-2) a, with A(0) = 0.
inline Vec2 op_a(const PDelta& pd, Vec2 a) {
    const double r = a.norm();
    if (r == 0.0) return {0.0, 0.0};
    return std::pow(pd.delta + r, pd.p - 2.0) * a;
}

/// Inverse of A: direction is kept, the radius solves (delta+r)^(p-2) r = |z|.
inline Vec2 op_a_inv(const PDelta& pd, Vec2 z) {
    const double s = z.norm();
    if (s == 0.0) return {0.0, 0.0};
    return (phi_prime_inv(pd, s) / s) * z;
}

/// Jacobian of A:
///   (delta+|a|)^(p-2) I + (p-2)(delta+|a|)^(p-3) (a (x) a)/|a|.
/// At a = 0 the tensor part vanishes by continuous extension; the case
/// p < 2, delta = 0, a = 0 is genuinely singular and raises.
inline Mat2 op_da(const PDelta& pd, Vec2 a) {
    const double p = pd.p, d = pd.delta;
    const double r = a.norm();
    if (r == 0.0) {
        if (p == 2.0) return Mat2::identity();
        if (d > 0.0) return Mat2::identity(std::pow(d, p - 2.0));
        if (p > 2.0) return Mat2::identity(0.0);
        throw std::domain_error("op_da: singular at a = 0 for p < 2, delta = 0");
    }
    const double g = std::pow(d + r, p - 2.0);
    const double c = (p - 2.0) * std::pow(d + r, p - 3.0) / r;
    return {g + c * a.x * a.x, c * a.x * a.y, c * a.x * a.y, g + c * a.y * a.y};
}

/// F(a) = (delta+|a|)^((p-2)/2) a.
inline Vec2 map_f(const PDelta& pd, Vec2 a) {
    const double r = a.norm();
    if (r == 0.0) return {0.0, 0.0};
    return std::pow(pd.delta + r, 0.5 * (pd.p - 2.0)) * a;
}

/// F*(z) = (delta^(p-1)+|z|)^((p'-2)/2) z.
inline Vec2 map_f_star(const PDelta& pd, Vec2 z) {
    const double s = z.norm();
    if (s == 0.0) return {0.0, 0.0};
    const double dstar = pd.delta == 0.0 ? 0.0 : std::pow(pd.delta, pd.p - 1.0);
    return std::pow(dstar + s, 0.5 * (pd.p_conj() - 2.0)) * z;
}

} // namespace crfem
