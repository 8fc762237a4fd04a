#pragma once

// Test-only oracles, independent of the library's evaluation paths:
// quadrature of defining integrals, grid maximization for conjugates, the
// shifted conjugate (phi*)_a, and sampling helpers.

#include "crfem/nfun.hpp"

#include <cmath>
#include <functional>
#include <random>

namespace oracle {

// Composite-Simpson quadrature with interval halving until two successive
// refinements agree to `tol` (relative).
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    auto composite = [&](int n) {
        const double h = (b - a) / n;
        double sum = f(a) + f(b);
        for (int i = 1; i < n; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
        return sum * h / 3.0;
    };
    double prev = composite(8);
    for (int n = 16; n <= (1 << 22); n *= 2) {
        const double cur = composite(n);
        if (std::abs(cur - prev) <= tol * (std::abs(cur) + 1e-300)) return cur;
        prev = cur;
    }
    return prev;
}

// phi(t) as the defining integral of phi'.
inline double phi_by_quadrature(const crfem::PDelta& pd, double t, double tol = 1e-12) {
    return adaptive_simpson([&](double s) { return crfem::phi_prime(pd, s); }, 0.0, t, tol);
}

// phi_a(t) as the defining integral phi'(a+s) s/(a+s).
inline double phi_shifted_by_quadrature(const crfem::PDelta& pd, double a, double t, double tol = 1e-12) {
    return adaptive_simpson(
        [&](double s) { return s == 0.0 && a == 0.0 ? 0.0 : crfem::phi_prime(pd, a + s) * s / (a + s); },
        0.0, t, tol);
}

// phi*(s) as a grid maximization of s t - phi(t); the maximizer lies below
// any T with phi'(T) >= s.
inline double conj_by_grid(const crfem::PDelta& pd, double s, long npoints = 1000000) {
    double hi = std::pow(s, 1.0 / (pd.p - 1.0)) + s + 1.0;
    while (crfem::phi_prime(pd, hi) < s) hi *= 2.0;
    double best = 0.0;
    for (long i = 0; i <= npoints; ++i) {
        const double t = hi * double(i) / double(npoints);
        best = std::max(best, s * t - crfem::phi(pd, t));
    }
    return best;
}

// Conjugate of the shifted function, (phi_a)*(s), as grid maximization.
inline double conj_shifted_by_grid(const crfem::PDelta& pd, double a, double s, long npoints = 1000000) {
    return conj_by_grid(pd.shifted(a), s, npoints);
}

// Shift of the conjugate, (phi*)_a(t) = int_0^t (phi*)'(a+s) s/(a+s) ds with
// (phi*)' = (phi')^{-1}. For delta = 0 the conjugate is the (p', 0) family
// member, so its shift has the closed form; otherwise composite Gauss.
inline double conj_then_shift(const crfem::PDelta& pd, double a, double t) {
    if (pd.delta == 0.0) return crfem::phi(crfem::PDelta(pd.p_conj(), a), t);
    if (t == 0.0) return 0.0;
    // 4 panels x 20-point Gauss-Legendre; the integrand is analytic
    static const double gx[10] = {0.0765265211334973, 0.2277858511416451, 0.3737060887154195,
                                  0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
                                  0.8391169718222188, 0.9122344282513259, 0.9639719272779138,
                                  0.9931285991850949};
    static const double gw[10] = {0.1527533871307258, 0.1491729864726037, 0.1420961093183820,
                                  0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
                                  0.0832767415767048, 0.0626720483341091, 0.0406014298003869,
                                  0.0176140071391521};
    auto integrand = [&](double s) {
        return s == 0.0 && a == 0.0 ? 0.0 : crfem::phi_prime_inv(pd, a + s) * s / (a + s);
    };
    double total = 0.0;
    const int panels = 4;
    for (int k = 0; k < panels; ++k) {
        const double lo = t * k / panels, hi = t * (k + 1) / panels;
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (int i = 0; i < 10; ++i)
            total += half * gw[i] * (integrand(mid - half * gx[i]) + integrand(mid + half * gx[i]));
    }
    return total;
}

struct Rng {
    std::mt19937 gen;
    explicit Rng(unsigned seed) : gen(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen);
    }

    // uniform direction, radius uniform in [0, rmax]
    crfem::Vec2 vec_in_ball(double rmax) {
        const double ang = uniform(0.0, 2.0 * 3.14159265358979323846);
        const double r = uniform(0.0, rmax);
        return {r * std::cos(ang), r * std::sin(ang)};
    }
};

} // namespace oracle
