#pragma once

// Manufactured benchmark problems and exact-error quadrature.
//
//   square_alpha:  u(x) = (1-x1^2)(1-x2^2) |x|^alpha       on (-1,1)^2,
//   lshape_sigma:  u(r,t) = (1-x1^2)(1-x2^2) r^sigma sin(2t/3)
//                  on (-1,1)^2 \ [0,1]x[-1,0],  sigma = 1.01 - 1/p,
//
// with f = -div A(grad u) evaluated through the chain rule from the
// analytic gradient and Hessian. Error integrands are only mildly singular
// at the origin; elements touching it get one extra subdivision level in
// the quadrature (of the rule, not of the mesh).

#include "crfem/fespace.hpp"
#include "crfem/mesh.hpp"
#include "crfem/nfun.hpp"
#include "crfem/quadrature.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace crfem {

struct ManufacturedCase {
    std::string id;
    PDelta pd;
    std::function<double(Vec2)> u;
    std::function<Vec2(Vec2)> grad_u;
    std::function<Mat2(Vec2)> hess_u;
    std::function<double(Vec2)> f; // -div A(grad u)

    Triangulation initial_mesh() const {
        if (id == "square_alpha") return build_square_mesh(2); // h0 = 1/sqrt(2)
        return build_lshape_mesh();
    }
};

namespace detail {

inline double cutoff(Vec2 x) { return (1.0 - x.x * x.x) * (1.0 - x.y * x.y); }

inline Vec2 cutoff_grad(Vec2 x) {
    return {-2.0 * x.x * (1.0 - x.y * x.y), -2.0 * x.y * (1.0 - x.x * x.x)};
}

inline Mat2 cutoff_hess(Vec2 x) {
    const double mixed = 4.0 * x.x * x.y;
    return {-2.0 * (1.0 - x.y * x.y), mixed, mixed, -2.0 * (1.0 - x.x * x.x)};
}

// -div A(grad u) from g = grad u and H = hess u:
//   (delta+|g|)^(p-2) tr H + (p-2)(delta+|g|)^(p-3) (g.Hg)/|g|.
inline double source_from_derivatives(const PDelta& pd, Vec2 g, Mat2 h) {
    const double r = g.norm();
    const double trace = h.a11 + h.a22;
    double val = std::pow(pd.delta + r, pd.p - 2.0) * trace;
    if (r > 0.0)
        val += (pd.p - 2.0) * std::pow(pd.delta + r, pd.p - 3.0) * g.dot(h.apply(g)) / r;
    return -val;
}

struct ScalarDerivatives {
    double value;
    Vec2 grad;
    Mat2 hess;
};

// d(x) * w(x) with product rule
inline ScalarDerivatives with_cutoff(Vec2 x, double w, Vec2 gw, Mat2 hw) {
    const double d = cutoff(x);
    const Vec2 gd = cutoff_grad(x);
    const Mat2 hd = cutoff_hess(x);
    ScalarDerivatives out;
    out.value = d * w;
    out.grad = w * gd + d * gw;
    out.hess = {w * hd.a11 + gd.x * gw.x + gw.x * gd.x + d * hw.a11,
                w * hd.a12 + gd.x * gw.y + gw.x * gd.y + d * hw.a12,
                w * hd.a21 + gd.y * gw.x + gw.y * gd.x + d * hw.a21,
                w * hd.a22 + gd.y * gw.y + gw.y * gd.y + d * hw.a22};
    return out;
}

inline ScalarDerivatives square_alpha_derivatives(Vec2 x, double alpha) {
    const double r = x.norm();
    if (r < 1e-300) return {0.0, {0.0, 0.0}, Mat2{}};
    const double ra = std::pow(r, alpha);
    const double ra2 = alpha * std::pow(r, alpha - 2.0);
    const double ra4 = alpha * (alpha - 2.0) * std::pow(r, alpha - 4.0);
    const Vec2 gs{ra2 * x.x, ra2 * x.y};
    const Mat2 hs{ra2 + ra4 * x.x * x.x, ra4 * x.x * x.y, ra4 * x.x * x.y, ra2 + ra4 * x.y * x.y};
    return with_cutoff(x, ra, gs, hs);
}

inline ScalarDerivatives lshape_sigma_derivatives(Vec2 x, double sigma) {
    const double r = x.norm();
    if (r < 1e-300) return {0.0, {0.0, 0.0}, Mat2{}};
    double theta = std::atan2(x.y, x.x);
    if (theta < 0.0) theta += 2.0 * std::numbers::pi;
    const double psi = std::sin(2.0 * theta / 3.0);
    const double dpsi = (2.0 / 3.0) * std::cos(2.0 * theta / 3.0);
    const double ddpsi = -(4.0 / 9.0) * psi;

    const double w = std::pow(r, sigma) * psi;
    const double w_r = sigma * std::pow(r, sigma - 1.0) * psi;
    const double w_rr = sigma * (sigma - 1.0) * std::pow(r, sigma - 2.0) * psi;
    const double w_t = std::pow(r, sigma) * dpsi;
    const double w_tt = std::pow(r, sigma) * ddpsi;
    const double w_rt = sigma * std::pow(r, sigma - 1.0) * dpsi;

    const double c = x.x / r, s = x.y / r;
    const Vec2 gw{w_r * c - w_t * s / r, w_r * s + w_t * c / r};
    const double wxx = w_rr * c * c - 2.0 * w_rt * c * s / r + w_tt * s * s / (r * r) +
                       w_r * s * s / r + 2.0 * w_t * c * s / (r * r);
    const double wyy = w_rr * s * s + 2.0 * w_rt * c * s / r + w_tt * c * c / (r * r) +
                       w_r * c * c / r - 2.0 * w_t * c * s / (r * r);
    const double wxy = w_rr * c * s + w_rt * (c * c - s * s) / r - w_tt * c * s / (r * r) -
                       w_r * c * s / r + w_t * (s * s - c * c) / (r * r);
    return with_cutoff(x, w, gw, {wxx, wxy, wxy, wyy});
}

} // namespace detail

inline ManufacturedCase make_case(const std::string& id, const PDelta& pd) {
    ManufacturedCase kase{id, pd, {}, {}, {}, {}};
    std::function<detail::ScalarDerivatives(Vec2)> derivatives;
    if (id == "square_alpha") {
        derivatives = [](Vec2 x) { return detail::square_alpha_derivatives(x, 1.01); };
    } else if (id == "lshape_sigma") {
        const double sigma = 1.01 - 1.0 / pd.p;
        derivatives = [sigma](Vec2 x) { return detail::lshape_sigma_derivatives(x, sigma); };
    } else {
        throw std::invalid_argument("make_case: unknown case id '" + id + "'");
    }
    kase.u = [derivatives](Vec2 x) { return derivatives(x).value; };
    kase.grad_u = [derivatives](Vec2 x) { return derivatives(x).grad; };
    kase.hess_u = [derivatives](Vec2 x) { return derivatives(x).hess; };
    kase.f = [derivatives, pd](Vec2 x) {
        const auto d = derivatives(x);
        return detail::source_from_derivatives(pd, d.grad, d.hess);
    };
    return kase;
}

/// f_h = Pi_h f, by element-wise quadrature.
inline P0Function project_source(const ManufacturedCase& kase, const Triangulation& m, int degree = 7) {
    return pi_h(m, kase.f, degree);
}

namespace detail {

template <class F>
double integrate_refined(const Triangulation& m, int t, int degree, int extra_levels, F&& f) {
    const TriRule& rule = tri_rule(degree);
    double sum = 0.0;
    struct Patch {
        Vec2 a, b, c;
        int level;
    };
    std::vector<Patch> stack{{m.vertices[m.tris[t][0]], m.vertices[m.tris[t][1]], m.vertices[m.tris[t][2]], 0}};
    while (!stack.empty()) {
        const Patch p = stack.back();
        stack.pop_back();
        if (p.level < extra_levels) {
            const Vec2 mab = (p.a + p.b) / 2.0, mbc = (p.b + p.c) / 2.0, mca = (p.c + p.a) / 2.0;
            stack.push_back({p.a, mab, mca, p.level + 1});
            stack.push_back({mab, p.b, mbc, p.level + 1});
            stack.push_back({mca, mbc, p.c, p.level + 1});
            stack.push_back({mbc, mca, mab, p.level + 1});
            continue;
        }
        const double area = tri_area(p.a, p.b, p.c);
        for (const auto& q : rule)
            sum += area * q.weight * f(p.a * q.bary[0] + p.b * q.bary[1] + p.c * q.bary[2]);
    }
    return sum;
}

inline bool touches_origin(const Triangulation& m, int t) {
    for (int v : m.tris[t])
        if (m.vertices[v].norm() < 1e-12) return true;
    return false;
}

// L2 distance squared between a per-element field and an exact field.
template <class Approx>
double field_error_sq(const Triangulation& m, const std::function<Vec2(Vec2)>& exact, Approx&& approx,
                      int degree) {
    double total = 0.0;
    for (int t = 0; t < m.n_elements(); ++t) {
        auto integrand = [&](Vec2 x) {
            const Vec2 d = approx(t, x) - exact(x);
            return d.dot(d);
        };
        total += integrate_refined(m, t, degree, touches_origin(m, t) ? 1 : 0, integrand);
    }
    return total;
}

} // namespace detail

/// e_F = || F(grad_h u_h) - F(grad u) ||_{L^2}.
inline double error_f(const PDelta& pd, const CrFunction& u_h, const ManufacturedCase& kase,
                      int degree = 7) {
    auto exact = [&](Vec2 x) { return map_f(pd, kase.grad_u(x)); };
    return std::sqrt(detail::field_error_sq(
        u_h.mesh(), exact, [&](int t, Vec2) { return map_f(pd, u_h.gradient(t)); }, degree));
}

/// rho^2(v) = || F(grad v) - F(grad u) ||^2 for the conforming v.
inline double rho_sq(const PDelta& pd, const S1Function& v, const ManufacturedCase& kase, int degree = 7) {
    auto exact = [&](Vec2 x) { return map_f(pd, kase.grad_u(x)); };
    return detail::field_error_sq(
        v.mesh(), exact, [&](int t, Vec2) { return map_f(pd, v.gradient(t)); }, degree);
}

/// e_F* = || F*(z_h) - F*(z) ||_{L^2} with the exact flux z = A(grad u).
inline double error_fstar(const PDelta& pd, const Rt0Function& z_h, const ManufacturedCase& kase,
                          int degree = 7) {
    auto exact = [&](Vec2 x) { return map_f_star(pd, op_a(pd, kase.grad_u(x))); };
    return std::sqrt(detail::field_error_sq(
        z_h.mesh(), exact, [&](int t, Vec2 x) { return map_f_star(pd, z_h.value(t, x)); }, degree));
}

/// Experimental orders of convergence, EOC_k = log(e_k/e_{k-1}) / log(h_k/h_{k-1}).
/// Non-positive errors yield NaN entries.
inline std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& hs) {
    if (errors.size() < 2 || errors.size() != hs.size())
        throw std::invalid_argument("eoc: need >= 2 errors with matching mesh sizes");
    std::vector<double> out(errors.size() - 1);
    for (size_t k = 1; k < errors.size(); ++k) {
        if (errors[k] <= 0.0 || errors[k - 1] <= 0.0)
            out[k - 1] = std::numeric_limits<double>::quiet_NaN();
        else
            out[k - 1] = std::log(errors[k] / errors[k - 1]) / std::log(hs[k] / hs[k - 1]);
    }
    return out;
}

} // namespace crfem
