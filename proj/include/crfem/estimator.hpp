#pragma once

// Primal-dual a posteriori error estimator and its local indicators,
//
//   eta_A,T = int_T phi(|grad v|) - Pi_h z . (grad v - grad_h u) - phi(|grad_h u|),
//   eta_B,T = int_T phi*(|z|) - phi*(|Pi_h z|),
//   eta_T   = eta_A,T + eta_B,T,
//
// the monotone estimator eta_F, and the oscillation functional. eta_A is
// exact (constant integrands); the non-projected terms use quadrature whose
// positive weights keep eta_B >= 0 by Jensen's inequality.

#include "crfem/duality.hpp"
#include "crfem/fespace.hpp"
#include "crfem/mesh.hpp"
#include "crfem/nfun.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace crfem {

struct EstimatorReport {
    std::vector<double> eta_a; // per element
    std::vector<double> eta_b;
    std::vector<double> eta;
    double total_a = 0.0;
    double total_b = 0.0;
    double total = 0.0;
};

/// Local indicators of the primal-dual estimator for the conforming input v.
inline EstimatorReport eta_local(const PDelta& pd, const S1Function& v, const CrFunction& u,
                                 const Rt0Function& z, int quad_degree = 5) {
    const Triangulation& m = u.mesh();
    EstimatorReport rep;
    const int nt = m.n_elements();
    rep.eta_a.resize(nt);
    rep.eta_b.resize(nt);
    rep.eta.resize(nt);
    for (int t = 0; t < nt; ++t) {
        const Vec2 gv = v.gradient(t);
        const Vec2 gu = u.gradient(t);
        const Vec2 pz = z.value(t, m.barycenter[t]); // exact element mean of the affine flux
        const double a = m.area[t] * (phi(pd, gv.norm()) - pz.dot(gv - gu) - phi(pd, gu.norm()));
        const double b = integrate(m, t, quad_degree,
                                   [&](Vec2 x) { return phi_conj(pd, z.value(t, x).norm()); }) -
                         m.area[t] * phi_conj(pd, pz.norm());
        rep.eta_a[t] = a;
        rep.eta_b[t] = b;
        rep.eta[t] = a + b;
        rep.total_a += a;
        rep.total_b += b;
    }
    rep.total = rep.total_a + rep.total_b;
    return rep;
}

struct EtaFReport {
    double grad_part = 0.0; // |F(grad v) - F(grad_h u)|^2, exact
    double flux_part = 0.0; // |F*(z) - F*(Pi_h z)|^2, quadrature
    double total() const { return grad_part + flux_part; }
};

/// Monotone primal-dual estimator eta_F^2.
inline EtaFReport eta_f(const PDelta& pd, const S1Function& v, const CrFunction& u, const Rt0Function& z,
                        int quad_degree = 5) {
    const Triangulation& m = u.mesh();
    EtaFReport rep;
    for (int t = 0; t < m.n_elements(); ++t) {
        const Vec2 df = map_f(pd, v.gradient(t)) - map_f(pd, u.gradient(t));
        rep.grad_part += m.area[t] * df.dot(df);
        const Vec2 fpz = map_f_star(pd, z.value(t, m.barycenter[t]));
        rep.flux_part += integrate(m, t, quad_degree, [&](Vec2 x) {
            const Vec2 d = map_f_star(pd, z.value(t, x)) - fpz;
            return d.dot(d);
        });
    }
    return rep;
}

struct OscReport {
    std::vector<double> per_element;
    double total = 0.0;
};

/// Oscillation  osc_h(f, v, T) = int_T (phi_{|grad v|})*( h_T |f - f_h| ) dx.
/// Works for any v with element-wise constant gradients (CR or P1).
template <class FeFunction>
OscReport osc(const PDelta& pd, const FeFunction& v, const std::function<double(Vec2)>& f,
              const P0Function& f_h, int quad_degree = 5) {
    const Triangulation& m = v.mesh();
    OscReport rep;
    rep.per_element.resize(m.n_elements());
    for (int t = 0; t < m.n_elements(); ++t) {
        const PDelta shifted = pd.shifted(v.gradient(t).norm());
        const double h = m.h_t[t];
        const double val = integrate(m, t, quad_degree, [&](Vec2 x) {
            return phi_conj(shifted, h * std::abs(f(x) - f_h[t]));
        });
        rep.per_element[t] = val;
        rep.total += val;
    }
    return rep;
}

} // namespace crfem
