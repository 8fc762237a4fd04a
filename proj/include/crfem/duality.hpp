#pragma once

// Discrete primal/dual energies, the generalized Marini reconstruction of
// the discrete dual solution, and checks of the discrete convex optimality
// relations. All element integrands of the primal energy are constants, so
// it is evaluated exactly; the dual energy's projected argument likewise.

#include "crfem/fespace.hpp"
#include "crfem/mesh.hpp"
#include "crfem/nfun.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace crfem {

struct EnergyPair {
    double primal = 0.0;
    double dual = 0.0;
    double gap() const { return primal - dual; }
};

/// Discrete p-Dirichlet energy  sum_T |T| ( phi(|grad_h v|) - f_h Pi_h v ).
inline double primal_energy(const PDelta& pd, const CrFunction& v, const P0Function& f_h) {
    const Triangulation& m = v.mesh();
    double e = 0.0;
    for (int t = 0; t < m.n_elements(); ++t)
        e += m.area[t] * (phi(pd, v.gradient(t).norm()) - f_h[t] * v.value(t, m.barycenter[t]));
    return e;
}

/// Discrete dual energy  -sum_T |T| phi*(|Pi_h y|)  if div y = -f_h
/// element-wise (to 1e-10 relative), else -infinity.
inline double dual_energy(const PDelta& pd, const Rt0Function& y, const P0Function& f_h) {
    const Triangulation& m = y.mesh();
    double e = 0.0;
    for (int t = 0; t < m.n_elements(); ++t) {
        if (std::abs(y.divergence(t) + f_h[t]) > 1e-10 * (1.0 + std::abs(f_h[t])))
            return -std::numeric_limits<double>::infinity();
        e -= m.area[t] * phi_conj(pd, y.value(t, m.barycenter[t]).norm());
    }
    return e;
}

/// Generalized Marini reconstruction (d = 2):
///   z|_T = A(grad_h u|_T) - (f_h|_T / 2) (x - x_T).
/// The result is projected onto side fluxes (averaging the one or two
/// element traces); for a converged u the traces agree and the field lies
/// in RT0_N. A jump beyond `audit_tol` (relative to the flux scale) raises,
/// signalling a non-converged input.
inline Rt0Function marini_reconstruct(const PDelta& pd, const CrFunction& u, const P0Function& f_h,
                                      const Rt0Space& target, double audit_tol = 1e-8) {
    const Triangulation& m = u.mesh();
    auto trace = [&](int t, int s) {
        const Vec2 a_t = op_a(pd, u.gradient(t));
        const Vec2 x_s = m.sides[s].midpoint;
        return (a_t - 0.5 * f_h[t] * (x_s - m.barycenter[t])).dot(m.sides[s].normal);
    };

    Rt0Function z(target);
    double scale = 1.0, worst = 0.0;
    for (int t = 0; t < m.n_elements(); ++t) scale = std::max(scale, op_a(pd, u.gradient(t)).norm());
    for (int s = 0; s < m.n_sides(); ++s) {
        const Side& sd = m.sides[s];
        double value = trace(sd.t_minus, s);
        if (sd.t_plus >= 0) {
            const double other = trace(sd.t_plus, s);
            worst = std::max(worst, std::abs(value - other));
            value = 0.5 * (value + other);
        } else if (sd.label == BoundaryLabel::neumann) {
            worst = std::max(worst, std::abs(value));
            value = 0.0;
        }
        const int dof = target.dof_of_side(s);
        if (dof >= 0) z.coeffs[dof] = value;
    }
    if (worst > audit_tol * scale)
        throw std::runtime_error("marini_reconstruct: normal-trace jump audit failed (non-converged input?)");
    return z;
}

struct OptimalityReport {
    double max_div_residual = 0.0;     // |div z + f_h|, relative
    double max_fenchel_residual = 0.0; // |Pi_h z . grad u - phi*(|Pi_h z|) - phi(|grad u|)|
    EnergyPair energy;
};

/// Residuals of the discrete convex optimality relations and the duality gap.
inline OptimalityReport check_optimality(const PDelta& pd, const CrFunction& u, const Rt0Function& z,
                                         const P0Function& f_h) {
    const Triangulation& m = u.mesh();
    OptimalityReport rep;
    for (int t = 0; t < m.n_elements(); ++t) {
        rep.max_div_residual = std::max(
            rep.max_div_residual, std::abs(z.divergence(t) + f_h[t]) / (1.0 + std::abs(f_h[t])));
        const Vec2 g = u.gradient(t);
        const Vec2 pz = z.value(t, m.barycenter[t]);
        rep.max_fenchel_residual = std::max(
            rep.max_fenchel_residual,
            std::abs(pz.dot(g) - phi_conj(pd, pz.norm()) - phi(pd, g.norm())));
    }
    rep.energy.primal = primal_energy(pd, u, f_h);
    rep.energy.dual = dual_energy(pd, z, f_h);
    return rep;
}

} // namespace crfem
