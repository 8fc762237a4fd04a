#pragma once

// Assembly and Newton-with-line-search solution of the CR and conforming P1
// discretizations. All CR integrands are element-wise constant, so residual
// and Jacobian entries are exact; the P1 right-hand side integrates the
// given f by quadrature. Linear systems go through a sparse direct
// factorization (Eigen SimplicialLDLT).

#include "crfem/duality.hpp"
#include "crfem/fespace.hpp"
#include "crfem/mesh.hpp"
#include "crfem/nfun.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace crfem {

struct NewtonConfig {
    double tau_abs = 1e-8;
    double tau_rel = 1e-10;
    int max_iter = 50;
    double beta = 0.5;       // backtracking factor
    int max_backtracks = 30;
    double kappa = 1e-12;    // gradient-norm floor for DA when p < 2, delta = 0
};

struct NewtonReport {
    int iterations = 0;
    bool converged = false;
    std::vector<double> residual_norms; // includes the initial residual
    std::vector<double> step_lengths;
};

namespace detail {

// DA evaluated with the degenerate-gradient floor: only active for
// p < 2, delta = 0, where DA blows up at the origin.
inline Mat2 op_da_regularized(const PDelta& pd, Vec2 g, double kappa) {
    if (pd.p < 2.0 && pd.delta == 0.0 && g.norm() < kappa)
        g = g.norm() == 0.0 ? Vec2{kappa, 0.0} : g * (kappa / g.norm());
    return op_da(pd, g);
}

// Generic Newton driver over an assembly interface.
template <class Problem>
NewtonReport newton_drive(Problem& prob, Eigen::VectorXd& x, const NewtonConfig& cfg) {
    NewtonReport rep;
    Eigen::VectorXd r = prob.residual(x);
    double rnorm = r.norm();
    rep.residual_norms.push_back(rnorm);
    const double tol = std::max(cfg.tau_abs, cfg.tau_rel * rnorm);

    auto step_once = [&](bool& accepted) {
        Eigen::SparseMatrix<double> jac = prob.jacobian(x);
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(jac);
        if (ldlt.info() != Eigen::Success) throw std::runtime_error("newton: factorization failed");
        const Eigen::VectorXd dx = ldlt.solve(-r);
        if (ldlt.info() != Eigen::Success) throw std::runtime_error("newton: linear solve failed");

        const double e0 = prob.energy(x);
        double alpha = 1.0;
        accepted = false;
        for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
            const Eigen::VectorXd xt = x + alpha * dx;
            const Eigen::VectorXd rt = prob.residual(xt);
            const double rtn = rt.norm();
            // monotone in the residual norm; accepted steps also may not
            // increase the convex energy beyond roundoff
            if (rtn < rnorm && prob.energy(xt) <= e0 + 1e-12 * (1.0 + std::abs(e0))) {
                x = xt;
                r = rt;
                rnorm = rtn;
                rep.step_lengths.push_back(alpha);
                accepted = true;
                return;
            }
            alpha *= cfg.beta;
        }
    };

    while (rnorm > tol && rep.iterations < cfg.max_iter) {
        bool accepted = false;
        step_once(accepted);
        if (!accepted) return rep; // line search stalled; converged stays false
        ++rep.iterations;
        rep.residual_norms.push_back(rnorm);
    }
    if (rnorm > tol) return rep;

    // One polishing step when the loop stops close to the tolerance: the
    // quadratic contraction pushes the residual far below it, which keeps
    // duality-gap and flux-conformity residuals at roundoff level.
    if (rnorm > 1e-3 * tol && rep.iterations < cfg.max_iter) {
        const Eigen::VectorXd x_keep = x;
        const double r_keep = rnorm;
        bool accepted = false;
        step_once(accepted);
        if (accepted && rnorm < r_keep) {
            ++rep.iterations;
            rep.residual_norms.push_back(rnorm);
        } else {
            x = x_keep;
            rnorm = r_keep;
        }
    }
    rep.converged = true;
    return rep;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Crouzeix-Raviart problem

/// Residual of the CR discretization: component i is
///   (A(grad_h u), grad_h phi_i)_Omega - (f_h, Pi_h phi_i)_Omega.
inline Eigen::VectorXd assemble_residual_cr(const PDelta& pd, const CrSpace& space, const CrFunction& u,
                                            const P0Function& f_h) {
    const Triangulation& m = space.mesh();
    Eigen::VectorXd r = Eigen::VectorXd::Zero(space.n_dofs());
    for (int t = 0; t < m.n_elements(); ++t) {
        const Vec2 a_t = op_a(pd, u.gradient(t));
        for (int k = 0; k < 3; ++k) {
            const int dof = space.dof_of_side(m.tri_sides[t][k]);
            if (dof < 0) continue;
            const Vec2 grad_basis = -2.0 * hat_gradient(m, t, k);
            // Pi_h of a CR basis function is 1/3 on its incident elements
            r[dof] += m.area[t] * (a_t.dot(grad_basis) - f_h[t] / 3.0);
        }
    }
    return r;
}

/// Jacobian entry (i,j) = sum_T |T| grad phi_j . DA(grad_h u|_T) grad phi_i.
inline Eigen::SparseMatrix<double> assemble_jacobian_cr(const PDelta& pd, const CrSpace& space,
                                                        const CrFunction& u, double kappa = 1e-12) {
    const Triangulation& m = space.mesh();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(9 * m.n_elements());
    for (int t = 0; t < m.n_elements(); ++t) {
        const Mat2 da = detail::op_da_regularized(pd, u.gradient(t), kappa);
        Vec2 gb[3];
        int dof[3];
        for (int k = 0; k < 3; ++k) {
            gb[k] = -2.0 * hat_gradient(m, t, k);
            dof[k] = space.dof_of_side(m.tri_sides[t][k]);
        }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (dof[i] >= 0 && dof[j] >= 0)
                    trips.emplace_back(dof[i], dof[j], m.area[t] * da.apply(gb[j]).dot(gb[i]));
    }
    Eigen::SparseMatrix<double> jac(space.n_dofs(), space.n_dofs());
    jac.setFromTriplets(trips.begin(), trips.end());
    return jac;
}

/// Newton solution of the CR discretization.
inline std::pair<CrFunction, NewtonReport> newton_solve_cr(const PDelta& pd, const CrSpace& space,
                                                           const P0Function& f_h, const NewtonConfig& cfg = {},
                                                           const CrFunction* initial = nullptr) {
    struct Problem {
        const PDelta& pd;
        const CrSpace& space;
        const P0Function& f_h;
        double kappa;
        CrFunction scratch;
        Eigen::VectorXd residual(const Eigen::VectorXd& x) {
            scratch.coeffs = x;
            return assemble_residual_cr(pd, space, scratch, f_h);
        }
        Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& x) {
            scratch.coeffs = x;
            return assemble_jacobian_cr(pd, space, scratch, kappa);
        }
        double energy(const Eigen::VectorXd& x) {
            scratch.coeffs = x;
            return primal_energy(pd, scratch, f_h);
        }
    } prob{pd, space, f_h, cfg.kappa, CrFunction(space)};

    CrFunction u = initial ? *initial : CrFunction(space);
    NewtonReport rep = detail::newton_drive(prob, u.coeffs, cfg);
    return {std::move(u), rep};
}

// ---------------------------------------------------------------------------
// Conforming P1 problem (right-hand side uses the exact f by quadrature)

inline Eigen::VectorXd assemble_residual_s1(const PDelta& pd, const S1Space& space, const S1Function& u,
                                            const std::function<double(Vec2)>& f, int quad_degree = 5) {
    const Triangulation& m = space.mesh();
    Eigen::VectorXd r = Eigen::VectorXd::Zero(space.n_dofs());
    for (int t = 0; t < m.n_elements(); ++t) {
        const Vec2 a_t = op_a(pd, u.gradient(t));
        for (int k = 0; k < 3; ++k) {
            const int dof = space.dof_of_vertex(m.tris[t][k]);
            if (dof < 0) continue;
            const double load = integrate(m, t, quad_degree, [&](Vec2 x) {
                return f(x) * barycentric(m, t, x)[k];
            });
            r[dof] += m.area[t] * a_t.dot(hat_gradient(m, t, k)) - load;
        }
    }
    return r;
}

inline Eigen::SparseMatrix<double> assemble_jacobian_s1(const PDelta& pd, const S1Space& space,
                                                        const S1Function& u, double kappa = 1e-12) {
    const Triangulation& m = space.mesh();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(9 * m.n_elements());
    for (int t = 0; t < m.n_elements(); ++t) {
        const Mat2 da = detail::op_da_regularized(pd, u.gradient(t), kappa);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const int di = space.dof_of_vertex(m.tris[t][i]);
                const int dj = space.dof_of_vertex(m.tris[t][j]);
                if (di >= 0 && dj >= 0)
                    trips.emplace_back(di, dj,
                                       m.area[t] * da.apply(hat_gradient(m, t, j)).dot(hat_gradient(m, t, i)));
            }
    }
    Eigen::SparseMatrix<double> jac(space.n_dofs(), space.n_dofs());
    jac.setFromTriplets(trips.begin(), trips.end());
    return jac;
}

inline std::pair<S1Function, NewtonReport> newton_solve_s1(const PDelta& pd, const S1Space& space,
                                                           const std::function<double(Vec2)>& f,
                                                           const NewtonConfig& cfg = {},
                                                           const S1Function* initial = nullptr,
                                                           int quad_degree = 5) {
    struct Problem {
        const PDelta& pd;
        const S1Space& space;
        const std::function<double(Vec2)>& f;
        double kappa;
        int degree;
        S1Function scratch;
        Eigen::VectorXd residual(const Eigen::VectorXd& x) {
            scratch.coeffs = x;
            return assemble_residual_s1(pd, space, scratch, f, degree);
        }
        Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& x) {
            scratch.coeffs = x;
            return assemble_jacobian_s1(pd, space, scratch, kappa);
        }
        double energy(const Eigen::VectorXd& x) {
            scratch.coeffs = x;
            const Triangulation& m = space.mesh();
            double e = 0.0;
            for (int t = 0; t < m.n_elements(); ++t) {
                e += m.area[t] * phi(pd, scratch.gradient(t).norm());
                e -= integrate(m, t, degree, [&](Vec2 x2) { return f(x2) * scratch.value(t, x2); });
            }
            return e;
        }
    } prob{pd, space, f, cfg.kappa, quad_degree, S1Function(space)};

    S1Function u = initial ? *initial : S1Function(space);
    NewtonReport rep = detail::newton_drive(prob, u.coeffs, cfg);
    return {std::move(u), rep};
}

} // namespace crfem
