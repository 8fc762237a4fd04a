#pragma once

// Degree-of-freedom management and element calculus for the four spaces in
// play: Crouzeix-Raviart (side-midpoint DOFs), conforming P1 (vertex DOFs),
// lowest-order Raviart-Thomas (side-flux DOFs), and element-wise constants.
// Also the piecewise-constant projection, the broken gradient, the
// node-averaging operator, and the discrete integration-by-parts residual.
//
// DOF numbering follows the mesh's lexicographic side order; vertex DOFs are
// sorted lexicographically by position. Both make runs reproducible.

#include "crfem/mesh.hpp"
#include "crfem/nfun.hpp"
#include "crfem/quadrature.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace crfem {

/// Barycentric coordinates of x in element t.
inline std::array<double, 3> barycentric(const Triangulation& m, int t, Vec2 x) {
    const Vec2 a = m.vertices[m.tris[t][0]], b = m.vertices[m.tris[t][1]], c = m.vertices[m.tris[t][2]];
    const double inv2a = 1.0 / (2.0 * m.area[t]);
    return {detail::tri_area(x, b, c) * 2.0 * inv2a, detail::tri_area(a, x, c) * 2.0 * inv2a,
            detail::tri_area(a, b, x) * 2.0 * inv2a};
}

/// Gradient of the hat function of local vertex k on element t.
inline Vec2 hat_gradient(const Triangulation& m, int t, int k) {
    const Vec2 e = m.vertices[m.tris[t][(k + 2) % 3]] - m.vertices[m.tris[t][(k + 1) % 3]];
    return Vec2{-e.y, e.x} / (2.0 * m.area[t]);
}

/// Quadrature of a callable over element t, exact to the given degree.
template <class F>
double integrate(const Triangulation& m, int t, int degree, F&& f) {
    const TriRule& rule = tri_rule(degree);
    const Vec2 a = m.vertices[m.tris[t][0]], b = m.vertices[m.tris[t][1]], c = m.vertices[m.tris[t][2]];
    double sum = 0.0;
    for (const auto& q : rule)
        sum += q.weight * f(a * q.bary[0] + b * q.bary[1] + c * q.bary[2]);
    return m.area[t] * sum;
}

/// Quadrature of a callable along side s (n-point Gauss).
template <class F>
double integrate_side(const Triangulation& m, int s, int npoints, F&& f) {
    const GaussRule1d& rule = segment_rule(npoints);
    const Vec2 a = m.vertices[m.sides[s].v0], b = m.vertices[m.sides[s].v1];
    double sum = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i)
        sum += rule.weights[i] * f(a + (b - a) * (0.5 * (rule.nodes[i] + 1.0)));
    return 0.5 * m.sides[s].length * sum;
}

/// Element-wise constant field (scalar).
struct P0Function {
    const Triangulation* mesh = nullptr;
    Eigen::VectorXd values;

    P0Function() = default;
    explicit P0Function(const Triangulation& m) : mesh(&m), values(Eigen::VectorXd::Zero(m.n_elements())) {}
    double operator[](int t) const { return values[t]; }
};

// ---------------------------------------------------------------------------
// Crouzeix-Raviart space

class CrSpace {
public:
    explicit CrSpace(const Triangulation& m) : mesh_(&m), side_dof_(m.n_sides(), -1) {
        for (int s = 0; s < m.n_sides(); ++s)
            if (m.sides[s].label != BoundaryLabel::dirichlet) side_dof_[s] = n_dofs_++;
    }

    const Triangulation& mesh() const { return *mesh_; }
    int n_dofs() const { return n_dofs_; }
    int dof_of_side(int s) const { return side_dof_[s]; }

private:
    const Triangulation* mesh_;
    std::vector<int> side_dof_;
    int n_dofs_ = 0;
};

/// CR function: element-wise affine, continuous at interior side midpoints,
/// zero at Dirichlet side midpoints (those sides carry no DOF).
struct CrFunction {
    const CrSpace* space = nullptr;
    Eigen::VectorXd coeffs;

    CrFunction() = default;
    explicit CrFunction(const CrSpace& sp) : space(&sp), coeffs(Eigen::VectorXd::Zero(sp.n_dofs())) {}

    const Triangulation& mesh() const { return space->mesh(); }

    double side_value(int s) const {
        const int dof = space->dof_of_side(s);
        return dof < 0 ? 0.0 : coeffs[dof];
    }

    /// Value of the affine representative on element t at x.
    double value(int t, Vec2 x) const {
        const auto lam = barycentric(mesh(), t, x);
        double v = 0.0;
        for (int k = 0; k < 3; ++k)
            v += side_value(mesh().tri_sides[t][k]) * (1.0 - 2.0 * lam[k]);
        return v;
    }

    /// Broken gradient, constant on element t.
    Vec2 gradient(int t) const {
        Vec2 g{0.0, 0.0};
        for (int k = 0; k < 3; ++k)
            g = g + (-2.0 * side_value(mesh().tri_sides[t][k])) * hat_gradient(mesh(), t, k);
        return g;
    }

    /// Jump v|_{T+} - v|_{T-} at x on an interior side.
    double jump(int s, Vec2 x) const {
        const Side& sd = mesh().sides[s];
        if (sd.t_plus < 0) return value(sd.t_minus, x);
        return value(sd.t_plus, x) - value(sd.t_minus, x);
    }
};

// ---------------------------------------------------------------------------
// Conforming P1 space

class S1Space {
public:
    explicit S1Space(const Triangulation& m) : mesh_(&m), vertex_dof_(m.n_vertices(), -1) {
        std::vector<int> order(m.n_vertices());
        for (int v = 0; v < m.n_vertices(); ++v) order[v] = v;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (m.vertices[a].x != m.vertices[b].x) return m.vertices[a].x < m.vertices[b].x;
            return m.vertices[a].y < m.vertices[b].y;
        });
        for (int v : order)
            if (!m.vertex_on_dirichlet[v]) vertex_dof_[v] = n_dofs_++;
    }

    const Triangulation& mesh() const { return *mesh_; }
    int n_dofs() const { return n_dofs_; }
    int dof_of_vertex(int v) const { return vertex_dof_[v]; }

private:
    const Triangulation* mesh_;
    std::vector<int> vertex_dof_;
    int n_dofs_ = 0;
};

/// Globally continuous piecewise affine function with zero Dirichlet trace.
struct S1Function {
    const S1Space* space = nullptr;
    Eigen::VectorXd coeffs;

    S1Function() = default;
    explicit S1Function(const S1Space& sp) : space(&sp), coeffs(Eigen::VectorXd::Zero(sp.n_dofs())) {}

    const Triangulation& mesh() const { return space->mesh(); }

    double vertex_value(int v) const {
        const int dof = space->dof_of_vertex(v);
        return dof < 0 ? 0.0 : coeffs[dof];
    }

    double value(int t, Vec2 x) const {
        const auto lam = barycentric(mesh(), t, x);
        double v = 0.0;
        for (int k = 0; k < 3; ++k) v += vertex_value(mesh().tris[t][k]) * lam[k];
        return v;
    }

    Vec2 gradient(int t) const {
        Vec2 g{0.0, 0.0};
        for (int k = 0; k < 3; ++k)
            g = g + vertex_value(mesh().tris[t][k]) * hat_gradient(mesh(), t, k);
        return g;
    }
};

// ---------------------------------------------------------------------------
// Lowest-order Raviart-Thomas space

class Rt0Space {
public:
    explicit Rt0Space(const Triangulation& m) : mesh_(&m), side_dof_(m.n_sides(), -1) {
        for (int s = 0; s < m.n_sides(); ++s)
            if (m.sides[s].label != BoundaryLabel::neumann) side_dof_[s] = n_dofs_++;
    }

    const Triangulation& mesh() const { return *mesh_; }
    int n_dofs() const { return n_dofs_; }
    int dof_of_side(int s) const { return side_dof_[s]; }

private:
    const Triangulation* mesh_;
    std::vector<int> side_dof_;
    int n_dofs_ = 0;
};

/// RT0 field. The DOF on side S is the (constant) normal component in the
/// direction of the global side normal n_S; Neumann sides carry none.
struct Rt0Function {
    const Rt0Space* space = nullptr;
    Eigen::VectorXd coeffs;

    Rt0Function() = default;
    explicit Rt0Function(const Rt0Space& sp) : space(&sp), coeffs(Eigen::VectorXd::Zero(sp.n_dofs())) {}

    const Triangulation& mesh() const { return space->mesh(); }

    double flux(int s) const {
        const int dof = space->dof_of_side(s);
        return dof < 0 ? 0.0 : coeffs[dof];
    }

    /// +1 if the global normal of side s points out of element t.
    int sign(int t, int s) const { return mesh().sides[s].t_minus == t ? 1 : -1; }

    Vec2 value(int t, Vec2 x) const {
        const Triangulation& m = mesh();
        Vec2 y{0.0, 0.0};
        for (int k = 0; k < 3; ++k) {
            const int s = m.tri_sides[t][k];
            const Vec2 opp = m.vertices[m.tris[t][k]];
            y = y + flux(s) * sign(t, s) * (m.sides[s].length / (2.0 * m.area[t])) * (x - opp);
        }
        return y;
    }

    /// div y, constant on element t.
    double divergence(int t) const {
        const Triangulation& m = mesh();
        double d = 0.0;
        for (int k = 0; k < 3; ++k) {
            const int s = m.tri_sides[t][k];
            d += flux(s) * sign(t, s) * m.sides[s].length / m.area[t];
        }
        return d;
    }
};

// ---------------------------------------------------------------------------
// Operators

/// Element means of the affine representative (= barycenter values).
inline P0Function pi_h(const CrFunction& v) {
    const Triangulation& m = v.mesh();
    P0Function out(m);
    for (int t = 0; t < m.n_elements(); ++t) out.values[t] = v.value(t, m.barycenter[t]);
    return out;
}

inline P0Function pi_h(const S1Function& v) {
    const Triangulation& m = v.mesh();
    P0Function out(m);
    for (int t = 0; t < m.n_elements(); ++t) out.values[t] = v.value(t, m.barycenter[t]);
    return out;
}

/// Element means of a general field, by quadrature of the given degree.
inline P0Function pi_h(const Triangulation& m, const std::function<double(Vec2)>& f, int degree) {
    P0Function out(m);
    for (int t = 0; t < m.n_elements(); ++t)
        out.values[t] = integrate(m, t, degree, f) / m.area[t];
    return out;
}

/// Node-averaging quasi-interpolation: vertex values are arithmetic means of
/// the incident element traces, zero at Dirichlet vertices.
inline S1Function i_av(const CrFunction& v, const S1Space& target) {
    const Triangulation& m = v.mesh();
    S1Function out(target);
    for (int z = 0; z < m.n_vertices(); ++z) {
        const int dof = target.dof_of_vertex(z);
        if (dof < 0) continue;
        double sum = 0.0;
        for (int t : m.vertex_elements[z]) sum += v.value(t, m.vertices[z]);
        out.coeffs[dof] = sum / m.vertex_elements[z].size();
    }
    return out;
}

/// Residual of the discrete integration-by-parts identity,
///   (grad_h v, Pi_h y)_Omega + (Pi_h v, div y)_Omega,
/// which vanishes for v in the CR space and y in the RT0_N space.
inline double discrete_ibp_residual(const CrFunction& v, const Rt0Function& y) {
    const Triangulation& m = v.mesh();
    double r = 0.0;
    for (int t = 0; t < m.n_elements(); ++t) {
        const Vec2 ybar = y.value(t, m.barycenter[t]);
        r += m.area[t] * (v.gradient(t).dot(ybar) + v.value(t, m.barycenter[t]) * y.divergence(t));
    }
    return r;
}

/// Per-interior-side jump terms h_S * int_S |[F(grad_h v)]|^2 ds. The
/// integrand is constant per side, so the value is h_S |S| |dF|^2.
inline std::vector<double> jump_norms(const CrFunction& v, const PDelta& pd) {
    const Triangulation& m = v.mesh();
    std::vector<double> out(m.n_sides(), 0.0);
    for (int s = 0; s < m.n_sides(); ++s) {
        const Side& sd = m.sides[s];
        if (sd.t_plus < 0) continue;
        const Vec2 df = map_f(pd, v.gradient(sd.t_plus)) - map_f(pd, v.gradient(sd.t_minus));
        out[s] = sd.length * sd.length * df.dot(df);
    }
    return out;
}

} // namespace crfem
