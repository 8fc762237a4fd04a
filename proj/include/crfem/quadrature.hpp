#pragma once

// Quadrature on triangles and segments.
//
// Triangle rules are stored in barycentric coordinates with weights summing
// to one, so that  int_T f dx  =  |T| * sum_i w_i f(x_i).  Low degrees use
// the classical symmetric rules (3-point midpoint, 7-point degree-5);
// higher degrees fall back to a conical product of Gauss-Legendre and
// Gauss-Jacobi rules, which has strictly interior nodes and positive
// weights for every degree.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

namespace crfem {

struct TriQuadPoint {
    std::array<double, 3> bary;
    double weight; // relative to |T|
};

using TriRule = std::vector<TriQuadPoint>;

struct GaussRule1d {
    std::vector<double> nodes;   // on [-1,1]
    std::vector<double> weights;
};

namespace detail {

// Golub-Welsch: nodes/weights of the Gauss rule from the three-term
// recurrence of the monic orthogonal polynomials (diagonal a_k,
// off-diagonal b_k, zeroth moment mu0).
inline GaussRule1d golub_welsch(const std::vector<double>& a, const std::vector<double>& b,
                                double mu0) {
    const int n = static_cast<int>(a.size());
    Eigen::VectorXd diag(n), sub(n - 1 > 0 ? n - 1 : 0);
    for (int i = 0; i < n; ++i) diag[i] = a[i];
    for (int i = 0; i + 1 < n; ++i) sub[i] = std::sqrt(b[i + 1]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub);
    GaussRule1d rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = es.eigenvalues()[i];
        const double v0 = es.eigenvectors()(0, i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

inline GaussRule1d make_gauss_legendre(int n) {
    std::vector<double> a(n, 0.0), b(n, 0.0);
    for (int k = 1; k < n; ++k) b[k] = double(k) * k / (4.0 * k * k - 1.0);
    return golub_welsch(a, b, 2.0);
}

// Weight (1-x) on [-1,1], i.e. Jacobi with alpha = 1, beta = 0.
inline GaussRule1d make_gauss_jacobi10(int n) {
    std::vector<double> a(n), b(n, 0.0);
    a[0] = -1.0 / 3.0;
    for (int k = 1; k < n; ++k) {
        a[k] = -1.0 / ((2.0 * k + 1.0) * (2.0 * k + 3.0));
        b[k] = k * (k + 1.0) / ((2.0 * k + 1.0) * (2.0 * k + 1.0));
    }
    return golub_welsch(a, b, 2.0);
}

inline TriRule make_conical(int n) {
    const GaussRule1d gl = make_gauss_legendre(n);
    const GaussRule1d gj = make_gauss_jacobi10(n);
    TriRule rule;
    rule.reserve(n * n);
    for (int i = 0; i < n; ++i) {
        const double xi = 0.5 * (gl.nodes[i] + 1.0);
        const double wi = 0.5 * gl.weights[i];
        for (int j = 0; j < n; ++j) {
            const double eta = 0.5 * (gj.nodes[j] + 1.0);
            const double wj = 0.25 * gj.weights[j];
            const double x = xi * (1.0 - eta), y = eta;
            // weights sum to the reference area 1/2; normalize to 1
            rule.push_back({{1.0 - x - y, x, y}, 2.0 * wi * wj});
        }
    }
    return rule;
}

inline TriRule make_midpoint() {
    const double w = 1.0 / 3.0;
    return {{{0.5, 0.5, 0.0}, w}, {{0.0, 0.5, 0.5}, w}, {{0.5, 0.0, 0.5}, w}};
}

inline TriRule make_degree5() {
    const double s15 = std::sqrt(15.0);
    const double a1 = (6.0 - s15) / 21.0, w1 = (155.0 - s15) / 1200.0;
    const double a2 = (6.0 + s15) / 21.0, w2 = (155.0 + s15) / 1200.0;
    TriRule rule = {{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 9.0 / 40.0}};
    for (const auto& [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}}) {
        rule.push_back({{1.0 - 2.0 * a, a, a}, w});
        rule.push_back({{a, 1.0 - 2.0 * a, a}, w});
        rule.push_back({{a, a, 1.0 - 2.0 * a}, w});
    }
    return rule;
}

} // namespace detail

/// Rule exact for polynomials of (at least) the given total degree.
inline const TriRule& tri_rule(int degree) {
    static std::map<int, TriRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(degree);
    if (it != cache.end()) return it->second;
    TriRule rule;
    if (degree <= 2)
        rule = detail::make_midpoint();
    else if (degree <= 5)
        rule = detail::make_degree5();
    else
        rule = detail::make_conical((degree + 2) / 2);
    return cache.emplace(degree, std::move(rule)).first->second;
}

/// Gauss-Legendre rule on [-1,1], exact for degree 2n-1.
inline const GaussRule1d& segment_rule(int npoints) {
    static std::map<int, GaussRule1d> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(npoints);
    if (it != cache.end()) return it->second;
    return cache.emplace(npoints, detail::make_gauss_legendre(npoints)).first->second;
}

} // namespace crfem
