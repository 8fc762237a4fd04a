#pragma once

// Conforming 2D triangulations: construction of the benchmark domains,
// side/patch topology, uniform red refinement, and conforming
// red-green-blue adaptive refinement with reference-edge bookkeeping.
//
// Conventions:
//   * element vertices are counterclockwise; local side k is opposite
//     local vertex k (side 0 = (v1,v2), side 1 = (v2,v0), side 2 = (v0,v1));
//   * for an interior side, t_minus is the lower element index and the unit
//     normal points from t_minus to t_plus; boundary normals point outward;
//   * sides are numbered lexicographically by midpoint for run-to-run
//     deterministic DOF orderings;
//   * refinement returns a new mesh, with a child-to-parent element map.

#include "crfem/nfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace crfem {

enum class BoundaryLabel { interior, dirichlet, neumann };

struct Side {
    int v0 = -1, v1 = -1;   // endpoint vertex indices
    int t_minus = -1;       // incident element of lower index
    int t_plus = -1;        // second incident element, -1 on the boundary
    BoundaryLabel label = BoundaryLabel::interior;
    Vec2 midpoint;
    Vec2 normal;            // unit, from t_minus to t_plus / outward
    double length = 0.0;    // h_S
};

/// Set of element indices selected for refinement.
using MarkSet = std::vector<int>;

struct Triangulation {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> tris;
    std::vector<int> ref_edge;  // local index of the reference edge
    std::vector<int> parent;    // element index in the source mesh, -1 at root

    std::vector<Side> sides;
    std::vector<std::array<int, 3>> tri_sides; // local side k -> global side index
    std::vector<double> area;
    std::vector<double> h_t;    // element diameter
    std::vector<Vec2> barycenter;
    std::vector<std::vector<int>> vertex_elements; // T_h(z)
    std::vector<bool> vertex_on_dirichlet;

    int n_elements() const { return static_cast<int>(tris.size()); }
    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_sides() const { return static_cast<int>(sides.size()); }

    int n_interior_sides() const {
        int n = 0;
        for (const auto& s : sides) n += (s.label == BoundaryLabel::interior);
        return n;
    }

    double total_area() const {
        double a = 0.0;
        for (double t : area) a += t;
        return a;
    }

    /// Average mesh size h = (|Omega| / card(T_h))^(1/2).
    double avg_mesh_size() const { return std::sqrt(total_area() / n_elements()); }

    double min_angle() const;

    /// Patch omega_T: all elements sharing at least a vertex with T.
    std::vector<int> patch_elements(int t) const;
    /// Elements incident to side s (one or two).
    std::vector<int> side_elements(int s) const;
    /// S_h(T): sides intersecting the closed element T.
    std::vector<int> sides_touching(int t) const;

    /// Relabel boundary sides whose midpoint satisfies the predicate.
    void relabel_boundary(const std::function<bool(Vec2)>& pred, BoundaryLabel label);

    void finalize(const std::map<std::pair<int, int>, BoundaryLabel>* inherited = nullptr);
};

namespace detail {

inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

inline double tri_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * cross(b - a, c - a); }

inline std::pair<int, int> ordered(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

inline int longest_edge(const Triangulation& m, int t) {
    const auto& tri = m.tris[t];
    double best = -1.0;
    int arg = 0;
    for (int k = 0; k < 3; ++k) {
        const Vec2 a = m.vertices[tri[(k + 1) % 3]];
        const Vec2 b = m.vertices[tri[(k + 2) % 3]];
        const double len = (b - a).norm();
        if (len > best * (1.0 + 1e-12)) {
            best = len;
            arg = k;  // ties keep the lowest opposite-vertex index
        }
    }
    return arg;
}

} // namespace detail

inline void Triangulation::finalize(const std::map<std::pair<int, int>, BoundaryLabel>* inherited) {
    const int nt = n_elements();
    area.resize(nt);
    h_t.resize(nt);
    barycenter.resize(nt);
    for (int t = 0; t < nt; ++t) {
        const Vec2 a = vertices[tris[t][0]], b = vertices[tris[t][1]], c = vertices[tris[t][2]];
        area[t] = detail::tri_area(a, b, c);
        if (!(area[t] > 0.0)) throw std::runtime_error("Triangulation: element not counterclockwise");
        h_t[t] = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
        barycenter[t] = (a + b + c) / 3.0;
    }
    if (ref_edge.empty()) {
        ref_edge.resize(nt);
        for (int t = 0; t < nt; ++t) ref_edge[t] = detail::longest_edge(*this, t);
    }
    if (parent.empty()) parent.assign(nt, -1);

    // collect sides; key = sorted endpoint pair
    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> edge_map; // -> (element, local k)
    for (int t = 0; t < nt; ++t)
        for (int k = 0; k < 3; ++k)
            edge_map[detail::ordered(tris[t][(k + 1) % 3], tris[t][(k + 2) % 3])].push_back({t, k});

    sides.clear();
    sides.reserve(edge_map.size());
    std::vector<std::pair<Vec2, int>> order;
    for (const auto& [key, incident] : edge_map) {
        if (incident.size() > 2) throw std::runtime_error("Triangulation: side with >2 incident elements");
        Side s;
        s.v0 = key.first;
        s.v1 = key.second;
        s.t_minus = incident[0].first;
        if (incident.size() == 2) {
            s.t_plus = incident[1].first;
            if (s.t_plus < s.t_minus) std::swap(s.t_minus, s.t_plus);
        }
        const Vec2 a = vertices[s.v0], b = vertices[s.v1];
        s.midpoint = (a + b) / 2.0;
        s.length = (b - a).norm();
        // outward normal of t_minus on this side
        const Vec2 tangent = (b - a) / s.length;
        Vec2 n{tangent.y, -tangent.x};
        if (n.dot(s.midpoint - barycenter[s.t_minus]) < 0.0) n = -n;
        s.normal = n;
        s.label = BoundaryLabel::interior;
        if (incident.size() == 1) {
            s.label = BoundaryLabel::dirichlet;
            if (inherited) {
                auto it = inherited->find(key);
                if (it != inherited->end()) s.label = it->second;
            }
        }
        sides.push_back(s);
    }
    std::sort(sides.begin(), sides.end(), [](const Side& a, const Side& b) {
        if (a.midpoint.x != b.midpoint.x) return a.midpoint.x < b.midpoint.x;
        return a.midpoint.y < b.midpoint.y;
    });

    tri_sides.assign(nt, {-1, -1, -1});
    std::map<std::pair<int, int>, int> side_index;
    for (int s = 0; s < n_sides(); ++s) side_index[{sides[s].v0, sides[s].v1}] = s;
    for (int t = 0; t < nt; ++t)
        for (int k = 0; k < 3; ++k)
            tri_sides[t][k] = side_index.at(detail::ordered(tris[t][(k + 1) % 3], tris[t][(k + 2) % 3]));

    // conformity audit: shared edges must be traversed in opposite directions
    for (const auto& [key, incident] : edge_map) {
        if (incident.size() != 2) continue;
        int dir[2];
        for (int i = 0; i < 2; ++i) {
            const auto& tri = tris[incident[i].first];
            const int k = incident[i].second;
            dir[i] = (tri[(k + 1) % 3] == key.first) ? +1 : -1;
        }
        if (dir[0] == dir[1]) throw std::runtime_error("Triangulation: inconsistent orientation across side");
    }

    vertex_elements.assign(n_vertices(), {});
    for (int t = 0; t < nt; ++t)
        for (int v : tris[t]) vertex_elements[v].push_back(t);

    vertex_on_dirichlet.assign(n_vertices(), false);
    for (const auto& s : sides)
        if (s.label == BoundaryLabel::dirichlet) {
            vertex_on_dirichlet[s.v0] = true;
            vertex_on_dirichlet[s.v1] = true;
        }
}

inline double Triangulation::min_angle() const {
    double best = 4.0;
    for (int t = 0; t < n_elements(); ++t) {
        for (int k = 0; k < 3; ++k) {
            const Vec2 v = vertices[tris[t][k]];
            const Vec2 e1 = vertices[tris[t][(k + 1) % 3]] - v;
            const Vec2 e2 = vertices[tris[t][(k + 2) % 3]] - v;
            best = std::min(best, std::acos(std::clamp(e1.dot(e2) / (e1.norm() * e2.norm()), -1.0, 1.0)));
        }
    }
    return best;
}

inline std::vector<int> Triangulation::patch_elements(int t) const {
    std::vector<int> out;
    for (int v : tris[t])
        for (int e : vertex_elements[v]) out.push_back(e);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline std::vector<int> Triangulation::side_elements(int s) const {
    if (sides[s].t_plus < 0) return {sides[s].t_minus};
    return {sides[s].t_minus, sides[s].t_plus};
}

inline std::vector<int> Triangulation::sides_touching(int t) const {
    std::vector<int> out;
    for (int v : tris[t])
        for (int e : vertex_elements[v])
            for (int s : tri_sides[e]) {
                if (sides[s].v0 == tris[t][0] || sides[s].v0 == tris[t][1] || sides[s].v0 == tris[t][2] ||
                    sides[s].v1 == tris[t][0] || sides[s].v1 == tris[t][1] || sides[s].v1 == tris[t][2])
                    out.push_back(s);
            }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline void Triangulation::relabel_boundary(const std::function<bool(Vec2)>& pred, BoundaryLabel label) {
    for (auto& s : sides)
        if (s.t_plus < 0 && pred(s.midpoint)) s.label = label;
    vertex_on_dirichlet.assign(n_vertices(), false);
    for (const auto& s : sides)
        if (s.label == BoundaryLabel::dirichlet) {
            vertex_on_dirichlet[s.v0] = true;
            vertex_on_dirichlet[s.v1] = true;
        }
}

namespace detail {

// Grid-of-cells builder shared by the square and L-shape domains. Each cell
// is split along alternating diagonals ((i+j) parity), producing congruent
// right triangles of alternating orientation.
inline Triangulation build_grid(int n, double lo, double hi,
                                const std::function<bool(int, int)>& keep_cell) {
    Triangulation m;
    const double dx = (hi - lo) / n;
    std::vector<int> vid((n + 1) * (n + 1), -1);
    auto vertex = [&](int i, int j) {
        int& id = vid[j * (n + 1) + i];
        if (id < 0) {
            id = m.n_vertices();
            m.vertices.push_back({lo + dx * i, lo + dx * j});
        }
        return id;
    };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (!keep_cell(i, j)) continue;
            const int a = vertex(i, j), b = vertex(i + 1, j);
            const int c = vertex(i + 1, j + 1), d = vertex(i, j + 1);
            if ((i + j) % 2 == 0) {
                m.tris.push_back({a, b, c});
                m.tris.push_back({a, c, d});
            } else {
                m.tris.push_back({a, b, d});
                m.tris.push_back({b, c, d});
            }
        }
    m.finalize();
    return m;
}

} // namespace detail

/// Mesh of (-1,1)^2 with 2 n^2 congruent right triangles; Gamma_D = boundary.
inline Triangulation build_square_mesh(int n) {
    if (n < 1) throw std::invalid_argument("build_square_mesh: n >= 1");
    return detail::build_grid(n, -1.0, 1.0, [](int, int) { return true; });
}

/// Mesh of the L-shape (-1,1)^2 \ [0,1]x[-1,0]: 96 elements, 65 vertices.
inline Triangulation build_lshape_mesh() {
    return detail::build_grid(8, -1.0, 1.0, [](int i, int j) { return !(i >= 4 && j <= 3); });
}

namespace detail {

// Children of an element split through the midpoint of its reference edge
// (newest-vertex style). With the reference edge (a,b) and opposite vertex c,
// the children are (a,m,c) and (m,b,c); each child's reference edge is its
// inherited old edge, i.e. (c,a) and (b,c).
struct Child {
    std::array<int, 3> v;
    int ref;
};

inline std::array<Child, 2> bisect(const std::array<int, 3>& tri, int r, int m) {
    const int a = tri[(r + 1) % 3], b = tri[(r + 2) % 3], c = tri[r];
    return {Child{{a, m, c}, 1}, Child{{m, b, c}, 0}};
}

} // namespace detail

/// Uniform red refinement: every element is split into four congruent
/// children by connecting the side midpoints.
inline Triangulation red_refine(const Triangulation& mesh) {
    Triangulation out;
    out.vertices = mesh.vertices;
    std::vector<int> midpoint_vertex(mesh.n_sides());
    std::map<std::pair<int, int>, BoundaryLabel> labels;
    for (int s = 0; s < mesh.n_sides(); ++s) {
        midpoint_vertex[s] = out.n_vertices();
        out.vertices.push_back(mesh.sides[s].midpoint);
        if (mesh.sides[s].t_plus < 0) {
            labels[detail::ordered(mesh.sides[s].v0, midpoint_vertex[s])] = mesh.sides[s].label;
            labels[detail::ordered(midpoint_vertex[s], mesh.sides[s].v1)] = mesh.sides[s].label;
        }
    }
    for (int t = 0; t < mesh.n_elements(); ++t) {
        const int r = mesh.ref_edge[t];
        const auto& tri = mesh.tris[t];
        const int a = tri[(r + 1) % 3], b = tri[(r + 2) % 3], c = tri[r];
        const int mab = midpoint_vertex[mesh.tri_sides[t][r]];
        const int mbc = midpoint_vertex[mesh.tri_sides[t][(r + 1) % 3]];
        const int mca = midpoint_vertex[mesh.tri_sides[t][(r + 2) % 3]];
        // corner children keep halves of the reference edge; the inner pair
        // uses the midline parallel to it
        out.tris.push_back({a, mab, mca});
        out.tris.push_back({mab, b, mbc});
        out.tris.push_back({mca, mbc, c});
        out.tris.push_back({mbc, mca, mab});
        for (int i = 0; i < 4; ++i) {
            out.ref_edge.push_back(2);
            out.parent.push_back(t);
        }
    }
    out.finalize(&labels);
    return out;
}

/// Conforming red-green-blue refinement: every marked element is refined
/// (red); green/blue closure keeps the mesh conforming.
inline Triangulation rgb_refine(const Triangulation& mesh, const MarkSet& marked) {
    std::vector<bool> split(mesh.n_sides(), false);
    for (int t : marked) {
        if (t < 0 || t >= mesh.n_elements()) throw std::invalid_argument("rgb_refine: bad mark");
        for (int s : mesh.tri_sides[t]) split[s] = true;
    }
    // closure: an element with any split side must split its reference edge
    for (int pass = 0;; ++pass) {
        if (pass > mesh.n_sides() + 2) throw std::runtime_error("rgb_refine: closure did not terminate");
        bool changed = false;
        for (int t = 0; t < mesh.n_elements(); ++t) {
            const auto& ts = mesh.tri_sides[t];
            const bool any = split[ts[0]] || split[ts[1]] || split[ts[2]];
            if (any && !split[ts[mesh.ref_edge[t]]]) {
                split[ts[mesh.ref_edge[t]]] = true;
                changed = true;
            }
        }
        if (!changed) break;
    }

    Triangulation out;
    out.vertices = mesh.vertices;
    std::vector<int> midpoint_vertex(mesh.n_sides(), -1);
    std::map<std::pair<int, int>, BoundaryLabel> labels;
    for (int s = 0; s < mesh.n_sides(); ++s) {
        const auto& sd = mesh.sides[s];
        if (split[s]) {
            midpoint_vertex[s] = out.n_vertices();
            out.vertices.push_back(sd.midpoint);
        }
        if (sd.t_plus < 0) {
            if (split[s]) {
                labels[detail::ordered(sd.v0, midpoint_vertex[s])] = sd.label;
                labels[detail::ordered(midpoint_vertex[s], sd.v1)] = sd.label;
            } else {
                labels[detail::ordered(sd.v0, sd.v1)] = sd.label;
            }
        }
    }

    auto emit = [&](const detail::Child& ch, int parent) {
        out.tris.push_back(ch.v);
        out.ref_edge.push_back(ch.ref);
        out.parent.push_back(parent);
    };
    for (int t = 0; t < mesh.n_elements(); ++t) {
        const auto& ts = mesh.tri_sides[t];
        const int r = mesh.ref_edge[t];
        const int nsplit = int(split[ts[0]]) + int(split[ts[1]]) + int(split[ts[2]]);
        if (nsplit == 0) {
            emit({mesh.tris[t], r}, t);
            continue;
        }
        if (nsplit == 3) {
            const auto& tri = mesh.tris[t];
            const int a = tri[(r + 1) % 3], b = tri[(r + 2) % 3], c = tri[r];
            const int mab = midpoint_vertex[ts[r]];
            const int mbc = midpoint_vertex[ts[(r + 1) % 3]];
            const int mca = midpoint_vertex[ts[(r + 2) % 3]];
            emit({{a, mab, mca}, 2}, t);
            emit({{mab, b, mbc}, 2}, t);
            emit({{mca, mbc, c}, 2}, t);
            emit({{mbc, mca, mab}, 2}, t);
            continue;
        }
        // green (reference edge only) or blue (reference edge plus one more):
        // bisect the reference edge, then bisect the child owning the second
        // split edge through its inherited reference edge
        auto children = detail::bisect(mesh.tris[t], r, midpoint_vertex[ts[r]]);
        for (const auto& ch : children) {
            const auto key = detail::ordered(ch.v[(ch.ref + 1) % 3], ch.v[(ch.ref + 2) % 3]);
            int old_side = -1;
            for (int k = 0; k < 3; ++k)
                if (detail::ordered(mesh.tris[t][(k + 1) % 3], mesh.tris[t][(k + 2) % 3]) == key)
                    old_side = ts[k];
            if (old_side >= 0 && split[old_side]) {
                auto grand = detail::bisect(ch.v, ch.ref, midpoint_vertex[old_side]);
                emit(grand[0], t);
                emit(grand[1], t);
            } else {
                emit(ch, t);
            }
        }
    }
    out.finalize(&labels);
    return out;
}

/// Doerfler bulk marking: the minimal set (greedy on sorted indicators, ties
/// broken toward lower element index) with sum >= theta^2 * total.
inline MarkSet doerfler_mark(const std::vector<double>& indicators, double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("doerfler_mark: theta in (0,1)");
    double total = 0.0;
    for (double v : indicators) {
        if (v < 0.0) throw std::invalid_argument("doerfler_mark: negative indicator");
        total += v;
    }
    std::vector<int> order(indicators.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (indicators[a] != indicators[b]) return indicators[a] > indicators[b];
        return a < b;
    });
    MarkSet marks;
    double acc = 0.0;
    const double target = theta * theta * total;
    for (int i : order) {
        if (acc >= target) break;
        marks.push_back(i);
        acc += indicators[i];
    }
    std::sort(marks.begin(), marks.end());
    return marks;
}

} // namespace crfem
