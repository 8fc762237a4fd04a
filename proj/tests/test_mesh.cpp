#include "crfem/mesh.hpp"

#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <iostream>
#include <set>

using namespace crfem;
using Catch::Approx;

namespace {

// canonical signature of an element set: sorted vertex coordinate triples
std::multiset<std::array<double, 6>> element_signature(const Triangulation& m) {
    std::multiset<std::array<double, 6>> sig;
    for (const auto& tri : m.tris) {
        std::array<std::pair<double, double>, 3> pts;
        for (int k = 0; k < 3; ++k) pts[k] = {m.vertices[tri[k]].x, m.vertices[tri[k]].y};
        std::sort(pts.begin(), pts.end());
        sig.insert({pts[0].first, pts[0].second, pts[1].first, pts[1].second, pts[2].first, pts[2].second});
    }
    return sig;
}

double chunkiness(const Triangulation& m) {
    double worst = 0.0;
    for (int t = 0; t < m.n_elements(); ++t) {
        double per = 0.0;
        for (int k = 0; k < 3; ++k)
            per += (m.vertices[m.tris[t][(k + 2) % 3]] - m.vertices[m.tris[t][(k + 1) % 3]]).norm();
        const double inscribed_diam = 4.0 * m.area[t] / per;
        worst = std::max(worst, m.h_t[t] / inscribed_diam);
    }
    return worst;
}

} // namespace

TEST_CASE("square mesh counts and geometry") {
    const Triangulation m1 = build_square_mesh(1);
    CHECK(m1.n_elements() == 2);
    CHECK(m1.n_vertices() == 4);
    CHECK(m1.n_sides() == 5);
    CHECK(m1.n_interior_sides() == 1);

    const Triangulation m2 = build_square_mesh(2);
    CHECK(m2.n_elements() == 8);
    CHECK(m2.n_vertices() == 9);
    // Euler relation V - E + T = 1 for the simply connected domain
    CHECK(m2.n_vertices() - m2.n_sides() + m2.n_elements() == 1);
    CHECK(m2.avg_mesh_size() == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

    for (int n : {1, 2, 3, 7}) {
        const Triangulation m = build_square_mesh(n);
        CHECK(m.total_area() == Approx(4.0).epsilon(1e-12));
        CHECK(m.n_elements() == 2 * n * n);
    }
    CHECK_THROWS_AS(build_square_mesh(0), std::invalid_argument);
}

TEST_CASE("element and side midpoints") {
    const Triangulation m = build_square_mesh(3);
    for (int t = 0; t < m.n_elements(); ++t) {
        const Vec2 x = (m.vertices[m.tris[t][0]] + m.vertices[m.tris[t][1]] + m.vertices[m.tris[t][2]]) / 3.0;
        CHECK((m.barycenter[t] - x).norm() == Approx(0.0).margin(1e-15));
    }
    for (const Side& s : m.sides) {
        const Vec2 x = (m.vertices[s.v0] + m.vertices[s.v1]) / 2.0;
        CHECK((s.midpoint - x).norm() == Approx(0.0).margin(1e-15));
        CHECK(s.normal.norm() == Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("L-shape initial mesh") {
    const Triangulation m = build_lshape_mesh();
    CHECK(m.n_elements() == 96);
    CHECK(m.n_vertices() == 65);
    CHECK(m.total_area() == Approx(3.0).epsilon(1e-12));
    for (int t = 0; t < m.n_elements(); ++t) {
        const Vec2 c = m.barycenter[t];
        CHECK_FALSE((c.x > 0.0 && c.y < 0.0)); // removed quadrant interior
    }
    // all boundary sides are Dirichlet by construction
    for (const Side& s : m.sides)
        if (s.t_plus < 0) CHECK(s.label == BoundaryLabel::dirichlet);
}

TEST_CASE("red refinement") {
    const Triangulation m0 = build_lshape_mesh();
    const Triangulation m1 = red_refine(m0);
    CHECK(m1.n_elements() == 384);
    CHECK(m1.total_area() == Approx(3.0).epsilon(1e-12));
    for (int t = 0; t < m1.n_elements(); ++t) {
        const int p = m1.parent[t];
        CHECK(m1.h_t[t] == Approx(m0.h_t[p] / 2.0).epsilon(1e-13));
        CHECK(m1.area[t] == Approx(m0.area[p] / 4.0).epsilon(1e-13));
    }

    Triangulation m = build_square_mesh(1);
    for (int k = 1; k <= 4; ++k) {
        m = red_refine(m);
        CHECK(m.n_elements() == 2 * (1 << (2 * k)));
        CHECK(m.total_area() == Approx(4.0).epsilon(1e-12));
    }
}

TEST_CASE("rgb refinement basics") {
    const Triangulation m0 = build_lshape_mesh();

    const Triangulation same = rgb_refine(m0, {});
    CHECK(element_signature(same) == element_signature(m0));

    MarkSet all(m0.n_elements());
    for (int t = 0; t < m0.n_elements(); ++t) all[t] = t;
    CHECK(element_signature(rgb_refine(m0, all)) == element_signature(red_refine(m0)));

    const Triangulation one = rgb_refine(m0, {17});
    CHECK(one.total_area() == Approx(3.0).epsilon(1e-12));
    int children = 0;
    for (int t = 0; t < one.n_elements(); ++t)
        if (one.parent[t] == 17 && one.area[t] < m0.area[17] - 1e-14) ++children;
    CHECK(children >= 2);
    CHECK(one.min_angle() >= 0.5 * m0.min_angle() - 1e-12);
    CHECK_THROWS_AS(rgb_refine(m0, MarkSet{-1}), std::invalid_argument);
}

TEST_CASE("shape regularity across 20 rgb refinements") {
    oracle::Rng rng(31);
    Triangulation m = build_lshape_mesh();
    const double angle0 = m.min_angle();
    double worst_chunk = chunkiness(m);
    for (int level = 0; level < 20; ++level) {
        MarkSet marks;
        for (int i = 0; i < 6; ++i)
            marks.push_back(static_cast<int>(rng.uniform(0.0, 1.0) * m.n_elements()));
        std::sort(marks.begin(), marks.end());
        marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
        m = rgb_refine(m, marks);
        REQUIRE(m.min_angle() >= 0.5 * angle0 - 1e-12);
        worst_chunk = std::max(worst_chunk, chunkiness(m));
    }
    std::cout << "[mesh] 20 rgb levels: " << m.n_elements() << " elements, min angle "
              << m.min_angle() * 180.0 / 3.14159265358979 << " deg, max chunkiness " << worst_chunk
              << "\n";
    CHECK(std::isfinite(worst_chunk));
}

TEST_CASE("red refinement keeps chunkiness") {
    Triangulation m = build_square_mesh(2);
    const double c0 = chunkiness(m);
    for (int k = 0; k < 3; ++k) {
        m = red_refine(m);
        CHECK(chunkiness(m) <= c0 * (1.0 + 1e-12)); // children are similar copies
    }
}

TEST_CASE("doerfler marking") {
    CHECK(doerfler_mark({4.0, 3.0, 2.0, 1.0}, 0.5) == MarkSet{0});
    CHECK(doerfler_mark({1.0, 3.0, 2.0, 4.0}, 0.5) == MarkSet{3});
    CHECK(doerfler_mark({4.0, 3.0, 2.0, 1.0}, 0.999) == MarkSet{0, 1, 2, 3});
    CHECK(doerfler_mark({0.0, 0.0}, 0.5).empty());
    // ties break toward the lower element index
    CHECK(doerfler_mark({2.0, 2.0, 2.0, 2.0}, 0.49) == MarkSet{0});
    CHECK_THROWS_AS(doerfler_mark({1.0, -0.5}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(doerfler_mark({1.0}, 1.5), std::invalid_argument);

    // exhaustive minimality on small random instances
    oracle::Rng rng(32);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 8 + trial % 8;
        std::vector<double> ind(n);
        double total = 0.0;
        for (double& v : ind) {
            v = rng.uniform(0.0, 5.0);
            total += v;
        }
        const double theta = rng.uniform(0.2, 0.9);
        const MarkSet marks = doerfler_mark(ind, theta);
        double acc = 0.0;
        for (int i : marks) acc += ind[i];
        REQUIRE(acc >= theta * theta * total - 1e-12);

        size_t best = n + 1;
        for (int mask = 0; mask < (1 << n); ++mask) {
            double s = 0.0;
            int card = 0;
            for (int i = 0; i < n; ++i)
                if (mask & (1 << i)) {
                    s += ind[i];
                    ++card;
                }
            if (s >= theta * theta * total) best = std::min<size_t>(best, card);
        }
        REQUIRE(marks.size() == best);
    }
}

TEST_CASE("patches and side queries") {
    const Triangulation m = build_square_mesh(4);
    int max_card = 0;
    for (int t = 0; t < m.n_elements(); ++t) {
        const auto patch = m.patch_elements(t);
        CHECK(std::find(patch.begin(), patch.end(), t) != patch.end());
        double area = 0.0;
        for (int e : patch) area += m.area[e];
        CHECK(area > m.area[t]);
        max_card = std::max(max_card, static_cast<int>(m.sides_touching(t).size()));
        for (int s : m.sides_touching(t)) {
            const Side& sd = m.sides[s];
            const bool touches = sd.v0 == m.tris[t][0] || sd.v0 == m.tris[t][1] || sd.v0 == m.tris[t][2] ||
                                 sd.v1 == m.tris[t][0] || sd.v1 == m.tris[t][1] || sd.v1 == m.tris[t][2];
            CHECK(touches);
        }
    }
    std::cout << "[mesh] max card(S_h(T)) on 4x4 square: " << max_card << "\n";
    CHECK(max_card <= 30);

    for (int s = 0; s < m.n_sides(); ++s) {
        const auto elems = m.side_elements(s);
        if (m.sides[s].t_plus < 0)
            CHECK(elems.size() == 1);
        else
            CHECK(elems.size() == 2);
    }
}

TEST_CASE("interior normals point from lower to higher element index") {
    const Triangulation m = build_square_mesh(3);
    for (const Side& s : m.sides) {
        if (s.t_plus < 0) continue;
        CHECK(s.t_minus < s.t_plus);
        CHECK(s.normal.dot(m.barycenter[s.t_plus] - m.barycenter[s.t_minus]) > 0.0);
    }
}

TEST_CASE("boundary relabeling and inheritance") {
    Triangulation m = build_square_mesh(2);
    m.relabel_boundary([](Vec2 x) { return x.x > 1.0 - 1e-12; }, BoundaryLabel::neumann);
    int neumann = 0;
    for (const Side& s : m.sides) neumann += (s.label == BoundaryLabel::neumann);
    CHECK(neumann == 2);

    const Triangulation r = red_refine(m);
    int neumann_r = 0;
    for (const Side& s : r.sides) {
        neumann_r += (s.label == BoundaryLabel::neumann);
        if (s.label == BoundaryLabel::neumann) CHECK(s.midpoint.x == Approx(1.0));
    }
    CHECK(neumann_r == 4);
}
