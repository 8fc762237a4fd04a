#pragma once

// File emission: legacy-VTK ASCII meshes with per-element scalars, CSV
// tables (15 significant digits), JSON record dumps, and hand-drawn SVG
// log-log plots with reference slope triangles.

#include "crfem/afem.hpp"
#include "crfem/mesh.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace crfem {

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

inline std::string fmt15(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

} // namespace detail

/// Legacy VTK (ASCII, unstructured grid) with optional per-element scalars.
inline void write_vtk(const Triangulation& m, const std::string& path,
                      const std::map<std::string, std::vector<double>>& cell_scalars = {}) {
    std::ofstream out = detail::open_out(path);
    out << "# vtk DataFile Version 3.0\n";
    out << "crfem mesh\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << m.n_vertices() << " double\n";
    for (const Vec2& v : m.vertices)
        out << detail::fmt15(v.x) << " " << detail::fmt15(v.y) << " 0\n";
    out << "CELLS " << m.n_elements() << " " << 4 * m.n_elements() << "\n";
    for (const auto& t : m.tris) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    out << "CELL_TYPES " << m.n_elements() << "\n";
    for (int t = 0; t < m.n_elements(); ++t) out << "5\n";
    if (!cell_scalars.empty()) {
        out << "CELL_DATA " << m.n_elements() << "\n";
        for (const auto& [name, values] : cell_scalars) {
            if (static_cast<int>(values.size()) != m.n_elements())
                throw std::invalid_argument("write_vtk: field '" + name + "' has wrong size");
            out << "SCALARS " << name << " double 1\n";
            out << "LOOKUP_TABLE default\n";
            for (double v : values) out << detail::fmt15(v) << "\n";
        }
    }
}

/// Full AfemRecord dump. `meta` entries are copied into the header object.
inline void write_records_json(const std::vector<std::vector<AfemRecord>>& runs,
                               const std::vector<nlohmann::json>& run_meta, const std::string& path) {
    nlohmann::json root = nlohmann::json::array();
    for (size_t i = 0; i < runs.size(); ++i) {
        nlohmann::json run;
        run["meta"] = i < run_meta.size() ? run_meta[i] : nlohmann::json::object();
        nlohmann::json levels = nlohmann::json::array();
        for (const AfemRecord& r : runs[i]) {
            levels.push_back({{"level", r.level},
                              {"n_dofs", r.n_dofs},
                              {"n_elements", r.n_elements},
                              {"eta2", r.eta2},
                              {"eta2_a", r.eta2_a},
                              {"eta2_b", r.eta2_b},
                              {"rho2", r.rho2},
                              {"e_f", r.e_f},
                              {"e_fstar", r.e_fstar},
                              {"newton_iterations", r.newton_iterations},
                              {"wall_time_s", r.wall_time_s}});
        }
        run["levels"] = levels;
        root.push_back(run);
    }
    std::ofstream out = detail::open_out(path);
    out << root.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// SVG log-log plot

struct PlotSeries {
    std::string label;
    std::string color;
    bool dashed = false;
    std::vector<std::pair<double, double>> points; // (N, value), both positive
};

struct SlopeTriangle {
    double slope;  // e.g. -1.0 or -0.5
    double anchor_x, anchor_y; // in fractions of the plot range [0,1]
};

/// Minimal hand-emitted log-log plot: axes with decade ticks, one polyline
/// per series, a legend, and annotated reference slope triangles.
inline void write_svg_loglog(const std::vector<PlotSeries>& series,
                             const std::vector<SlopeTriangle>& triangles, const std::string& title,
                             const std::string& xlabel, const std::string& path) {
    const double width = 720, height = 540;
    const double ml = 70, mr = 20, mt = 40, mb = 50;

    double lx0 = 1e300, lx1 = -1e300, ly0 = 1e300, ly1 = -1e300;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            if (!(x > 0.0 && y > 0.0)) continue;
            lx0 = std::min(lx0, std::log10(x));
            lx1 = std::max(lx1, std::log10(x));
            ly0 = std::min(ly0, std::log10(y));
            ly1 = std::max(ly1, std::log10(y));
        }
    if (lx0 > lx1) { lx0 = 0; lx1 = 1; ly0 = 0; ly1 = 1; }
    lx0 = std::floor(lx0); lx1 = std::ceil(lx1 + 1e-9);
    ly0 = std::floor(ly0); ly1 = std::ceil(ly1 + 1e-9);

    auto px = [&](double logx) { return ml + (logx - lx0) / (lx1 - lx0) * (width - ml - mr); };
    auto py = [&](double logy) { return height - mb - (logy - ly0) / (ly1 - ly0) * (height - mt - mb); };

    std::ofstream out = detail::open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
        << "</text>\n";

    // decade grid and ticks
    for (int e = static_cast<int>(lx0); e <= static_cast<int>(lx1); ++e) {
        const double x = px(e);
        out << "<line x1=\"" << x << "\" y1=\"" << py(ly0) << "\" x2=\"" << x << "\" y2=\"" << py(ly1)
            << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << x << "\" y=\"" << height - mb + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">1e" << e << "</text>\n";
    }
    for (int e = static_cast<int>(ly0); e <= static_cast<int>(ly1); ++e) {
        const double y = py(e);
        out << "<line x1=\"" << px(lx0) << "\" y1=\"" << y << "\" x2=\"" << px(lx1) << "\" y2=\"" << y
            << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << ml - 6 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-size=\"11\">1e" << e << "</text>\n";
    }
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << width - ml - mr << "\" height=\""
        << height - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel << "</text>\n";

    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
        if (s.dashed) out << " stroke-dasharray=\"6 4\"";
        out << " points=\"";
        for (auto [x, y] : s.points)
            if (x > 0.0 && y > 0.0) out << px(std::log10(x)) << "," << py(std::log10(y)) << " ";
        out << "\"/>\n";
        for (auto [x, y] : s.points)
            if (x > 0.0 && y > 0.0)
                out << "<circle cx=\"" << px(std::log10(x)) << "\" cy=\"" << py(std::log10(y))
                    << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
    }

    for (const auto& tri : triangles) {
        // one decade wide, rise per the slope
        const double ax = lx0 + tri.anchor_x * (lx1 - lx0);
        const double ay = ly0 + tri.anchor_y * (ly1 - ly0);
        const double bx = ax + 1.0, by = ay + tri.slope;
        out << "<polygon fill=\"none\" stroke=\"#555555\" points=\"" << px(ax) << "," << py(ay) << " "
            << px(bx) << "," << py(ay) << " " << px(bx) << "," << py(by) << "\"/>\n";
        out << "<text x=\"" << px(bx) + 5 << "\" y=\"" << (py(ay) + py(by)) / 2
            << "\" font-size=\"11\">" << tri.slope << "</text>\n";
    }

    double ly = mt + 14;
    for (const auto& s : series) {
        out << "<line x1=\"" << width - mr - 170 << "\" y1=\"" << ly - 4 << "\" x2=\"" << width - mr - 140
            << "\" y2=\"" << ly - 4 << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"";
        if (s.dashed) out << " stroke-dasharray=\"6 4\"";
        out << "/>\n";
        out << "<text x=\"" << width - mr - 134 << "\" y=\"" << ly << "\" font-size=\"12\">" << s.label
            << "</text>\n";
        ly += 16;
    }
    out << "</svg>\n";
}

} // namespace crfem
