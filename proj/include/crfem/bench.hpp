#pragma once

// Benchmark drivers: uniform-refinement EOC sweeps (the convergence tables)
// and the adaptive-vs-uniform runs behind the log-log figure, together with
// their CSV/JSON/SVG emission.

#include "crfem/afem.hpp"
#include "crfem/cases.hpp"
#include "crfem/io.hpp"

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace crfem {

struct EocTable {
    std::vector<double> p_values;
    std::vector<std::vector<double>> errors; // [p][k]
    std::vector<std::vector<double>> eocs;   // [p][k], NaN at k = 0
};

struct UniformSweep {
    std::string case_id;
    double delta = 0.0;
    std::vector<double> p_values;
    std::vector<double> h; // average mesh size per level
    std::vector<std::vector<AfemRecord>> records; // [p][k]
    EocTable table_f;      // EOC of e_F    (Table 1 layout)
    EocTable table_fstar;  // EOC of e_F*   (Table 3 layout)
};

/// Uniform red-refinement sweep over a list of exponents p; levels 0..L-1.
inline UniformSweep run_table_experiment(const std::string& case_id, const std::vector<double>& p_values,
                                         double delta, int levels, const NewtonConfig& newton = {},
                                         const LevelCallback& on_level = {}) {
    if (levels < 2) throw std::invalid_argument("run_table_experiment: levels >= 2");
    UniformSweep sweep;
    sweep.case_id = case_id;
    sweep.delta = delta;
    sweep.p_values = p_values;
    sweep.table_f.p_values = p_values;
    sweep.table_fstar.p_values = p_values;
    for (double p : p_values) {
        AfemConfig cfg{PDelta(p, delta)};
        cfg.newton = newton;
        const ManufacturedCase kase = make_case(case_id, cfg.pd);
        Triangulation mesh = kase.initial_mesh();
        if (sweep.h.empty()) {
            double h = mesh.avg_mesh_size();
            for (int k = 0; k < levels; ++k, h /= 2.0) sweep.h.push_back(h);
        }
        sweep.records.push_back(run_uniform(cfg, kase, std::move(mesh), levels, on_level));

        std::vector<double> ef, efs;
        for (const AfemRecord& r : sweep.records.back()) {
            ef.push_back(r.e_f);
            efs.push_back(r.e_fstar);
        }
        auto with_leading_nan = [](std::vector<double> tail) {
            tail.insert(tail.begin(), std::numeric_limits<double>::quiet_NaN());
            return tail;
        };
        sweep.table_f.errors.push_back(ef);
        sweep.table_f.eocs.push_back(with_leading_nan(eoc(ef, sweep.h)));
        sweep.table_fstar.errors.push_back(efs);
        sweep.table_fstar.eocs.push_back(with_leading_nan(eoc(efs, sweep.h)));
    }
    return sweep;
}

/// CSV with header k,p,e_F,eoc_F,e_Fstar,eoc_Fstar; one row per (k,p).
inline void emit_csv(const UniformSweep& sweep, const std::string& path) {
    std::ofstream out = detail::open_out(path);
    out << "k,p,e_F,eoc_F,e_Fstar,eoc_Fstar\n";
    for (size_t ip = 0; ip < sweep.p_values.size(); ++ip)
        for (size_t k = 0; k < sweep.records[ip].size(); ++k)
            out << k << "," << detail::fmt15(sweep.p_values[ip]) << ","
                << detail::fmt15(sweep.table_f.errors[ip][k]) << ","
                << detail::fmt15(sweep.table_f.eocs[ip][k]) << ","
                << detail::fmt15(sweep.table_fstar.errors[ip][k]) << ","
                << detail::fmt15(sweep.table_fstar.eocs[ip][k]) << "\n";
}

struct FigureRun {
    double p = 2.0;
    double delta = 1e-5;
    double theta = 0.5;
    std::vector<AfemRecord> adaptive;
    std::vector<AfemRecord> uniform;
};

/// Adaptive (rgb + Doerfler) and uniform runs for one p, as plotted per p in
/// the benchmark figure.
inline FigureRun run_figure_experiment(const std::string& case_id, double p, double delta, double theta,
                                       int adaptive_levels, int uniform_levels,
                                       const NewtonConfig& newton = {}, const LevelCallback& on_level = {}) {
    FigureRun run;
    run.p = p;
    run.delta = delta;
    run.theta = theta;
    AfemConfig cfg{PDelta(p, delta)};
    cfg.theta = theta;
    cfg.max_levels = adaptive_levels;
    cfg.newton = newton;
    const ManufacturedCase kase = make_case(case_id, cfg.pd);
    run.adaptive = run_afem(cfg, kase, kase.initial_mesh(), on_level);
    run.uniform = run_uniform(cfg, kase, kase.initial_mesh(), uniform_levels);
    return run;
}

inline void emit_figure_svg(const FigureRun& run, const std::string& path) {
    auto pick = [](const std::vector<AfemRecord>& recs, bool eta) {
        std::vector<std::pair<double, double>> pts;
        for (const AfemRecord& r : recs)
            pts.push_back({static_cast<double>(r.n_dofs), eta ? r.eta2 : r.rho2});
        return pts;
    };
    std::vector<PlotSeries> series = {
        {"eta^2 (adaptive)", "#c02020", false, pick(run.adaptive, true)},
        {"rho^2 (adaptive)", "#e08080", true, pick(run.adaptive, false)},
        {"eta^2 (uniform)", "#2040c0", false, pick(run.uniform, true)},
        {"rho^2 (uniform)", "#8090e0", true, pick(run.uniform, false)},
    };
    const std::string title = "p = " + detail::fmt15(run.p);
    write_svg_loglog(series, {{-1.0, 0.45, 0.75}, {-0.5, 0.15, 0.35}}, title, "N_k", path);
}

/// Least-squares slope of log(y) against log(x) over [first, first+count).
inline double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys, size_t first,
                               size_t count) {
    if (first + count > xs.size() || count < 2 || xs.size() != ys.size())
        throw std::invalid_argument("fit_loglog_slope: bad window");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = first; i < first + count; ++i) {
        const double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(count);
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline double fit_slope_eta2(const std::vector<AfemRecord>& recs, size_t first, size_t count) {
    std::vector<double> xs, ys;
    for (const AfemRecord& r : recs) {
        xs.push_back(static_cast<double>(r.n_dofs));
        ys.push_back(r.eta2);
    }
    return fit_loglog_slope(xs, ys, first, count);
}

inline double fit_slope_rho2(const std::vector<AfemRecord>& recs, size_t first, size_t count) {
    std::vector<double> xs, ys;
    for (const AfemRecord& r : recs) {
        xs.push_back(static_cast<double>(r.n_dofs));
        ys.push_back(r.rho2);
    }
    return fit_loglog_slope(xs, ys, first, count);
}

} // namespace crfem
