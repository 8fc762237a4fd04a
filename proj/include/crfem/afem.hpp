#pragma once

// Adaptive loop: Solve -> Estimate -> Mark -> Refine, with one record per
// level, plus the uniform-refinement counterpart. Solves are warm-started by
// midpoint sampling of the previous level's element-wise affine solution
// (children are nested in their parents).

#include "crfem/cases.hpp"
#include "crfem/duality.hpp"
#include "crfem/estimator.hpp"
#include "crfem/fespace.hpp"
#include "crfem/mesh.hpp"
#include "crfem/solver.hpp"

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

namespace crfem {

struct AfemConfig {
    PDelta pd;
    double theta = 0.5;
    double eps_stop = 0.0; // 0: run to max_levels
    int max_levels = 20;
    NewtonConfig newton;
    int error_degree = 7;     // exact-error quadrature
    int estimator_degree = 5; // non-projected estimator terms
    int source_degree = 7;    // f_h = Pi_h f
};

struct AfemRecord {
    int level = 0;
    int n_dofs = 0;     // N_k = card(S_h^i)
    int n_elements = 0;
    double eta2 = 0.0;
    double eta2_a = 0.0;
    double eta2_b = 0.0;
    double rho2 = 0.0;   // |F(grad v_k) - F(grad u)|^2
    double e_f = 0.0;
    double e_fstar = 0.0;
    int newton_iterations = 0;
    double wall_time_s = 0.0;
};

/// Observer invoked once per level, e.g. for VTK dumps.
using LevelCallback =
    std::function<void(int level, const Triangulation&, const EstimatorReport&, const CrFunction&)>;

namespace detail {

// Transfer a CR solution to a refined mesh: each new side midpoint is
// evaluated in the parent element's affine representative (averaged over the
// one or two incident children).
inline CrFunction transfer_cr(const CrFunction& prev, const CrSpace& target) {
    const Triangulation& m = target.mesh();
    CrFunction out(target);
    for (int s = 0; s < m.n_sides(); ++s) {
        const int dof = target.dof_of_side(s);
        if (dof < 0) continue;
        double sum = 0.0;
        int count = 0;
        for (int t : m.side_elements(s)) {
            const int p = m.parent[t];
            sum += prev.value(p < 0 ? t : p, m.sides[s].midpoint);
            ++count;
        }
        out.coeffs[dof] = sum / count;
    }
    return out;
}

struct LevelState {
    std::unique_ptr<Triangulation> mesh;
    std::unique_ptr<CrSpace> cr;
    std::unique_ptr<S1Space> s1;
    std::unique_ptr<Rt0Space> rt;

    explicit LevelState(Triangulation m) : mesh(std::make_unique<Triangulation>(std::move(m))) {
        cr = std::make_unique<CrSpace>(*mesh);
        s1 = std::make_unique<S1Space>(*mesh);
        rt = std::make_unique<Rt0Space>(*mesh);
    }
};

inline AfemRecord solve_level(const AfemConfig& cfg, const ManufacturedCase& kase, const LevelState& st,
                              const CrFunction* warm_start, int level, EstimatorReport& indicators,
                              CrFunction& u_out) {
    const auto t0 = std::chrono::steady_clock::now();
    const P0Function f_h = project_source(kase, *st.mesh, cfg.source_degree);
    auto [u, report] = newton_solve_cr(cfg.pd, *st.cr, f_h, cfg.newton, warm_start);
    if (!report.converged)
        throw std::runtime_error("afem: Newton did not converge on level " + std::to_string(level));
    const Rt0Function z = marini_reconstruct(cfg.pd, u, f_h, *st.rt);
    const S1Function v = i_av(u, *st.s1);
    indicators = eta_local(cfg.pd, v, u, z, cfg.estimator_degree);

    AfemRecord rec;
    rec.level = level;
    rec.n_dofs = st.mesh->n_interior_sides();
    rec.n_elements = st.mesh->n_elements();
    rec.eta2 = indicators.total;
    rec.eta2_a = indicators.total_a;
    rec.eta2_b = indicators.total_b;
    rec.rho2 = rho_sq(cfg.pd, v, kase, cfg.error_degree);
    rec.e_f = error_f(cfg.pd, u, kase, cfg.error_degree);
    rec.e_fstar = error_fstar(cfg.pd, z, kase, cfg.error_degree);
    rec.newton_iterations = report.iterations;
    rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    u_out = std::move(u);
    return rec;
}

// Shared driver: `refine` maps (state, indicators) to the next mesh, or
// returns an empty optional to stop.
template <class Refine>
std::vector<AfemRecord> drive(const AfemConfig& cfg, const ManufacturedCase& kase, Triangulation mesh0,
                              int levels, const LevelCallback& on_level, Refine&& refine) {
    std::vector<AfemRecord> records;
    auto state = std::make_unique<LevelState>(std::move(mesh0));
    CrFunction u;       // bound to state->cr
    CrFunction warm;    // bound to the *next* state's cr
    bool have_warm = false;
    for (int level = 0; level < levels; ++level) {
        EstimatorReport indicators;
        records.push_back(
            solve_level(cfg, kase, *state, have_warm ? &warm : nullptr, level, indicators, u));
        if (on_level) on_level(level, *state->mesh, indicators, u);
        if (level + 1 == levels) break;
        auto next_mesh = refine(*state, records.back(), indicators);
        if (!next_mesh) break;
        auto next = std::make_unique<LevelState>(std::move(*next_mesh));
        warm = transfer_cr(u, *next->cr); // old state still alive here
        have_warm = true;
        state = std::move(next);
    }
    return records;
}

} // namespace detail

/// Adaptive estimate-mark-refine loop with Doerfler marking and
/// red-green-blue refinement. Stops once eta^2 <= eps_stop or after
/// max_levels records.
inline std::vector<AfemRecord> run_afem(const AfemConfig& cfg, const ManufacturedCase& kase,
                                        Triangulation mesh, const LevelCallback& on_level = {}) {
    if (!(cfg.theta > 0.0 && cfg.theta < 1.0)) throw std::invalid_argument("run_afem: theta in (0,1)");
    return detail::drive(cfg, kase, std::move(mesh), cfg.max_levels, on_level,
                         [&](const detail::LevelState& st, const AfemRecord& rec,
                             const EstimatorReport& ind) -> std::optional<Triangulation> {
                             if (rec.eta2 <= cfg.eps_stop) return std::nullopt;
                             return rgb_refine(*st.mesh, doerfler_mark(ind.eta, cfg.theta));
                         });
}

/// Uniform red-refinement counterpart producing the same records.
inline std::vector<AfemRecord> run_uniform(const AfemConfig& cfg, const ManufacturedCase& kase,
                                           Triangulation mesh, int levels,
                                           const LevelCallback& on_level = {}) {
    if (levels < 1) throw std::invalid_argument("run_uniform: levels >= 1");
    return detail::drive(cfg, kase, std::move(mesh), levels, on_level,
                         [](const detail::LevelState& st, const AfemRecord&,
                            const EstimatorReport&) -> std::optional<Triangulation> {
                             return red_refine(*st.mesh);
                         });
}

} // namespace crfem
