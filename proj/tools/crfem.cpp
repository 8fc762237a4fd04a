// Benchmark CLI: uniform-refinement EOC tables and the adaptive-vs-uniform
// estimator decay figure, on the two manufactured problems.
//
//   crfem uniform --p 1.5,2,3 --delta 1e-4 --levels 7 --case square_alpha --out out/
//   crfem afem    --p 1.5,2,2.5,3 --delta 1e-5 --theta 0.5 --levels 20 --case lshape_sigma --out out/
//
// Flags may also be supplied through --config <file.json> with keys mirroring
// the flag names; command-line values take precedence.

#include "crfem/bench.hpp"
#include "crfem/io.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct Options {
    std::vector<double> p_values{2.0};
    double delta = 1e-4;
    double theta = 0.5;
    int levels = 7;
    int uniform_levels = 5;
    std::string case_id = "square_alpha";
    std::string out_dir = "out";
    std::string config_path;
    bool write_vtk = false;
};

void apply_config(const CLI::App& cmd, Options& opt) {
    if (opt.config_path.empty()) return;
    std::ifstream in(opt.config_path);
    if (!in) throw std::runtime_error("cannot read config: " + opt.config_path);
    const nlohmann::json cfg = nlohmann::json::parse(in);
    auto unset = [&](const std::string& flag) { return cmd.count("--" + flag) == 0; };
    if (cfg.contains("p") && unset("p")) opt.p_values = cfg["p"].get<std::vector<double>>();
    if (cfg.contains("delta") && unset("delta")) opt.delta = cfg["delta"].get<double>();
    if (cfg.contains("theta") && unset("theta")) opt.theta = cfg["theta"].get<double>();
    if (cfg.contains("levels") && unset("levels")) opt.levels = cfg["levels"].get<int>();
    if (cfg.contains("uniform_levels") && unset("uniform-levels"))
        opt.uniform_levels = cfg["uniform_levels"].get<int>();
    if (cfg.contains("case") && unset("case")) opt.case_id = cfg["case"].get<std::string>();
    if (cfg.contains("out") && unset("out")) opt.out_dir = cfg["out"].get<std::string>();
    if (cfg.contains("write_vtk") && unset("write-vtk")) opt.write_vtk = cfg["write_vtk"].get<bool>();
}

std::string trimmed(double v) {
    std::string s = crfem::detail::fmt15(v);
    return s;
}

crfem::LevelCallback vtk_callback(const Options& opt, const std::string& prefix) {
    if (!opt.write_vtk) return {};
    return [dir = opt.out_dir, prefix](int level, const crfem::Triangulation& mesh,
                                       const crfem::EstimatorReport& est, const crfem::CrFunction&) {
        std::map<std::string, std::vector<double>> fields;
        fields["eta2"] = est.eta;
        fields["eta2_a"] = est.eta_a;
        fields["eta2_b"] = est.eta_b;
        crfem::write_vtk(mesh, dir + "/" + prefix + "mesh_k" + std::to_string(level) + ".vtk", fields);
    };
}

int run_uniform_cmd(const CLI::App& cmd, Options opt) {
    apply_config(cmd, opt);
    std::filesystem::create_directories(opt.out_dir);
    const crfem::UniformSweep sweep = crfem::run_table_experiment(
        opt.case_id, opt.p_values, opt.delta, opt.levels, {}, vtk_callback(opt, ""));
    crfem::emit_csv(sweep, opt.out_dir + "/table1.csv");
    crfem::emit_csv(sweep, opt.out_dir + "/table3.csv");
    std::vector<nlohmann::json> meta;
    for (double p : opt.p_values)
        meta.push_back({{"mode", "uniform"}, {"case", opt.case_id}, {"p", p}, {"delta", opt.delta}});
    crfem::write_records_json(sweep.records, meta, opt.out_dir + "/records.json");

    for (size_t ip = 0; ip < opt.p_values.size(); ++ip) {
        const auto& recs = sweep.records[ip];
        std::cout << "p = " << opt.p_values[ip] << ":";
        for (size_t k = 1; k < recs.size(); ++k)
            std::cout << "  EOC_" << k << "(e_F) = " << sweep.table_f.eocs[ip][k];
        std::cout << "\n";
    }
    std::cout << "wrote " << opt.out_dir << "/table1.csv, table3.csv, records.json\n";
    return 0;
}

int run_afem_cmd(const CLI::App& cmd, Options opt) {
    apply_config(cmd, opt);
    std::filesystem::create_directories(opt.out_dir);
    std::vector<std::vector<crfem::AfemRecord>> runs;
    std::vector<nlohmann::json> meta;
    for (double p : opt.p_values) {
        const crfem::FigureRun run = crfem::run_figure_experiment(
            opt.case_id, p, opt.delta, opt.theta, opt.levels, opt.uniform_levels, {},
            vtk_callback(opt, "p" + trimmed(p) + "_"));
        crfem::emit_figure_svg(run, opt.out_dir + "/figure1_p" + trimmed(p) + ".svg");
        runs.push_back(run.adaptive);
        meta.push_back({{"mode", "adaptive"},
                        {"case", opt.case_id},
                        {"p", p},
                        {"delta", opt.delta},
                        {"theta", opt.theta}});
        runs.push_back(run.uniform);
        meta.push_back({{"mode", "uniform"}, {"case", opt.case_id}, {"p", p}, {"delta", opt.delta}});
        const size_t n = run.adaptive.size();
        if (n >= 2) {
            const size_t window = std::min<size_t>(8, n);
            std::cout << "p = " << p
                      << ": adaptive eta^2 slope = " << crfem::fit_slope_eta2(run.adaptive, n - window, window)
                      << " over last " << window << " of " << n << " levels\n";
        }
    }
    crfem::write_records_json(runs, meta, opt.out_dir + "/records.json");
    std::cout << "wrote " << opt.out_dir << "/figure1_p*.svg, records.json\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Crouzeix-Raviart p-Dirichlet benchmark"};
    app.require_subcommand(1);

    Options uopt;
    CLI::App* uniform = app.add_subcommand("uniform", "uniform-refinement EOC tables");
    uniform->add_option("--p", uopt.p_values, "exponent list")->delimiter(',');
    uniform->add_option("--delta", uopt.delta, "regularization shift");
    uniform->add_option("--levels", uopt.levels, "number of levels (k = 0..levels-1)");
    uniform->add_option("--case", uopt.case_id, "manufactured case id")
        ->check(CLI::IsMember({"square_alpha", "lshape_sigma"}));
    uniform->add_option("--out", uopt.out_dir, "output directory");
    uniform->add_option("--config", uopt.config_path, "JSON config mirroring the flags");
    uniform->add_flag("--write-vtk", uopt.write_vtk, "emit mesh_k<level>.vtk");

    Options aopt;
    aopt.delta = 1e-5;
    aopt.levels = 20;
    aopt.case_id = "lshape_sigma";
    CLI::App* afem = app.add_subcommand("afem", "adaptive refinement figure");
    afem->add_option("--p", aopt.p_values, "exponent list")->delimiter(',');
    afem->add_option("--delta", aopt.delta, "regularization shift");
    afem->add_option("--theta", aopt.theta, "Doerfler bulk parameter");
    afem->add_option("--levels", aopt.levels, "adaptive levels");
    afem->add_option("--uniform-levels", aopt.uniform_levels, "uniform comparison levels");
    afem->add_option("--case", aopt.case_id, "manufactured case id")
        ->check(CLI::IsMember({"square_alpha", "lshape_sigma"}));
    afem->add_option("--out", aopt.out_dir, "output directory");
    afem->add_option("--config", aopt.config_path, "JSON config mirroring the flags");
    afem->add_flag("--write-vtk", aopt.write_vtk, "emit mesh_k<level>.vtk");

    CLI11_PARSE(app, argc, argv);
    try {
        if (uniform->parsed()) return run_uniform_cmd(*uniform, uopt);
        if (afem->parsed()) return run_afem_cmd(*afem, aopt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
