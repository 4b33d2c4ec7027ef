// lokal: command-line front end for the experiment harness.
//
//   lokal run --data breast-cancer --label-map 2:-1,4:+1 --method ldmkl \
//             --kernels linear,poly:2,gauss:grid --repeats 20 --scale minmax \
//             --report out.json --csv out.csv
//   lokal synth --per-class 500 --seed 1 --out fig1.libsvm
//   lokal memory --m 3 --n 1000,2000,4000 --out memory.dat

#include "lokal/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

struct RunFlags {
    std::string config_path;
    std::string data;
    std::string synthetic;
    std::string label_map;
    std::string method;
    std::string kernels;
    std::string scale;
    std::string report;
    std::string csv;
    int repeats = 0;
    std::uint64_t seed = 0;
    double train_frac = 0.0;
    double c = 0.0;
    int threads = 0;
    std::vector<double> gamma_grid;
};

lokal::ExperimentConfig build_config(const CLI::App& cmd, const RunFlags& f) {
    lokal::ExperimentConfig cfg;
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw lokal::error("cannot open config file '" + f.config_path + "'");
        lokal::apply_config_json(cfg, nlohmann::json::parse(in));
    }
    auto given = [&](const char* name) { return cmd.count(name) > 0; };
    if (given("--data")) {
        cfg.data_path = f.data;
        cfg.synthetic.clear();
    }
    if (given("--synthetic")) {
        cfg.synthetic = f.synthetic;
        cfg.data_path.clear();
    }
    if (given("--label-map")) cfg.label_map = lokal::parse_label_map(f.label_map);
    if (given("--method")) cfg.method = lokal::parse_method(f.method);
    if (given("--kernels")) cfg.kernels = lokal::parse_kernel_list(f.kernels);
    if (given("--repeats")) cfg.repeats = f.repeats;
    if (given("--seed")) cfg.seed = f.seed;
    if (given("--train-frac")) cfg.train_fraction = f.train_frac;
    if (given("--c")) cfg.train.svm.C = f.c;
    if (given("--scale")) cfg.scale = lokal::parse_scale_mode(f.scale);
    if (given("--threads")) cfg.threads = f.threads;
    if (given("--gamma-grid")) cfg.gamma_grid = f.gamma_grid;
    if (given("--report")) cfg.report_path = f.report;
    if (given("--csv")) cfg.csv_path = f.csv;
    return cfg;
}

int run_command(const CLI::App& cmd, const RunFlags& f) {
    const lokal::ExperimentConfig cfg = build_config(cmd, f);
    const lokal::ExperimentReport report = lokal::run_experiment(cfg);
    if (!cfg.report_path.empty()) lokal::emit_report(report, lokal::ReportFormat::json, cfg.report_path);
    if (!cfg.csv_path.empty()) lokal::emit_report(report, lokal::ReportFormat::csv, cfg.csv_path);
    std::cout << lokal::to_string(cfg.method) << ": accuracy " << report.accuracy.mean << " (" << report.accuracy.stddev << "), support fraction "
              << report.support_fraction.mean << " (" << report.support_fraction.stddev << "), fit time " << report.wall_time_s.mean
              << " s, memory " << report.memory_bytes << " bytes\n";
    std::size_t flagged = 0;
    for (const auto& r : report.runs) flagged += (r.solver_converged && r.outer_converged) ? 0 : 1;
    if (flagged > 0) std::cout << flagged << " of " << report.runs.size() << " runs did not converge\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Localized multiple kernel learning experiments"};
    app.require_subcommand(1);

    RunFlags rf;
    auto* run = app.add_subcommand("run", "repeated train/test experiment");
    run->add_option("--config", rf.config_path, "JSON config; flags override its keys");
    run->add_option("--data", rf.data, "libsvm data file");
    run->add_option("--synthetic", rf.synthetic, "synthetic data set (fig1)");
    run->add_option("--label-map", rf.label_map, "raw label mapping, e.g. 2:-1,4:+1");
    run->add_option("--method", rf.method, "uniform|lmkl|swmkl|ldmkl|clmkl");
    run->add_option("--kernels", rf.kernels, "comma-separated kernel specs (linear, poly:<d>[:<coef0>[:<scale>]], gauss:<gamma>, gauss:grid)");
    run->add_option("--repeats", rf.repeats, "number of random splits");
    run->add_option("--seed", rf.seed, "base seed; run t uses seed + t");
    run->add_option("--train-frac", rf.train_frac, "training fraction");
    run->add_option("--c", rf.c, "SVM box constraint");
    run->add_option("--scale", rf.scale, "none|minmax|zscore");
    run->add_option("--gamma-grid", rf.gamma_grid, "Gaussian gamma candidates")->delimiter(',');
    run->add_option("--threads", rf.threads, "worker threads across runs");
    run->add_option("--report", rf.report, "JSON report path");
    run->add_option("--csv", rf.csv, "CSV report path");

    lokal::Index per_class = 500;
    std::uint64_t synth_seed = 0;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "write the two-region synthetic set in libsvm format");
    synth->add_option("--per-class", per_class, "points per class");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--out", synth_out, "output path")->required();

    std::uint64_t mem_m = 2;
    std::vector<std::uint64_t> mem_n{1000, 2000, 4000, 8000, 16000};
    std::string mem_out;
    auto* memory = app.add_subcommand("memory", "write an (n, bytes) memory-estimate curve");
    memory->add_option("--m", mem_m, "number of kernels");
    memory->add_option("--n", mem_n, "training set sizes")->delimiter(',');
    memory->add_option("--out", mem_out, "output path (stdout if omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_command(*run, rf);
        if (synth->parsed()) {
            std::ofstream out(synth_out);
            if (!out) throw lokal::error("cannot open '" + synth_out + "' for writing");
            lokal::write_libsvm(out, lokal::synth_fig1(per_class, synth_seed));
            return out ? 0 : 1;
        }
        if (mem_out.empty()) {
            lokal::write_memory_curve(std::cout, mem_n, mem_m);
        } else {
            std::ofstream out(mem_out);
            if (!out) throw lokal::error("cannot open '" + mem_out + "' for writing");
            lokal::write_memory_curve(out, mem_n, mem_m);
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "lokal: " << e.what() << '\n';
        return 1;
    }
}
