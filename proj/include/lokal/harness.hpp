#pragma once

// Experiment harness: repeated seeded splits, Gaussian bandwidth selection on
// an inner validation split, aggregation and JSON/CSV reports.

#include "lokal/common.hpp"
#include "lokal/data.hpp"
#include "lokal/kernels.hpp"
#include "lokal/lkl.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace lokal {

// ---------------------------------------------------------------------------
// Kernel templates: a kernel spec, or a Gaussian whose gamma is tuned.

struct KernelTemplate {
    KernelSpec spec = LinearKernel{};
    bool tuned = false;

    bool operator==(const KernelTemplate&) const = default;
};

inline KernelTemplate parse_kernel_template(std::string_view text) {
    if (text == "gauss:grid") return KernelTemplate{GaussianKernel{1.0}, true};
    return KernelTemplate{parse_kernel_spec(text), false};
}

inline std::string to_string(const KernelTemplate& t) { return t.tuned ? std::string("gauss:grid") : to_string(t.spec); }

/// Comma-separated kernel list, e.g. "linear,poly:2,gauss:grid".
inline std::vector<KernelTemplate> parse_kernel_list(std::string_view text) {
    std::vector<KernelTemplate> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        const auto item = text.substr(pos, comma - pos);
        if (item.empty()) throw error("empty entry in kernel list '" + std::string(text) + "'");
        out.push_back(parse_kernel_template(item));
        pos = comma + 1;
    }
    return out;
}

inline bool has_tuned(const std::vector<KernelTemplate>& ts) {
    return std::any_of(ts.begin(), ts.end(), [](const KernelTemplate& t) { return t.tuned; });
}

/// Concrete kernels with every tuned Gaussian set to `gamma`.
inline std::vector<KernelSpec> instantiate(const std::vector<KernelTemplate>& ts, double gamma) {
    std::vector<KernelSpec> out;
    for (const auto& t : ts) out.push_back(t.tuned ? KernelSpec{GaussianKernel{gamma}} : t.spec);
    return out;
}

inline std::vector<double> default_gamma_grid() {
    std::vector<double> grid;
    for (int e = -4; e <= 4; ++e) grid.push_back(std::ldexp(1.0, e));
    return grid;
}

// ---------------------------------------------------------------------------
// Configuration and report

struct ExperimentConfig {
    std::string data_path;
    std::string synthetic; // "fig1" or empty
    Index synthetic_per_class = 500;
    std::optional<LabelMap> label_map;
    Method method = Method::ldmkl;
    std::vector<KernelTemplate> kernels = parse_kernel_list("linear,poly:2,gauss:grid");
    int repeats = 20;
    double train_fraction = 0.75;
    std::uint64_t seed = 0;
    TrainConfig train{};
    ScaleMode scale = ScaleMode::none;
    std::vector<double> gamma_grid = default_gamma_grid();
    int threads = 1;
    std::string report_path;
    std::string csv_path;

    void validate() const {
        detail::require(data_path.empty() != synthetic.empty(), "exactly one of a data path or a synthetic set is required");
        detail::require(synthetic.empty() || synthetic == "fig1", "unknown synthetic set (fig1)");
        detail::require(synthetic.empty() || synthetic_per_class >= 10, "synthetic set needs at least 10 points per class");
        detail::require(repeats >= 1, "repeats must be >= 1");
        detail::require(train_fraction > 0.0 && train_fraction < 1.0, "train fraction must be in (0, 1)");
        detail::require(!kernels.empty(), "need at least one kernel");
        detail::require(!has_tuned(kernels) || !gamma_grid.empty(), "gamma grid must be nonempty when a Gaussian kernel is tuned");
        for (double g : gamma_grid) detail::require(g > 0.0 && std::isfinite(g), "gamma grid values must be positive");
        detail::require(threads >= 1, "threads must be >= 1");
        train.validate();
    }
};

struct RunRecord {
    std::uint64_t seed = 0;
    double accuracy = 0.0;
    double support_fraction = 0.0;
    double wall_time_s = 0.0;
    bool solver_converged = true;
    bool outer_converged = true;
    std::optional<double> gamma;
    Index n_train = 0;
    Index n_test = 0;

    bool operator==(const RunRecord&) const = default;
};

struct Summary {
    double mean = 0.0;
    double stddev = 0.0; // population

    bool operator==(const Summary&) const = default;
};

inline Summary summarize(const std::vector<double>& values) {
    Summary s;
    if (values.empty()) return s;
    const auto n = static_cast<double>(values.size());
    for (double v : values) s.mean += v;
    s.mean /= n;
    for (double v : values) s.stddev += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(s.stddev / n);
    return s;
}

struct ExperimentReport {
    nlohmann::json config;
    std::vector<RunRecord> runs;
    Summary accuracy;
    Summary support_fraction;
    Summary wall_time_s;
    std::uint64_t memory_bytes = 0;
    std::vector<std::string> notes;

    bool operator==(const ExperimentReport&) const = default;
};

inline void aggregate(ExperimentReport& report) {
    std::vector<double> acc, sf, wt;
    for (const auto& r : report.runs) {
        acc.push_back(r.accuracy);
        sf.push_back(r.support_fraction);
        wt.push_back(r.wall_time_s);
    }
    report.accuracy = summarize(acc);
    report.support_fraction = summarize(sf);
    report.wall_time_s = summarize(wt);
}

/// Bytes for m component Gram matrices plus one combined matrix in doubles.
inline std::uint64_t memory_estimate(std::uint64_t n, std::uint64_t m) {
    detail::require(n >= 1 && m >= 1, "memory_estimate needs n, m >= 1");
    return (m + 1) * n * n * 8;
}

// ---------------------------------------------------------------------------
// Synthetic data

/// Two-class 2-D set with a quadratic region and a radial region.
///
///   +1: uniform points below the parabola y = x^2 - 1 (margin 0.2), plus a
///       Gaussian blob (sd 0.25, truncated at radius 0.7) centered at (0, 2)
///   -1: uniform points above the parabola (margin 0.2) farther than 1.5 from
///       (0, 2), plus a ring of radius 0.9..1.3 around (0, 2)
///
/// Uniform points come from the box [-2.5, 2.5] x [-3, 5.25]. Each class gets
/// n_per_class points, split evenly between its two parts.
inline Dataset synth_fig1(Index n_per_class = 500, std::uint64_t seed = 0) {
    detail::require(n_per_class >= 10, "synth_fig1 needs n_per_class >= 10");
    constexpr double cx = 0.0, cy = 2.0, margin = 0.2;
    Rng rng(seed);
    Matrix x(2 * n_per_class, 2);
    Vector y(2 * n_per_class);
    Index row = 0;
    auto put = [&](double a, double b, double label) {
        x(row, 0) = a;
        x(row, 1) = b;
        y[row] = label;
        ++row;
    };
    auto box = [&](auto accept, double label) {
        for (;;) {
            const double a = -2.5 + 5.0 * rng.uniform();
            const double b = -3.0 + 8.25 * rng.uniform();
            if (accept(a, b)) return put(a, b, label);
        }
    };
    const Index half = n_per_class / 2;
    for (Index k = 0; k < half; ++k) box([&](double a, double b) { return b < a * a - 1.0 - margin; }, 1.0);
    for (Index k = half; k < n_per_class; ++k) {
        for (;;) {
            const double a = 0.25 * rng.normal(), b = 0.25 * rng.normal();
            if (a * a + b * b <= 0.7 * 0.7) {
                put(cx + a, cy + b, 1.0);
                break;
            }
        }
    }
    for (Index k = 0; k < half; ++k)
        box([&](double a, double b) { return b > a * a - 1.0 + margin && std::hypot(a - cx, b - cy) > 1.5; }, -1.0);
    for (Index k = half; k < n_per_class; ++k) {
        const double r = 0.9 + 0.4 * rng.uniform();
        const double t = 2.0 * std::numbers::pi * rng.uniform();
        put(cx + r * std::cos(t), cy + r * std::sin(t), -1.0);
    }
    return Dataset(std::move(x), std::move(y));
}

// ---------------------------------------------------------------------------
// Gamma selection

namespace detail {

/// Validation accuracy of `method` for each grid value, kernels not tuned
/// share one Gram matrix across the grid.
inline std::vector<double> grid_accuracies(const Dataset& fit, const Dataset& val, Method method, const std::vector<KernelTemplate>& ts,
                                           const std::vector<double>& grid, const TrainConfig& cfg) {
    KernelBank fixed;
    for (const auto& t : ts) {
        fixed.specs.push_back(t.spec);
        fixed.grams.push_back(t.tuned ? GramMatrix(Matrix()) : gram(t.spec, fit.features));
    }
    std::vector<double> acc;
    for (double g : grid) {
        KernelBank bank = fixed;
        for (std::size_t i = 0; i < ts.size(); ++i)
            if (ts[i].tuned) {
                bank.specs[i] = GaussianKernel{g};
                bank.grams[i] = gram(bank.specs[i], fit.features);
            }
        const LklModel model = train(method, fit, bank, cfg);
        acc.push_back(accuracy(predict(model, val.features), val.labels));
    }
    return acc;
}

} // namespace detail

struct GammaChoice {
    std::optional<double> gamma; // empty when no kernel is tuned
    std::vector<double> validation_accuracy;
};

/// Picks the grid value with the best accuracy on an inner 75/25 split of
/// `train`; ties go to the smaller gamma. Falls back to the smallest grid value
/// when the inner split cannot hold both classes.
inline GammaChoice gamma_select(const Dataset& train, Method method, const std::vector<KernelTemplate>& ts, const std::vector<double>& grid,
                                const TrainConfig& cfg, std::uint64_t seed) {
    GammaChoice out;
    if (!has_tuned(ts)) return out;
    detail::require(!grid.empty(), "gamma grid is empty");
    std::vector<double> sorted = grid;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.size() == 1 || train.n() < 4) {
        out.gamma = sorted.front();
        return out;
    }
    auto [fit, val] = split(train, SplitSpec{0.75, seed});
    if (!fit.has_both_classes()) {
        out.gamma = sorted.front();
        return out;
    }
    out.validation_accuracy = detail::grid_accuracies(fit, val, method, ts, sorted, cfg);
    std::size_t best = 0;
    for (std::size_t k = 1; k < sorted.size(); ++k)
        if (out.validation_accuracy[k] > out.validation_accuracy[best]) best = k;
    out.gamma = sorted[best];
    return out;
}

// ---------------------------------------------------------------------------
// Running experiments

inline Dataset load_dataset(const ExperimentConfig& cfg) {
    if (cfg.synthetic == "fig1") return synth_fig1(cfg.synthetic_per_class, cfg.seed);
    std::ifstream in(cfg.data_path);
    if (!in) throw error("cannot open data file '" + cfg.data_path + "'");
    ParseOptions opts;
    opts.label_map = cfg.label_map;
    return parse_libsvm(in, opts);
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    if (!cfg.data_path.empty()) j["data"] = cfg.data_path;
    if (!cfg.synthetic.empty()) {
        j["synthetic"] = cfg.synthetic;
        j["synthetic_per_class"] = cfg.synthetic_per_class;
    }
    if (cfg.label_map) {
        std::ostringstream os;
        bool first = true;
        for (const auto& [raw, to] : *cfg.label_map) {
            os << (first ? "" : ",") << raw << ':' << (to > 0 ? "+1" : "-1");
            first = false;
        }
        j["label_map"] = os.str();
    }
    j["method"] = to_string(cfg.method);
    std::vector<std::string> ks;
    for (const auto& t : cfg.kernels) ks.push_back(to_string(t));
    j["kernels"] = ks;
    j["repeats"] = cfg.repeats;
    j["train_frac"] = cfg.train_fraction;
    j["seed"] = cfg.seed;
    j["c"] = cfg.train.svm.C;
    j["tol"] = cfg.train.svm.tol;
    j["svr_c"] = cfg.train.gate.svr.C;
    j["svr_epsilon"] = cfg.train.gate.svr.epsilon;
    j["scale"] = to_string(cfg.scale);
    j["gamma_grid"] = cfg.gamma_grid;
    j["lmkl"] = {{"learning_rate", cfg.train.lmkl.learning_rate}, {"outer_iters", cfg.train.lmkl.outer_iters}, {"grad_tol", cfg.train.lmkl.grad_tol}};
    j["clmkl"] = {{"clusters", cfg.train.clmkl.clusters}, {"beta_step", cfg.train.clmkl.beta_step},
                  {"outer_iters", cfg.train.clmkl.outer_iters}, {"tau", cfg.train.clmkl.tau}};
    return j;
}

/// Applies keys of a JSON config object on top of `cfg`. Keys mirror CLI flags.
inline void apply_config_json(ExperimentConfig& cfg, const nlohmann::json& j) {
    detail::require(j.is_object(), "config must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        if (key == "data") cfg.data_path = v.get<std::string>();
        else if (key == "synthetic") cfg.synthetic = v.get<std::string>();
        else if (key == "synthetic_per_class") cfg.synthetic_per_class = v.get<Index>();
        else if (key == "label_map") cfg.label_map = parse_label_map(v.get<std::string>());
        else if (key == "method") cfg.method = parse_method(v.get<std::string>());
        else if (key == "kernels") {
            if (v.is_string()) {
                cfg.kernels = parse_kernel_list(v.get<std::string>());
            } else {
                cfg.kernels.clear();
                for (const auto& k : v) cfg.kernels.push_back(parse_kernel_template(k.get<std::string>()));
            }
        }
        else if (key == "repeats") cfg.repeats = v.get<int>();
        else if (key == "train_frac") cfg.train_fraction = v.get<double>();
        else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
        else if (key == "c") cfg.train.svm.C = v.get<double>();
        else if (key == "tol") cfg.train.svm.tol = v.get<double>();
        else if (key == "svr_c") cfg.train.gate.svr.C = v.get<double>();
        else if (key == "svr_epsilon") cfg.train.gate.svr.epsilon = v.get<double>();
        else if (key == "scale") cfg.scale = parse_scale_mode(v.get<std::string>());
        else if (key == "gamma_grid") cfg.gamma_grid = v.get<std::vector<double>>();
        else if (key == "threads") cfg.threads = v.get<int>();
        else if (key == "report") cfg.report_path = v.get<std::string>();
        else if (key == "csv") cfg.csv_path = v.get<std::string>();
        else if (key == "lmkl") {
            cfg.train.lmkl.learning_rate = v.value("learning_rate", cfg.train.lmkl.learning_rate);
            cfg.train.lmkl.outer_iters = v.value("outer_iters", cfg.train.lmkl.outer_iters);
            cfg.train.lmkl.grad_tol = v.value("grad_tol", cfg.train.lmkl.grad_tol);
        } else if (key == "clmkl") {
            cfg.train.clmkl.clusters = v.value("clusters", cfg.train.clmkl.clusters);
            cfg.train.clmkl.beta_step = v.value("beta_step", cfg.train.clmkl.beta_step);
            cfg.train.clmkl.outer_iters = v.value("outer_iters", cfg.train.clmkl.outer_iters);
            cfg.train.clmkl.tau = v.value("tau", cfg.train.clmkl.tau);
        } else
            throw error("unknown config key '" + key + "'");
    }
}

/// One split/scale/select/train/evaluate cycle.
inline RunRecord run_once(const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed) {
    RunRecord rec;
    rec.seed = seed;
    auto [raw_train, raw_test] = split(data, SplitSpec{cfg.train_fraction, seed});
    const Scaler scaler = Scaler::fit(raw_train.features, cfg.scale);
    const Dataset train_set = scaler.apply(raw_train);
    const Dataset test_set = scaler.apply(raw_test);
    rec.n_train = train_set.n();
    rec.n_test = test_set.n();

    TrainConfig tc = cfg.train;
    tc.clmkl.seed = seed;
    const GammaChoice choice = gamma_select(train_set, cfg.method, cfg.kernels, cfg.gamma_grid, tc, seed);
    rec.gamma = choice.gamma;

    const auto start = std::chrono::steady_clock::now();
    const LklModel model = train(cfg.method, train_set, instantiate(cfg.kernels, choice.gamma.value_or(1.0)), tc);
    rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    rec.accuracy = accuracy(predict(model, test_set.features), test_set.labels);
    rec.support_fraction = support_fraction(model);
    rec.solver_converged = model.solver_converged;
    rec.outer_converged = model.outer_converged;
    return rec;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg, const Dataset& data) {
    cfg.validate();
    data.validate();
    ExperimentReport report;
    report.config = config_to_json(cfg);
    report.runs.resize(static_cast<std::size_t>(cfg.repeats));

    std::atomic<int> next{0};
    std::mutex fail_mutex;
    std::exception_ptr failure;
    auto worker = [&] {
        for (int t; (t = next.fetch_add(1)) < cfg.repeats;) {
            try {
                report.runs[static_cast<std::size_t>(t)] = run_once(data, cfg, cfg.seed + static_cast<std::uint64_t>(t) + 1);
            } catch (...) {
                const std::lock_guard lock(fail_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int workers = std::min(cfg.threads, cfg.repeats);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    aggregate(report);
    report.memory_bytes = memory_estimate(static_cast<std::uint64_t>(train_size(data.n(), cfg.train_fraction)), cfg.kernels.size());
    report.notes.push_back("accuracy is the fraction of correctly classified test points; stddev is the population standard deviation");
    report.notes.push_back("scaling is fit on each training split and applied unchanged to its test split");
    if (has_tuned(cfg.kernels))
        report.notes.push_back("tuned Gaussian kernels share one gamma, chosen by accuracy on an inner 75/25 split of the training part (ties to the smaller gamma)");
    if (cfg.method == Method::clmkl)
        report.notes.push_back("clmkl kernel weights are updated by normalized exponentiated-gradient ascent on the SVM dual, projected onto each cluster's simplex");
    if (cfg.method == Method::swmkl || cfg.method == Method::ldmkl)
        report.notes.push_back("gate regressors are epsilon-SVRs with a Gaussian kernel whose gamma is 1/(2 median squared pairwise distance) of the training part");
    report.notes.push_back("memory_bytes is (m+1)*n_train^2*8");
    return report;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, load_dataset(cfg)); }

// ---------------------------------------------------------------------------
// Report output

inline nlohmann::json to_json(const Summary& s) { return {{"mean", s.mean}, {"stddev", s.stddev}}; }

inline nlohmann::json to_json(const ExperimentReport& r) {
    nlohmann::json j;
    j["config"] = r.config;
    j["runs"] = nlohmann::json::array();
    for (const auto& run : r.runs) {
        nlohmann::json o = {{"seed", run.seed},
                            {"accuracy", run.accuracy},
                            {"support_fraction", run.support_fraction},
                            {"wall_time_s", run.wall_time_s},
                            {"solver_converged", run.solver_converged},
                            {"outer_converged", run.outer_converged},
                            {"n_train", run.n_train},
                            {"n_test", run.n_test}};
        o["gamma"] = run.gamma ? nlohmann::json(*run.gamma) : nlohmann::json(nullptr);
        j["runs"].push_back(std::move(o));
    }
    j["aggregate"] = {{"accuracy", to_json(r.accuracy)}, {"support_fraction", to_json(r.support_fraction)}, {"wall_time_s", to_json(r.wall_time_s)}};
    j["memory_bytes"] = r.memory_bytes;
    j["notes"] = r.notes;
    return j;
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
    ExperimentReport r;
    r.config = j.at("config");
    for (const auto& o : j.at("runs")) {
        RunRecord run;
        run.seed = o.at("seed").get<std::uint64_t>();
        run.accuracy = o.at("accuracy").get<double>();
        run.support_fraction = o.at("support_fraction").get<double>();
        run.wall_time_s = o.at("wall_time_s").get<double>();
        run.solver_converged = o.at("solver_converged").get<bool>();
        run.outer_converged = o.at("outer_converged").get<bool>();
        run.n_train = o.at("n_train").get<Index>();
        run.n_test = o.at("n_test").get<Index>();
        if (!o.at("gamma").is_null()) run.gamma = o.at("gamma").get<double>();
        r.runs.push_back(run);
    }
    auto summary = [&](const char* key) {
        const auto& s = j.at("aggregate").at(key);
        return Summary{s.at("mean").get<double>(), s.at("stddev").get<double>()};
    };
    r.accuracy = summary("accuracy");
    r.support_fraction = summary("support_fraction");
    r.wall_time_s = summary("wall_time_s");
    r.memory_bytes = j.at("memory_bytes").get<std::uint64_t>();
    r.notes = j.at("notes").get<std::vector<std::string>>();
    return r;
}

enum class ReportFormat { json, csv };

namespace detail {

inline std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline void write_report_json(std::ostream& out, const ExperimentReport& r) { out << to_json(r).dump(2) << '\n'; }

/// One row per run, then an aggregate row holding means and population stddevs.
inline void write_report_csv(std::ostream& out, const ExperimentReport& r) {
    using detail::fmt17;
    out << "run,seed,accuracy,support_fraction,wall_time_s,solver_converged,outer_converged,gamma,"
           "accuracy_std,support_fraction_std,wall_time_s_std\n";
    for (std::size_t t = 0; t < r.runs.size(); ++t) {
        const auto& run = r.runs[t];
        out << (t + 1) << ',' << run.seed << ',' << fmt17(run.accuracy) << ',' << fmt17(run.support_fraction) << ',' << fmt17(run.wall_time_s)
            << ',' << run.solver_converged << ',' << run.outer_converged << ',' << (run.gamma ? fmt17(*run.gamma) : "") << ",,,\n";
    }
    out << "aggregate,," << fmt17(r.accuracy.mean) << ',' << fmt17(r.support_fraction.mean) << ',' << fmt17(r.wall_time_s.mean) << ",,,,"
        << fmt17(r.accuracy.stddev) << ',' << fmt17(r.support_fraction.stddev) << ',' << fmt17(r.wall_time_s.stddev) << '\n';
}

inline void emit_report(const ExperimentReport& r, ReportFormat format, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw error("cannot open report file '" + path + "' for writing");
    if (format == ReportFormat::json)
        write_report_json(out, r);
    else
        write_report_csv(out, r);
    out.flush();
    if (!out) throw error("failed writing report file '" + path + "'");
}

/// Two-column "n bytes" data file for a memory curve.
inline void write_memory_curve(std::ostream& out, const std::vector<std::uint64_t>& ns, std::uint64_t m) {
    out << "# n bytes (m=" << m << ")\n";
    for (auto n : ns) out << n << ' ' << memory_estimate(n, m) << '\n';
}

} // namespace lokal
