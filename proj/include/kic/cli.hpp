/*
 * Copyright 2026 The kic Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "kic/baselines.hpp"
#include "kic/christoffel.hpp"
#include "kic/data_matrix.hpp"
#include "kic/dataio.hpp"
#include "kic/error.hpp"
#include "kic/evaluation.hpp"
#include "kic/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#ifndef KIC_VERSION_STRING
#define KIC_VERSION_STRING "0.1.0"
#endif

namespace kic::cli {

inline constexpr const char *version = KIC_VERSION_STRING;

/// Process exit codes.
enum ExitCode : int { Success = 0, ConfigFailure = 2, NumericalFailure = 3, IoFailure = 4 };

enum class Command { Score, Bench, Synth, Contour };

enum class Method { IC, KIC, KIC2, KIC_RBF, KIC_RBF2, KNN, KSP, KSP2 };

inline const std::vector<Method> &all_methods() {
    static const std::vector<Method> m{Method::IC,       Method::KIC, Method::KIC2, Method::KIC_RBF,
                                       Method::KIC_RBF2, Method::KNN, Method::KSP,  Method::KSP2};
    return m;
}

inline std::string method_name(Method m) {
    switch (m) {
    case Method::IC: return "IC";
    case Method::KIC: return "KIC";
    case Method::KIC2: return "KIC2";
    case Method::KIC_RBF: return "KIC-RBF";
    case Method::KIC_RBF2: return "KIC-RBF2";
    case Method::KNN: return "KNN";
    case Method::KSP: return "KSP";
    case Method::KSP2: return "KSP2";
    }
    return "?";
}

inline Method parse_method(const std::string &text) {
    std::string up;
    for (char c : text) {
        up += static_cast<char>(c == '_' ? '-' : std::toupper(static_cast<unsigned char>(c)));
    }
    if (up == "RBF") {
        up = "KIC-RBF";
    } else if (up == "RBF2") {
        up = "KIC-RBF2";
    }
    for (Method m : all_methods()) {
        if (method_name(m) == up) {
            return m;
        }
    }
    throw ConfigError("unknown method '" + text + "' (expected IC, KIC, KIC2, KIC-RBF, KIC-RBF2, KNN, KSP, KSP2)");
}

inline bool is_randomized(Method m) { return m == Method::KSP || m == Method::KSP2; }
inline bool is_kernelized(Method m) {
    return m == Method::KIC || m == Method::KIC2 || m == Method::KIC_RBF || m == Method::KIC_RBF2;
}
inline bool uses_degree(Method m) { return m == Method::IC || m == Method::KIC || m == Method::KIC2; }
inline bool uses_sigma(Method m) { return m == Method::KIC_RBF || m == Method::KIC_RBF2; }
inline bool uses_alpha(Method m) { return m == Method::KIC2 || m == Method::KIC_RBF2 || m == Method::KSP2; }

/// User-supplied hyperparameters; unset entries fall back to the method defaults.
struct Hyperparameters {
    std::optional<int> degree;
    std::optional<double> C;
    std::optional<double> rho;
    std::optional<double> sigma;
    std::optional<double> alpha;
    std::optional<int> k;
    std::optional<int> sample_size;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> feature_dim_limit;
};

struct SynthOptions {
    int dimension = 1000;
    int clusters = 5;
    int samples_per_cluster = 194;
    int outliers = 30;
    VarianceRepair repair = VarianceRepair::Abs;
};

struct GridSpec {
    GridAxis x;
    GridAxis y;
};

/// "x_lo,x_hi,steps,y_lo,y_hi,steps"
inline GridSpec parse_grid(const std::string &text) {
    const auto f = detail::split_record(text, ',');
    if (f.size() != 6) {
        throw ConfigError("--grid expects x_lo,x_hi,steps,y_lo,y_hi,steps");
    }
    auto real = [&](std::size_t i) {
        auto v = detail::parse_real(f[i]);
        if (!v) {
            throw ConfigError("--grid: '" + f[i] + "' is not a number");
        }
        return *v;
    };
    auto steps = [&](std::size_t i) {
        auto v = detail::parse_index(f[i]);
        if (!v || *v < 2 || *v > 100000) {
            throw ConfigError("--grid: step count '" + f[i] + "' must be an integer in [2, 100000]");
        }
        return static_cast<int>(*v);
    };
    return {{real(0), real(1), steps(2)}, {real(3), real(4), steps(5)}};
}

struct RunConfig {
    Command command = Command::Score;
    std::vector<Method> methods;
    Hyperparameters hp;
    std::vector<std::string> inputs;
    std::string output = "-";
    std::optional<std::string> label_column;
    std::optional<std::string> label_rule;
    char delimiter = ',';
    bool normalize = true;
    std::optional<GridSpec> grid;
    SynthOptions synth;
    int jobs = 1;
};

// ---------------------------------------------------------------------------
// Validation and defaults
// ---------------------------------------------------------------------------

/// Rejects hyperparameters that none of the selected methods accepts, before any computation.
inline void validate_config(const RunConfig &cfg) {
    const auto &hp = cfg.hp;
    if (cfg.command == Command::Synth) {
        if (!cfg.methods.empty()) {
            throw ConfigError("synth does not take --method");
        }
        if (hp.degree || hp.C || hp.rho || hp.sigma || hp.alpha || hp.k || hp.sample_size || hp.trials ||
            hp.feature_dim_limit) {
            throw ConfigError("synth accepts only --seed among the method hyperparameters");
        }
        return;
    }
    if (cfg.methods.empty()) {
        throw ConfigError("no --method given");
    }
    if (cfg.inputs.empty()) {
        throw ConfigError("no --input given");
    }
    if ((cfg.command == Command::Score || cfg.command == Command::Contour) &&
        (cfg.methods.size() != 1 || cfg.inputs.size() != 1)) {
        throw ConfigError("score and contour take exactly one --method and one --input");
    }
    auto any = [&](auto pred) { return std::any_of(cfg.methods.begin(), cfg.methods.end(), pred); };
    auto reject = [&](bool given, bool used, const char *flag, const char *who) {
        if (given && !used) {
            throw ConfigError(std::string(flag) + " applies only to " + who + " but none was selected");
        }
    };
    reject(hp.degree.has_value(), any(uses_degree), "--degree", "IC/KIC/KIC2");
    reject(hp.C.has_value(), any(is_kernelized), "--C", "KIC-family methods");
    reject(hp.rho.has_value(), any(is_kernelized), "--rho", "KIC-family methods");
    reject(hp.sigma.has_value(), any(uses_sigma), "--sigma", "KIC-RBF/KIC-RBF2");
    reject(hp.alpha.has_value(), any(uses_alpha), "--alpha", "KIC2/KIC-RBF2/KSP2");
    reject(hp.k.has_value(), any([](Method m) { return m == Method::KNN; }), "--k", "KNN");
    reject(hp.sample_size.has_value(), any(is_randomized), "--sample-size", "KSP/KSP2");
    reject(hp.seed.has_value(), any(is_randomized), "--seed", "KSP/KSP2");
    reject(hp.feature_dim_limit.has_value(), any([](Method m) { return m == Method::IC; }), "--feature-dim-limit",
           "IC");
    if (hp.trials) {
        if (cfg.command != Command::Bench) {
            throw ConfigError("--trials applies only to bench");
        }
        reject(true, any(is_randomized), "--trials", "KSP/KSP2");
        if (*hp.trials < 1) {
            throw ConfigError("--trials must be >= 1");
        }
    }
    if (hp.C && hp.rho) {
        throw ConfigError("--C and --rho are mutually exclusive");
    }
    if (hp.degree && (*hp.degree < 1 || *hp.degree > KernelSpec::max_degree)) {
        throw ConfigError("--degree must be in [1, 64]");
    }
    if (hp.C && !(*hp.C > 0.0)) {
        throw ConfigError("--C must be positive");
    }
    if (hp.rho && !(*hp.rho > 0.0)) {
        throw ConfigError("--rho must be positive");
    }
    if (hp.sigma && !(*hp.sigma > 0.0)) {
        throw ConfigError("--sigma must be positive");
    }
    if (hp.alpha && !(*hp.alpha > 0.0 && *hp.alpha <= 1.0)) {
        throw ConfigError("--alpha must lie in (0, 1]");
    }
    if (hp.k && *hp.k < 1) {
        throw ConfigError("--k must be >= 1");
    }
    if (hp.sample_size && *hp.sample_size < 1) {
        throw ConfigError("--sample-size must be >= 1");
    }
    if (cfg.command == Command::Contour) {
        if (!cfg.grid) {
            throw ConfigError("contour requires --grid");
        }
        const Method m = cfg.methods.front();
        if (!(is_kernelized(m) || m == Method::IC)) {
            throw ConfigError("contour supports IC and the KIC-family methods only");
        }
    } else if (cfg.grid) {
        throw ConfigError("--grid applies only to contour");
    }
    if (cfg.jobs < 1) {
        throw ConfigError("--jobs must be >= 1");
    }
}

/// Every hyperparameter resolved for one method on data of dimension p.
struct MethodParams {
    Method method = Method::KNN;
    int degree = 2;
    double C = default_C;
    std::optional<double> rho;
    double sigma = 1.0;
    double alpha = default_kic2_alpha;
    int k = 5;
    int sample_size = 20;
    int trials = 1;
    std::uint64_t seed = 0;
    std::size_t feature_dim_limit = default_feature_dim_limit;

    [[nodiscard]] Metadata describe() const {
        Metadata md;
        md.emplace_back("method", method_name(method));
        if (uses_degree(method)) {
            md.emplace_back("degree", std::to_string(degree));
        }
        if (uses_sigma(method)) {
            md.emplace_back("sigma", format_real(sigma));
        }
        if (is_kernelized(method)) {
            if (rho) {
                md.emplace_back("rho_override", format_real(*rho));
            } else {
                md.emplace_back("C", format_real(C));
            }
        }
        if (uses_alpha(method)) {
            md.emplace_back("alpha", format_real(alpha));
        }
        if (method == Method::KNN) {
            md.emplace_back("k", std::to_string(k));
        }
        if (is_randomized(method)) {
            md.emplace_back("sample_size", std::to_string(sample_size));
            md.emplace_back("rng", engine_name);
            md.emplace_back("seed", std::to_string(seed));
        }
        if (method == Method::IC) {
            md.emplace_back("feature_dim_limit", std::to_string(feature_dim_limit));
        }
        return md;
    }
};

inline MethodParams resolve_params(Method m, const Hyperparameters &hp, std::size_t p, Command command) {
    MethodParams mp;
    mp.method = m;
    mp.degree = hp.degree.value_or(2);
    mp.C = hp.C.value_or(default_C);
    mp.rho = hp.rho;
    mp.sigma = hp.sigma.value_or(default_sigma(p, m == Method::KIC_RBF2 ? SigmaVariant::KIC2 : SigmaVariant::KIC));
    mp.alpha = hp.alpha.value_or(m == Method::KSP2 ? 0.5 : default_kic2_alpha);
    mp.k = hp.k.value_or(5);
    mp.sample_size = hp.sample_size.value_or(20);
    mp.trials = is_randomized(m) ? hp.trials.value_or(command == Command::Bench ? 30 : 1) : 1;
    mp.seed = hp.seed.value_or(0);
    mp.feature_dim_limit = hp.feature_dim_limit.value_or(default_feature_dim_limit);
    return mp;
}

inline KernelSpec kernel_for(const MethodParams &mp) {
    return uses_sigma(mp.method) ? KernelSpec::rbf(mp.sigma) : KernelSpec::polynomial(mp.degree);
}

struct MethodOutcome {
    ScoreVector scores;
    Metadata details;  ///< quantities derived during the run, e.g. the rho actually used
};

/// Runs one method on X; randomized methods use `seed`.
inline MethodOutcome run_method(const MethodParams &mp, const DataMatrix &X, RngSeed seed) {
    MethodOutcome out;
    switch (mp.method) {
    case Method::IC:
        out.scores = ic_scores(X, X, mp.degree, mp.feature_dim_limit);
        out.details.emplace_back("feature_dimension", std::to_string(feature_dimension(X.cols(), mp.degree)));
        break;
    case Method::KIC:
    case Method::KIC_RBF: {
        auto fit = fit_and_score_kic(X, kernel_for(mp), mp.C, mp.rho);
        out.details.emplace_back("rho", format_real(fit.model.rho()));
        out.details.emplace_back("jitter", format_real(fit.model.factorization().jitter_applied()));
        out.scores = std::move(fit.scores);
        break;
    }
    case Method::KIC2:
    case Method::KIC_RBF2: {
        auto fit = fit_kic2(X, kernel_for(mp), Kic2Options{mp.C, mp.alpha, mp.rho});
        out.details.emplace_back("stage1_rho", format_real(fit.stage1_rho));
        out.details.emplace_back("stage2_rho", format_real(fit.model.rho()));
        out.details.emplace_back("retained", std::to_string(fit.retained.size()));
        out.scores = std::move(fit.scores);
        break;
    }
    case Method::KNN:
        out.scores = knn_scores(X, mp.k);
        break;
    case Method::KSP:
        out.scores = ksp_scores(X, static_cast<std::size_t>(mp.sample_size), seed);
        break;
    case Method::KSP2:
        out.scores = ksp2_scores(X, static_cast<std::size_t>(mp.sample_size), mp.alpha, seed);
        break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

namespace detail {

inline Metadata preamble(const std::string &command) {
    return {{"tool", std::string("kic ") + version}, {"command", command}};
}

/// Loads, applies the class-labeling rule, and normalizes unless disabled.
inline DataMatrix prepare_dataset(const RunConfig &cfg, const std::string &path, Metadata &md) {
    CsvOptions opts;
    opts.delimiter = cfg.delimiter;
    opts.label_column = cfg.label_column ? cfg.label_column : std::optional<std::string>("outlier");
    DataMatrix X;
    try {
        X = load_csv(path, opts);
    } catch (const IoError &e) {
        // Without --label-column an `outlier` header column is used when present.
        if (cfg.label_column || std::string(e.what()).find("label column") == std::string::npos) {
            throw;
        }
        if (cfg.command == Command::Bench) {
            throw ConfigError("dataset '" + path + "' is unlabeled (no 'outlier' column; pass --label-column)");
        }
        opts.label_column.reset();
        X = load_csv(path, opts);
    }
    if (cfg.label_rule) {
        if (!X.raw_labels) {
            throw ConfigError("--label-rule needs --label-column");
        }
        const auto lab = label_by_class(*X.raw_labels, parse_label_rule(*cfg.label_rule));
        X.labels = lab.labels;
        X = X.select_rows(lab.mask);
        md.emplace_back("label_rule", *cfg.label_rule);
    } else if (X.raw_labels && !X.labels) {
        throw ConfigError("label column of '" + path + "' is not binary 0/1; pass --label-rule");
    }
    md.emplace_back("n", std::to_string(X.rows()));
    md.emplace_back("p", std::to_string(X.cols()));
    if (cfg.normalize) {
        X = normalize(X);
        md.emplace_back("normalization", normalization_convention);
    } else {
        md.emplace_back("normalization", "none");
    }
    return X;
}

template <typename Fn>
void write_output(const std::string &path, Fn &&fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    fn(os);
    os.flush();
    if (!os) {
        throw IoError("failed writing '" + path + "'");
    }
}

inline std::string dataset_name(const std::string &path) { return std::filesystem::path(path).stem().string(); }

}  // namespace detail

/// Scores every row of the input; one "row,score" line per sample.
inline void run_score(const RunConfig &cfg, std::ostream &os) {
    validate_config(cfg);
    Metadata md = detail::preamble("score");
    md.emplace_back("input", cfg.inputs.front());
    const DataMatrix X = detail::prepare_dataset(cfg, cfg.inputs.front(), md);
    const MethodParams mp = resolve_params(cfg.methods.front(), cfg.hp, X.cols(), Command::Score);
    const auto mdp = mp.describe();
    md.insert(md.end(), mdp.begin(), mdp.end());
    const auto outcome = run_method(mp, X, RngSeed{mp.seed});
    md.insert(md.end(), outcome.details.begin(), outcome.details.end());

    write_metadata(os, md);
    os << "row,score\n";
    for (std::size_t i = 0; i < outcome.scores.size(); ++i) {
        os << i << ',' << format_real(outcome.scores[i]) << '\n';
    }
}

inline void run_score(const RunConfig &cfg) {
    validate_config(cfg);
    detail::write_output(cfg.output, [&](std::ostream &os) { run_score(cfg, os); });
}

struct BenchCell {
    std::optional<TrialStats> stats;
    std::string error;
};

/**
 * AUPRC of every (dataset, method) pair. Randomized methods run `trials`
 * times with seeds seed, seed + 1, ...; failures become unavailable cells.
 */
inline BenchmarkTable evaluate_benchmark(const RunConfig &cfg, Metadata &md,
                                         std::vector<std::vector<BenchCell>> *cells_out = nullptr) {
    std::vector<DataMatrix> data;
    std::vector<std::string> names;
    for (const auto &path : cfg.inputs) {
        Metadata dmd;
        data.push_back(detail::prepare_dataset(cfg, path, dmd));
        names.push_back(detail::dataset_name(path));
        if (!data.back().labels) {
            throw ConfigError("dataset '" + path + "' has no labels");
        }
        for (const auto &[k, v] : dmd) {
            md.emplace_back("dataset." + names.back() + "." + k, v);
        }
    }
    std::vector<std::string> method_names;
    for (Method m : cfg.methods) {
        method_names.push_back(method_name(m));
        const auto d = resolve_params(m, cfg.hp, 1, Command::Bench).describe();
        for (const auto &[k, v] : d) {
            if (k != "method" && k != "sigma") {
                md.emplace_back("method." + method_name(m) + "." + k, v);
            }
        }
        if (uses_sigma(m)) {
            md.emplace_back("method." + method_name(m) + ".sigma",
                            cfg.hp.sigma ? format_real(*cfg.hp.sigma)
                                         : (m == Method::KIC_RBF2 ? "sqrt(p)/4" : "sqrt(p)/2"));
        }
        if (is_randomized(m)) {
            md.emplace_back("method." + method_name(m) + ".trials",
                            std::to_string(resolve_params(m, cfg.hp, 1, Command::Bench).trials));
        }
    }

    const std::size_t D = data.size();
    const std::size_t M = cfg.methods.size();
    std::vector<std::vector<BenchCell>> cells(D, std::vector<BenchCell>(M));

    auto evaluate = [&](std::size_t d, std::size_t m) {
        auto &cell = cells[d][m];
        try {
            const auto mp = resolve_params(cfg.methods[m], cfg.hp, data[d].cols(), Command::Bench);
            std::vector<double> values;
            for (int t = 0; t < mp.trials; ++t) {
                const auto seed = RngSeed{mp.seed}.for_trial(static_cast<std::uint64_t>(t));
                const auto out = run_method(mp, data[d], seed);
                values.push_back(pr_curve({out.scores, *data[d].labels}).auprc);
            }
            cell.stats = trial_stats(values);
        } catch (const Error &e) {
            cell.error = e.what();
        }
    };

    const std::size_t total = D * M;
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), total);
    if (workers <= 1) {
        for (std::size_t c = 0; c < total; ++c) {
            evaluate(c / M, c % M);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t c = next++; c < total; c = next++) {
                    evaluate(c / M, c % M);
                }
            });
        }
        for (auto &t : pool) {
            t.join();
        }
    }

    std::vector<std::vector<std::optional<TrialStats>>> stats(D, std::vector<std::optional<TrialStats>>(M));
    for (std::size_t d = 0; d < D; ++d) {
        for (std::size_t m = 0; m < M; ++m) {
            stats[d][m] = cells[d][m].stats;
            if (!cells[d][m].error.empty()) {
                md.emplace_back("unavailable." + names[d] + "." + method_names[m], cells[d][m].error);
            }
        }
    }
    if (cells_out) {
        *cells_out = cells;
    }
    return summarize(names, method_names, std::move(stats));
}

/// Wide table: one row per dataset with `<method>` and `<method>_std` columns,
/// then Average, Avg. Rank and RMSD rows. Unavailable entries are "-".
inline void write_benchmark_table(std::ostream &os, const BenchmarkTable &t) {
    os << "dataset";
    for (const auto &m : t.methods) {
        os << ',' << m << ',' << m << "_std";
    }
    os << '\n';
    for (std::size_t d = 0; d < t.datasets.size(); ++d) {
        os << t.datasets[d];
        for (std::size_t m = 0; m < t.methods.size(); ++m) {
            if (const auto &c = t.cells[d][m]) {
                os << ',' << format_real(c->mean) << ',' << format_real(c->stddev);
            } else {
                os << ",-,-";
            }
        }
        os << '\n';
    }
    auto row = [&](const char *label, auto get) {
        os << label;
        for (const auto &s : t.summary) {
            const std::optional<double> v = get(s);
            os << ',' << (v ? format_real(*v) : std::string("-")) << ',';
        }
        os << '\n';
    };
    row("Average", [](const MethodSummary &s) { return s.average; });
    row("Avg. Rank", [](const MethodSummary &s) { return s.average_rank; });
    row("RMSD", [](const MethodSummary &s) { return s.rmsd; });
}

inline void run_bench(const RunConfig &cfg, std::ostream &os) {
    validate_config(cfg);
    Metadata md = detail::preamble("bench");
    md.emplace_back("integration", "right Riemann sum over recall, recall_0 = 0");
    md.emplace_back("trial_std", "population");
    const auto table = evaluate_benchmark(cfg, md);
    write_metadata(os, md);
    write_benchmark_table(os, table);
}

inline void run_bench(const RunConfig &cfg) {
    validate_config(cfg);
    detail::write_output(cfg.output, [&](std::ostream &os) { run_bench(cfg, os); });
}

/// Parses a table written by write_benchmark_table back into per-cell stats.
struct ParsedBenchmark {
    std::vector<std::string> datasets;
    std::vector<std::string> methods;
    std::vector<std::vector<std::optional<TrialStats>>> cells;
    std::vector<std::vector<std::string>> aggregate_rows;  ///< raw Average / Avg. Rank / RMSD fields
};

inline ParsedBenchmark read_benchmark_table(std::istream &is) {
    ParsedBenchmark pb;
    std::string line;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.empty() || line.front() == '#') {
            continue;
        }
        auto f = kic::detail::split_record(line, ',');
        if (!header) {
            for (std::size_t i = 1; i + 1 < f.size(); i += 2) {
                pb.methods.push_back(f[i]);
            }
            header = true;
            continue;
        }
        if (f.size() != 1 + 2 * pb.methods.size()) {
            throw IoError("benchmark table row has the wrong number of fields");
        }
        if (f[0] == "Average" || f[0] == "Avg. Rank" || f[0] == "RMSD") {
            pb.aggregate_rows.push_back(f);
            continue;
        }
        pb.datasets.push_back(f[0]);
        auto &row = pb.cells.emplace_back();
        for (std::size_t m = 0; m < pb.methods.size(); ++m) {
            const auto mean = kic::detail::parse_real(f[1 + 2 * m]);
            const auto sd = kic::detail::parse_real(f[2 + 2 * m]);
            if (mean && sd) {
                row.push_back(TrialStats{*mean, *sd, 0});
            } else {
                row.emplace_back();
            }
        }
    }
    return pb;
}

/// Synthetic Gaussian benchmark data, with an `outlier` label column.
inline void run_synth(const RunConfig &cfg, std::ostream &os) {
    validate_config(cfg);
    SynthGaussianConfig sc;
    sc.dimension = cfg.synth.dimension;
    sc.num_clusters = cfg.synth.clusters;
    sc.samples_per_cluster = cfg.synth.samples_per_cluster;
    sc.num_outliers = cfg.synth.outliers;
    sc.seed = RngSeed{cfg.hp.seed.value_or(0)};
    sc.repair = cfg.synth.repair;
    const auto X = synth_gaussian(sc);
    Metadata md = detail::preamble("synth");
    md.emplace_back("generator", "gaussian-clusters");
    md.emplace_back("clusters", std::to_string(sc.num_clusters));
    md.emplace_back("samples_per_cluster", std::to_string(sc.samples_per_cluster));
    md.emplace_back("outliers", std::to_string(sc.num_outliers));
    md.emplace_back("dimension", std::to_string(sc.dimension));
    md.emplace_back("variance_repair", sc.repair == VarianceRepair::Abs ? "abs" : "square");
    md.emplace_back("rng", engine_name);
    md.emplace_back("seed", std::to_string(sc.seed.value));
    write_data_csv(os, X, md);
}

inline void run_synth(const RunConfig &cfg) {
    validate_config(cfg);
    detail::write_output(cfg.output, [&](std::ostream &os) { run_synth(cfg, os); });
}

/// Score field over a regular 2-D grid as "i,j,x,y,score" rows, y index outer.
inline void run_contour(const RunConfig &cfg, std::ostream &os) {
    validate_config(cfg);
    Metadata md = detail::preamble("contour");
    md.emplace_back("input", cfg.inputs.front());
    const DataMatrix X = detail::prepare_dataset(cfg, cfg.inputs.front(), md);
    if (X.cols() != 2) {
        throw ConfigError("contour requires 2-feature data, got p = " + std::to_string(X.cols()));
    }
    const MethodParams mp = resolve_params(cfg.methods.front(), cfg.hp, X.cols(), Command::Contour);
    const auto mdp = mp.describe();
    md.insert(md.end(), mdp.begin(), mdp.end());
    const auto &g = *cfg.grid;

    Matrix field;
    switch (mp.method) {
    case Method::IC: {
        const auto pts = grid_points(g.x, g.y);
        const auto s = ic_scores(X, pts, mp.degree, mp.feature_dim_limit);
        field.resize(g.y.steps, g.x.steps);
        for (std::size_t r = 0; r < s.size(); ++r) {
            field(static_cast<Eigen::Index>(r) / g.x.steps, static_cast<Eigen::Index>(r) % g.x.steps) = s[r];
        }
        break;
    }
    case Method::KIC:
    case Method::KIC_RBF: {
        const auto model = mp.rho ? fit_kic(X, kernel_for(mp), *mp.rho) : fit_kic_default_rho(X, kernel_for(mp), mp.C);
        md.emplace_back("rho", format_real(model.rho()));
        field = grid_scores(model, g.x, g.y);
        break;
    }
    case Method::KIC2:
    case Method::KIC_RBF2: {
        const auto fit = fit_kic2(X, kernel_for(mp), Kic2Options{mp.C, mp.alpha, mp.rho});
        md.emplace_back("stage1_rho", format_real(fit.stage1_rho));
        md.emplace_back("stage2_rho", format_real(fit.model.rho()));
        field = grid_scores(fit.model, g.x, g.y);
        break;
    }
    default:
        throw ConfigError("contour supports IC and the KIC-family methods only");
    }

    auto axis = [](const GridAxis &a) {
        std::string s;
        for (int k = 0; k < a.steps; ++k) {
            s += (k ? " " : "") + format_real(a.at(k));
        }
        return s;
    };
    md.emplace_back("x_axis", axis(g.x));
    md.emplace_back("y_axis", axis(g.y));
    write_metadata(os, md);
    os << "i,j,x,y,score\n";
    for (int i = 0; i < g.y.steps; ++i) {
        for (int j = 0; j < g.x.steps; ++j) {
            os << i << ',' << j << ',' << format_real(g.x.at(j)) << ',' << format_real(g.y.at(i)) << ','
               << format_real(field(i, j)) << '\n';
        }
    }
}

inline void run_contour(const RunConfig &cfg) {
    validate_config(cfg);
    detail::write_output(cfg.output, [&](std::ostream &os) { run_contour(cfg, os); });
}

inline void run(const RunConfig &cfg) {
    switch (cfg.command) {
    case Command::Score: run_score(cfg); break;
    case Command::Bench: run_bench(cfg); break;
    case Command::Synth: run_synth(cfg); break;
    case Command::Contour: run_contour(cfg); break;
    }
}

/// Maps an exception to the process exit code.
inline int exit_code_for(const std::exception &e) {
    if (dynamic_cast<const IoError *>(&e)) {
        return IoFailure;
    }
    if (dynamic_cast<const NumericalError *>(&e)) {
        return NumericalFailure;
    }
    return ConfigFailure;
}

}  // namespace kic::cli
