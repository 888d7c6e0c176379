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

// Command-line front end: score, bench, synth, contour.
// Every flag can also be set through an environment variable KIC_<FLAG>,
// e.g. KIC_DEGREE=3 or KIC_SAMPLE_SIZE=40; explicit flags win.

#include "kic/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

namespace {

using kic::cli::Command;
using kic::cli::RunConfig;

std::string env_name(const std::string &flag) {
    std::string out = "KIC_";
    for (char c : flag) {
        out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

struct RawFlags {
    std::vector<std::string> methods;
    std::string grid;
    std::string delimiter = ",";
    std::string repair = "abs";
    bool no_normalize = false;
};

template <typename T>
CLI::Option *opt(CLI::App *app, const std::string &flag, T &target, const std::string &help) {
    return app->add_option("--" + flag, target, help)->envname(env_name(flag));
}

void add_data_flags(CLI::App *app, RunConfig &cfg, RawFlags &raw, bool many_inputs) {
    opt(app, "input", cfg.inputs, many_inputs ? "input CSV files (one per dataset)" : "input CSV file")
        ->required()
        ->expected(1, many_inputs ? -1 : 1);
    opt(app, "label-column", cfg.label_column, "label column name or zero-based index");
    opt(app, "label-rule", cfg.label_rule, "class labeling: smallest | largest | explicit:IN1,IN2;OUT1");
    opt(app, "delimiter", raw.delimiter, "field delimiter")->capture_default_str();
    app->add_flag("--no-normalize", raw.no_normalize, "skip zero-mean unit-variance feature scaling")
        ->envname(env_name("no-normalize"));
}

void add_method_flags(CLI::App *app, RunConfig &cfg, RawFlags &raw, bool many_methods) {
    opt(app, "method", raw.methods,
        many_methods ? "methods (IC KIC KIC2 KIC-RBF KIC-RBF2 KNN KSP KSP2)" : "method")
        ->required()
        ->delimiter(',')
        ->expected(1, many_methods ? -1 : 1);
    auto &hp = cfg.hp;
    opt(app, "degree", hp.degree, "polynomial degree d (default 2)");
    opt(app, "C", hp.C, "rho = |G/n|_F / (C sqrt(n)) (default 500)");
    opt(app, "rho", hp.rho, "explicit rho, bypassing the C rule");
    opt(app, "sigma", hp.sigma, "RBF lengthscale (default sqrt(p)/2, sqrt(p)/4 for KIC-RBF2)");
    opt(app, "alpha", hp.alpha, "filter fraction (default 0.6 KIC2, 0.5 KSP2)");
    opt(app, "k", hp.k, "KNN neighbour rank (default 5)");
    opt(app, "sample-size", hp.sample_size, "KSP reference sample size (default 20)");
    opt(app, "seed", hp.seed, "seed for randomized methods (default 0)");
    opt(app, "feature-dim-limit", hp.feature_dim_limit, "largest explicit IC feature dimension (default 20000)");
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Kernelized inverse Christoffel outlier detection"};
    app.set_version_flag("--version", std::string("kic ") + kic::cli::version);
    app.require_subcommand(1);

    RunConfig cfg;
    RawFlags raw;

    auto *score = app.add_subcommand("score", "score every row of a dataset");
    add_data_flags(score, cfg, raw, false);
    add_method_flags(score, cfg, raw, false);
    opt(score, "output", cfg.output, "output file ('-' for stdout)");

    auto *bench = app.add_subcommand("bench", "AUPRC table over datasets and methods");
    add_data_flags(bench, cfg, raw, true);
    add_method_flags(bench, cfg, raw, true);
    opt(bench, "trials", cfg.hp.trials, "trials for randomized methods (default 30)");
    opt(bench, "jobs", cfg.jobs, "worker threads for (dataset, method) cells")->capture_default_str();
    opt(bench, "output", cfg.output, "output file ('-' for stdout)");

    auto *synth = app.add_subcommand("synth", "generate the synthetic Gaussian benchmark");
    opt(synth, "dimension", cfg.synth.dimension, "number of features")->capture_default_str();
    opt(synth, "clusters", cfg.synth.clusters, "number of Gaussian clusters")->capture_default_str();
    opt(synth, "samples-per-cluster", cfg.synth.samples_per_cluster, "inliers per cluster")->capture_default_str();
    opt(synth, "outliers", cfg.synth.outliers, "number of uniform outliers")->capture_default_str();
    opt(synth, "variance-repair", raw.repair, "abs | square")->capture_default_str();
    opt(synth, "seed", cfg.hp.seed, "generator seed (default 0)");
    opt(synth, "output", cfg.output, "output file ('-' for stdout)");

    auto *contour = app.add_subcommand("contour", "score field on a 2-D grid");
    add_data_flags(contour, cfg, raw, false);
    add_method_flags(contour, cfg, raw, false);
    opt(contour, "grid", raw.grid, "x_lo,x_hi,x_steps,y_lo,y_hi,y_steps")->required();
    opt(contour, "output", cfg.output, "output file ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kic::cli::ConfigFailure;
    }

    try {
        if (score->parsed()) {
            cfg.command = Command::Score;
        } else if (bench->parsed()) {
            cfg.command = Command::Bench;
        } else if (synth->parsed()) {
            cfg.command = Command::Synth;
        } else {
            cfg.command = Command::Contour;
        }
        for (const auto &m : raw.methods) {
            cfg.methods.push_back(kic::cli::parse_method(m));
        }
        if (!raw.grid.empty()) {
            cfg.grid = kic::cli::parse_grid(raw.grid);
        }
        if (raw.delimiter == "\\t" || raw.delimiter == "tab") {
            raw.delimiter = "\t";
        }
        if (raw.delimiter.size() != 1) {
            throw kic::ConfigError("--delimiter must be a single character");
        }
        cfg.delimiter = raw.delimiter.front();
        cfg.normalize = !raw.no_normalize;
        if (raw.repair == "abs") {
            cfg.synth.repair = kic::VarianceRepair::Abs;
        } else if (raw.repair == "square") {
            cfg.synth.repair = kic::VarianceRepair::Square;
        } else {
            throw kic::ConfigError("--variance-repair must be abs or square");
        }
        kic::cli::run(cfg);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kic::cli::exit_code_for(e);
    }
    return 0;
}
