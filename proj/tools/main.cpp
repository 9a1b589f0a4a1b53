// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 riskbounds contributors
//
// Command-line front end: theorem/lemma verification suites, task
// complexity estimation, fitting diagnostics, training experiments, and
// Pearson recomputation over existing record files.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "riskbounds/experiment.hpp"
#include "riskbounds/io.hpp"
#include "riskbounds/verify.hpp"

namespace rb = riskbounds;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitContractViolation = 1;
constexpr int kExitConfigError = 2;

void print_checks(const rb::CheckList& checks, bool as_json, const json& config_echo) {
    if (as_json) {
        json arr = json::array();
        for (const auto& c : checks)
            arr.push_back({{"name", c.name}, {"passed", c.passed}, {"margin", c.margin}, {"detail", c.detail}});
        bool all = true;
        for (const auto& c : checks) all = all && c.passed;
        json payload;
        payload["checks"] = std::move(arr);
        payload["all_passed"] = all;
        std::cout << rb::io::wrap_output(config_echo, payload).dump(2) << "\n";
        return;
    }
    for (const auto& c : checks)
        std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << "  margin=" << rb::io::format_double(c.margin)
                  << "  " << c.detail << "\n";
}

json checks_json(const rb::CheckList& checks) {
    json arr = json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name}, {"passed", c.passed}, {"margin", c.margin}, {"detail", c.detail}});
    return arr;
}

json load_config_file(const std::string& path) {
    try {
        return json::parse(rb::io::read_file(path));
    } catch (const std::exception& e) {
        throw std::invalid_argument("config file '" + path + "': " + e.what());
    }
}

// --------------------------- verify ---------------------------------------

int cmd_verify(const std::string& suite, const std::string& config_path, std::optional<std::uint64_t> seed,
               std::optional<unsigned> jobs, std::optional<std::uint64_t> trials, const std::string& out_dir,
               const std::string& tag, bool as_json, const std::string& joint_csv, const std::string& loss_csv,
               std::uint64_t file_n, double file_loss_sup, const std::string& eps_list) {
    rb::VerifyOptions opt;
    std::string suite_name = suite;
    if (!config_path.empty()) {
        const json cfg = load_config_file(config_path);
        if (cfg.contains("seed")) opt.seed = cfg["seed"].get<std::uint64_t>();
        if (cfg.contains("jobs")) opt.jobs = cfg["jobs"].get<unsigned>();
        if (cfg.contains("trials")) opt.trials = cfg["trials"].get<std::uint64_t>();
        if (cfg.contains("suite")) suite_name = cfg["suite"].get<std::string>();
    }
    if (seed) opt.seed = *seed;
    if (jobs) opt.jobs = *jobs;
    if (trials) opt.trials = *trials;

    json config_echo;
    config_echo["command"] = "verify";
    config_echo["suite"] = suite_name;
    config_echo["seed"] = opt.seed;
    config_echo["jobs"] = opt.jobs;
    if (opt.trials) config_echo["trials"] = *opt.trials;

    rb::CheckList checks;
    std::optional<rb::GenBoundReport> file_report;
    if (!joint_csv.empty()) {
        // File-driven generalization-bound run on a user-provided joint
        // distribution and loss table.
        const rb::Pmf q_bar = rb::io::read_joint_csv(joint_csv);
        const std::vector<double> loss = rb::io::read_loss_table_csv(loss_csv, q_bar.probs.size());
        std::vector<double> eps;
        for (const auto& tok : CLI::detail::split(eps_list, ',')) eps.push_back(std::stod(tok));
        const rb::GenBoundReport rep = rb::verify_gen_bound(q_bar, file_n, loss, file_loss_sup, eps,
                                                            opt.trials.value_or(100000), rb::RngSeed{opt.seed},
                                                            opt.jobs);
        file_report = rep;
        double worst = rb::kInfinity;
        for (std::size_t i = 0; i < eps.size(); ++i) {
            const double slack = 3.0 * rb::wilson_half_width(rep.empirical_tail[i] * static_cast<double>(rep.trials),
                                                             static_cast<double>(rep.trials));
            worst = std::min(worst, rep.bound_values[i] + slack - rep.empirical_tail[i]);
        }
        checks.push_back(rb::CheckResult{"gen_tail_bound_file", worst >= 0.0, worst,
                                         "file-driven run over " + std::to_string(rep.trials) + " trials"});
        if (rep.low_trials_warning)
            checks.push_back(
                rb::CheckResult{"low_trials_warning", true, 0.0, "trials < 1000; tail estimates unreliable"});
    } else {
        checks = rb::run_suite(suite_name, opt);
    }

    print_checks(checks, as_json, config_echo);
    if (!out_dir.empty()) {
        const auto dir = rb::io::run_dir(out_dir, "verify", tag);
        json payload;
        payload["checks"] = checks_json(checks);
        bool all = true;
        for (const auto& c : checks) all = all && c.passed;
        payload["all_passed"] = all;
        rb::io::write_file(dir / "report.json", rb::io::wrap_output(config_echo, payload).dump(2) + "\n");
        if (file_report) {
            rb::io::write_file(dir / "gen_bound.json",
                               rb::io::wrap_output(config_echo, rb::io::gen_bound_report_json(*file_report)).dump(2) +
                                   "\n");
            rb::io::write_file(dir / "gen_bound.csv", rb::io::gen_bound_report_csv(*file_report));
        }
    }
    for (const auto& c : checks)
        if (!c.passed) return kExitContractViolation;
    return kExitOk;
}

// --------------------------- complexity -----------------------------------

int cmd_complexity(const std::string& dataset_path, double prior_alpha, std::uint64_t samples, std::uint64_t seed,
                   unsigned jobs, const std::string& out_dir, const std::string& tag, bool as_json) {
    const rb::io::DatasetFile file = rb::io::read_dataset_csv(dataset_path);
    rb::PosteriorSpec post;
    post.counts = rb::io::joint_counts(file);
    post.n = file.n;
    post.prior_alpha.assign(post.counts.size(), prior_alpha);
    post.validate();

    const rb::ComplexityEstimate est = rb::estimate_complexity(post, samples, rb::RngSeed{seed}, jobs);
    const double lower = rb::complexity_lower_bound(post);

    json config_echo;
    config_echo["command"] = "complexity";
    config_echo["dataset"] = dataset_path;
    config_echo["prior_alpha"] = prior_alpha;
    config_echo["samples"] = samples;
    config_echo["seed"] = seed;
    config_echo["jobs"] = jobs;

    json payload = rb::io::complexity_estimate_json(est);
    payload["lower_bound"] = lower;
    const std::optional<double> upper = rb::complexity_upper_bound_report(post);
    payload["upper_bound_report"] = upper ? json(*upper) : json(nullptr);
    payload["joint_alphabet"] = post.counts.size();
    payload["n"] = post.n;
    payload["suggested_regularization"] = std::sqrt(est.closed_form);

    const json doc = rb::io::wrap_output(config_echo, payload);
    if (as_json) {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "complexity closed form : " << rb::io::format_double(est.closed_form) << " nats\n"
                  << "Monte-Carlo estimate   : " << rb::io::format_double(est.mean) << " +/- "
                  << rb::io::format_double(est.std_error) << " (" << est.num_samples << " samples)\n"
                  << "lower bound            : " << rb::io::format_double(lower) << "\n"
                  << "suggested reg. weight  : " << rb::io::format_double(std::sqrt(est.closed_form))
                  << " (advisory, proportional to sqrt(C))\n";
    }
    if (!out_dir.empty()) {
        const auto dir = rb::io::run_dir(out_dir, "complexity", tag);
        rb::io::write_file(dir / "complexity.json", doc.dump(2) + "\n");
    }
    return kExitOk;
}

// --------------------------- diagnose -------------------------------------

int cmd_diagnose(const std::string& checkpoint_path, const std::string& dataset_path, const std::string& loss_name,
                 double l_max, double delta, double prior_alpha, const std::string& out_dir, const std::string& tag,
                 bool as_json) {
    const rb::io::Checkpoint ckpt = rb::io::load_checkpoint(checkpoint_path);
    const rb::io::DatasetFile file = rb::io::read_dataset_csv(dataset_path);
    if (file.dataset.feature_dim() != ckpt.spec.input_dim || file.num_classes > ckpt.spec.num_classes)
        throw std::invalid_argument("diagnose: dataset does not match the checkpoint's model spec");

    rb::LossSpec loss = rb::LossSpec::softmax_cross_entropy();
    if (loss_name == "clipped") loss = rb::LossSpec::clipped_cross_entropy(l_max);
    else if (loss_name == "zero_one") loss = rb::LossSpec::zero_one();
    else if (loss_name != "sce") throw std::invalid_argument("diagnose: unknown loss '" + loss_name + "'");

    // Pad conditionals if the CSV mentioned fewer labels than the model has.
    rb::Dataset ds = file.dataset;
    if (file.num_classes < ckpt.spec.num_classes)
        for (auto& e : ds.entries) e.q_yx.probs.resize(ckpt.spec.num_classes, 0.0);

    std::vector<rb::InputDiagnostic> rows;
    const rb::FitReport rep = rb::fit_report(ckpt.spec, ckpt.params, ds, loss, &rows);

    json config_echo;
    config_echo["command"] = "diagnose";
    config_echo["checkpoint"] = checkpoint_path;
    config_echo["dataset"] = dataset_path;
    config_echo["loss"] = loss_name;
    config_echo["delta"] = delta;
    config_echo["prior_alpha"] = prior_alpha;

    // Bounded losses additionally get the assembled expected-risk bound
    // over the dataset's own joint alphabet.
    json payload = rb::io::fit_report_json(rep);
    std::optional<rb::RiskBoundReport> bound_rep;
    if (loss.bounded()) {
        rb::PosteriorSpec post;
        post.counts = rb::io::joint_counts(file);
        post.counts.resize(file.dataset.entries.size() * ckpt.spec.num_classes, 0);
        post.n = file.n;
        post.prior_alpha.assign(post.counts.size(), prior_alpha);
        bound_rep = rb::expected_risk_bound(ckpt.spec, ckpt.params, ds, post, delta, loss);
        payload["risk_bound"] = rb::io::risk_bound_report_json(*bound_rep);
    } else {
        payload["risk_bound"] = nullptr;
    }

    const json doc = rb::io::wrap_output(config_echo, payload);
    if (as_json) {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "fit            : " << rb::io::format_double(rep.fit) << "\n"
                  << "fit_normalized : " << rb::io::format_double(rep.fit_normalized) << "\n"
                  << "bound sqrt(E[F+G]) : " << rb::io::format_double(rep.bound) << "\n"
                  << "max lambda_max(eNTK) : " << rb::io::format_double(rep.lambda_max_max) << "\n";
    }
    if (!out_dir.empty()) {
        const auto dir = rb::io::run_dir(out_dir, "diagnose", tag);
        rb::io::write_file(dir / "fit_report.json", doc.dump(2) + "\n");
        rb::io::write_file(dir / "per_input.csv", rb::io::input_diagnostics_csv(rows));
        if (bound_rep)
            rb::io::write_file(dir / "risk_bound.json",
                               rb::io::wrap_output(config_echo, rb::io::risk_bound_report_json(*bound_rep)).dump(2) +
                                   "\n");
    }
    return kExitOk;
}

// --------------------------- train ----------------------------------------

rb::ModelSpec model_spec_from_json(const json& j) {
    rb::ModelSpec spec{2, {16}, 3, rb::Activation::Tanh};
    if (j.contains("input_dim")) spec.input_dim = j["input_dim"].get<std::size_t>();
    if (j.contains("hidden_dims")) spec.hidden_dims = j["hidden_dims"].get<std::vector<std::size_t>>();
    if (j.contains("num_classes")) spec.num_classes = j["num_classes"].get<std::size_t>();
    if (j.contains("activation")) spec.activation = rb::activation_from_string(j["activation"].get<std::string>());
    spec.validate();
    return spec;
}

rb::SyntheticDataSpec data_spec_from_json(const json& j) {
    rb::SyntheticDataSpec spec;
    if (j.contains("num_grid_points")) spec.num_grid_points = j["num_grid_points"].get<std::size_t>();
    if (j.contains("input_dim")) spec.input_dim = j["input_dim"].get<std::size_t>();
    if (j.contains("num_classes")) spec.num_classes = j["num_classes"].get<std::size_t>();
    if (j.contains("label_noise")) spec.label_noise = j["label_noise"].get<double>();
    if (j.contains("train_n")) spec.train_n = j["train_n"].get<std::uint64_t>();
    if (j.contains("test_n")) spec.test_n = j["test_n"].get<std::uint64_t>();
    spec.validate();
    return spec;
}

rb::TrainConfig train_config_from_json(const json& j) {
    rb::TrainConfig cfg;
    if (j.contains("schedule")) {
        cfg.learning_rate_schedule.clear();
        for (const auto& pair : j["schedule"])
            cfg.learning_rate_schedule.emplace_back(pair.at(0).get<std::uint64_t>(), pair.at(1).get<double>());
    }
    if (j.contains("momentum")) cfg.momentum = j["momentum"].get<double>();
    if (j.contains("weight_decay")) cfg.weight_decay = j["weight_decay"].get<double>();
    if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<std::uint64_t>();
    if (j.contains("epochs")) cfg.epochs = j["epochs"].get<std::uint64_t>();
    if (j.contains("stabilization_window")) cfg.stabilization_window = j["stabilization_window"].get<std::uint64_t>();
    if (j.contains("stabilization_tolerance"))
        cfg.stabilization_tolerance = j["stabilization_tolerance"].get<double>();
    cfg.validate();
    return cfg;
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed_override,
              const std::string& seeds_csv, const std::string& out_dir, const std::string& tag, bool as_json) {
    json cfg = json::object();
    if (!config_path.empty()) cfg = load_config_file(config_path);
    const rb::ModelSpec model_spec = model_spec_from_json(cfg.value("model", json::object()));
    const rb::SyntheticDataSpec data_spec = data_spec_from_json(cfg.value("data", json::object()));
    const rb::TrainConfig train_cfg = train_config_from_json(cfg.value("train", json::object()));
    if (model_spec.input_dim != data_spec.input_dim || model_spec.num_classes != data_spec.num_classes)
        throw std::invalid_argument("train: model and data specs disagree on dimensions");

    std::vector<std::uint64_t> seeds;
    if (!seeds_csv.empty())
        for (const auto& tok : CLI::detail::split(seeds_csv, ',')) seeds.push_back(std::stoull(tok));
    else if (seed_override) seeds.push_back(*seed_override);
    else if (cfg.contains("seeds")) seeds = cfg["seeds"].get<std::vector<std::uint64_t>>();
    else seeds.push_back(1);

    json config_echo;
    config_echo["command"] = "train";
    config_echo["model"] = {{"input_dim", model_spec.input_dim},
                            {"hidden_dims", model_spec.hidden_dims},
                            {"num_classes", model_spec.num_classes},
                            {"activation", rb::to_string(model_spec.activation)}};
    config_echo["data"] = {{"num_grid_points", data_spec.num_grid_points}, {"input_dim", data_spec.input_dim},
                           {"num_classes", data_spec.num_classes},         {"label_noise", data_spec.label_noise},
                           {"train_n", data_spec.train_n},                 {"test_n", data_spec.test_n}};
    json sched = json::array();
    for (const auto& [e, r] : train_cfg.learning_rate_schedule) sched.push_back({e, r});
    config_echo["train"] = {{"schedule", sched},
                            {"momentum", train_cfg.momentum},
                            {"weight_decay", train_cfg.weight_decay},
                            {"batch_size", train_cfg.batch_size},
                            {"epochs", train_cfg.epochs},
                            {"stabilization_window", train_cfg.stabilization_window},
                            {"stabilization_tolerance", train_cfg.stabilization_tolerance}};
    config_echo["seeds"] = seeds;

    const std::filesystem::path dir =
        out_dir.empty() ? std::filesystem::path() : rb::io::run_dir(out_dir, "train", tag);

    bool any_diverged = false;
    json summary = json::array();
    for (std::uint64_t s : seeds) {
        const rb::ExperimentResult run =
            rb::run_correlation_experiment(model_spec, train_cfg, data_spec, rb::RngSeed{s});
        any_diverged = any_diverged || run.diverged;
        const std::string csv = rb::io::epoch_records_to_csv(run.records);
        if (!dir.empty()) {
            rb::io::write_file(dir / ("records_seed" + std::to_string(s) + ".csv"), csv);
            rb::io::write_file(dir / ("correlation_seed" + std::to_string(s) + ".json"),
                               rb::io::wrap_output(config_echo,
                                                   rb::io::correlation_report_json(run.report, run.records))
                                       .dump(2) +
                                   "\n");
            rb::io::save_checkpoint(dir / ("checkpoint_seed" + std::to_string(s) + ".json"), model_spec, run.params,
                                    rb::RngSeed{s});
        }
        json row;
        row["seed"] = s;
        row["diverged"] = run.diverged;
        row["epochs_completed"] = run.records.size();
        row["stabilized_at"] = run.report.stabilized_at;
        row["r_accuracy_f"] = run.report.r_f_defined ? json(run.report.r_accuracy_f) : json(nullptr);
        row["r_accuracy_g"] = run.report.r_g_defined ? json(run.report.r_accuracy_g) : json(nullptr);
        summary.push_back(std::move(row));
        if (!as_json)
            std::cout << "seed " << s << ": " << run.records.size() << " epochs"
                      << (run.diverged ? " (diverged)" : "") << ", stabilized_at="
                      << run.report.stabilized_at << "\n";
    }
    const json doc = rb::io::wrap_output(config_echo, json{{"runs", summary}});
    if (as_json) std::cout << doc.dump(2) << "\n";
    if (!dir.empty()) rb::io::write_file(dir / "summary.json", doc.dump(2) + "\n");
    return any_diverged ? kExitContractViolation : kExitOk;
}

// --------------------------- correlate ------------------------------------

int cmd_correlate(const std::string& records_path, std::uint64_t window, double tolerance, std::uint64_t seed_label,
                  bool as_json) {
    const std::vector<rb::EpochRecord> records = rb::io::epoch_records_from_csv(rb::io::read_file(records_path));
    const rb::CorrelationReport rep = rb::correlate_records(records, window, tolerance, seed_label);
    json config_echo;
    config_echo["command"] = "correlate";
    config_echo["records"] = records_path;
    config_echo["window"] = window;
    config_echo["tolerance"] = tolerance;
    const json doc = rb::io::wrap_output(config_echo, rb::io::correlation_report_json(rep, records));
    if (as_json) {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "stabilized_at : " << rep.stabilized_at << (rep.stable ? "" : " (never; final window used)")
                  << "\n"
                  << "r(acc, E[F])  : " << (rep.r_f_defined ? rb::io::format_double(rep.r_accuracy_f) : "undefined")
                  << "\n"
                  << "r(acc, E[G])  : " << (rep.r_g_defined ? rb::io::format_double(rep.r_accuracy_g) : "undefined")
                  << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Information-theoretic risk diagnostics: task complexity, fitting-error decomposition, "
                 "eNTK spectra, and Monte-Carlo verification of their bounds"};
    app.require_subcommand(1);

    // verify
    std::string v_suite = "all";
    std::string v_config;
    std::optional<std::uint64_t> v_seed;
    std::optional<unsigned> v_jobs;
    std::optional<std::uint64_t> v_trials;
    std::string v_out;
    std::string v_tag = "run";
    bool v_json = false;
    std::string v_joint_csv;
    std::string v_loss_csv;
    std::uint64_t v_n = 50;
    double v_loss_sup = 1.0;
    std::string v_eps = "0.05,0.1,0.2,0.4";
    auto* verify = app.add_subcommand("verify", "run lemma/theorem verification suites");
    verify->add_option("--suite", v_suite, "lemmas|gen_bound|fit_bound|hessian|all")->default_str("all");
    verify->add_option("--config", v_config, "JSON config file (seed/jobs/trials/suite)");
    verify->add_option("--seed", v_seed, "base seed");
    verify->add_option("--jobs", v_jobs, "parallelism degree (results independent of it)");
    verify->add_option("--trials", v_trials, "Monte-Carlo trial override");
    verify->add_option("--out", v_out, "output directory");
    verify->add_option("--tag", v_tag, "run tag under the output directory");
    verify->add_flag("--json", v_json, "machine-readable stdout");
    verify->add_option("--joint-csv", v_joint_csv, "joint distribution CSV (z_index,probability)");
    verify->add_option("--loss-csv", v_loss_csv, "loss table CSV (z_index,loss)");
    verify->add_option("--n", v_n, "sample size for the file-driven gen bound");
    verify->add_option("--loss-sup", v_loss_sup, "loss sup L for the file-driven gen bound");
    verify->add_option("--epsilons", v_eps, "comma-separated epsilon grid");

    // complexity
    std::string c_dataset;
    double c_alpha = 1.0;
    std::uint64_t c_samples = 100000;
    std::uint64_t c_seed = 1;
    unsigned c_jobs = 1;
    std::string c_out;
    std::string c_tag = "run";
    bool c_json = false;
    auto* complexity = app.add_subcommand("complexity", "estimate task complexity from a dataset CSV");
    complexity->add_option("--dataset", c_dataset, "dataset CSV (header f0,...,label)")->required();
    complexity->add_option("--prior-alpha", c_alpha, "symmetric Dirichlet prior concentration");
    complexity->add_option("--samples", c_samples, "Monte-Carlo sample count");
    complexity->add_option("--seed", c_seed, "seed");
    complexity->add_option("--jobs", c_jobs, "parallelism degree");
    complexity->add_option("--out", c_out, "output directory");
    complexity->add_option("--tag", c_tag, "run tag");
    complexity->add_flag("--json", c_json, "machine-readable stdout");

    // diagnose
    std::string d_ckpt;
    std::string d_dataset;
    std::string d_loss = "sce";
    double d_lmax = 10.0;
    double d_delta = 0.1;
    double d_alpha = 1.0;
    std::string d_out;
    std::string d_tag = "run";
    bool d_json = false;
    auto* diagnose = app.add_subcommand("diagnose", "fitting-error report for a checkpoint on a dataset");
    diagnose->add_option("--checkpoint", d_ckpt, "model checkpoint JSON")->required();
    diagnose->add_option("--dataset", d_dataset, "dataset CSV")->required();
    diagnose->add_option("--loss", d_loss, "sce|clipped|zero_one");
    diagnose->add_option("--l-max", d_lmax, "clip level for --loss clipped");
    diagnose->add_option("--delta", d_delta, "tail probability for the assembled risk bound");
    diagnose->add_option("--prior-alpha", d_alpha, "symmetric prior for the bound's complexity term");
    diagnose->add_option("--out", d_out, "output directory");
    diagnose->add_option("--tag", d_tag, "run tag");
    diagnose->add_flag("--json", d_json, "machine-readable stdout");

    // train
    std::string t_config;
    std::optional<std::uint64_t> t_seed;
    std::string t_seeds;
    std::string t_out;
    std::string t_tag = "run";
    bool t_json = false;
    auto* train = app.add_subcommand("train", "run the synthetic training experiment");
    train->add_option("--config", t_config, "experiment config JSON");
    train->add_option("--seed", t_seed, "single seed");
    train->add_option("--seeds", t_seeds, "comma-separated seed batch");
    train->add_option("--out", t_out, "output directory");
    train->add_option("--tag", t_tag, "run tag");
    train->add_flag("--json", t_json, "machine-readable stdout");

    // correlate
    std::string r_records;
    std::uint64_t r_window = 10;
    double r_tol = 1e-3;
    std::uint64_t r_seed_label = 0;
    bool r_json = false;
    auto* correlate = app.add_subcommand("correlate", "recompute Pearson correlations from a records CSV");
    correlate->add_option("--records", r_records, "epoch records CSV")->required();
    correlate->add_option("--window", r_window, "stabilization window (epochs)");
    correlate->add_option("--tolerance", r_tol, "stabilization tolerance on train loss");
    correlate->add_option("--seed-label", r_seed_label, "seed label echoed into the report");
    correlate->add_flag("--json", r_json, "machine-readable stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfigError;
    }

    try {
        if (verify->parsed())
            return cmd_verify(v_suite, v_config, v_seed, v_jobs, v_trials, v_out, v_tag, v_json, v_joint_csv,
                              v_loss_csv, v_n, v_loss_sup, v_eps);
        if (complexity->parsed())
            return cmd_complexity(c_dataset, c_alpha, c_samples, c_seed, c_jobs, c_out, c_tag, c_json);
        if (diagnose->parsed())
            return cmd_diagnose(d_ckpt, d_dataset, d_loss, d_lmax, d_delta, d_alpha, d_out, d_tag, d_json);
        if (train->parsed()) return cmd_train(t_config, t_seed, t_seeds, t_out, t_tag, t_json);
        if (correlate->parsed()) return cmd_correlate(r_records, r_window, r_tol, r_seed_label, r_json);
    } catch (const rb::io::ParseError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::domain_error& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitContractViolation;
    }
    return kExitConfigError;
}
