#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 riskbounds contributors

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskbounds/complexity.hpp"
#include "riskbounds/dataset.hpp"
#include "riskbounds/experiment.hpp"
#include "riskbounds/fitdiag.hpp"
#include "riskbounds/model.hpp"
#include "riskbounds/risk.hpp"

namespace riskbounds::io {

using nlohmann::json;

inline constexpr const char* kFormatVersion = "riskbounds-1";

/// Unreadable or malformed input files; the CLI maps this to its
/// configuration-error exit code.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// 17 significant digits; used where bit-exact round-trips are contractual.
inline std::string format_double_17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path.string());
    out << content;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

inline double parse_double(const std::string& s, const char* where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string(where) + ": cannot parse number '" + s + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& s, const char* where) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string(where) + ": cannot parse integer '" + s + "'");
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dataset CSV: header f0,f1,...,label; one sample per row.
// ---------------------------------------------------------------------------

struct DatasetFile {
    Dataset dataset;
    std::size_t num_classes = 0;
    std::uint64_t n = 0;
    std::vector<std::vector<double>> xs;      // raw rows, pre-grouping
    std::vector<std::size_t> labels;
};

inline DatasetFile read_dataset_csv(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw ParseError("dataset CSV is empty: " + path.string());
    const auto header = detail::split_csv_line(line);
    if (header.size() < 2 || header.back() != "label")
        throw ParseError("dataset CSV must have header f0,...,label: " + path.string());
    const std::size_t dim = header.size() - 1;

    DatasetFile out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != dim + 1) throw ParseError("dataset CSV row width mismatch: " + path.string());
        std::vector<double> x(dim);
        for (std::size_t i = 0; i < dim; ++i) x[i] = detail::parse_double(cells[i], "dataset CSV");
        const std::uint64_t label = detail::parse_u64(cells[dim], "dataset CSV");
        out.xs.push_back(std::move(x));
        out.labels.push_back(static_cast<std::size_t>(label));
        out.num_classes = std::max(out.num_classes, static_cast<std::size_t>(label) + 1);
    }
    if (out.xs.empty()) throw ParseError("dataset CSV has no rows: " + path.string());
    out.n = out.xs.size();
    out.dataset = Dataset::from_samples(out.xs, out.labels, out.num_classes);
    return out;
}

/// Joint counts over z = group_index * num_classes + label, for building a
/// PosteriorSpec on the dataset's own joint alphabet.
inline std::vector<std::uint64_t> joint_counts(const DatasetFile& file) {
    std::vector<std::uint64_t> counts(file.dataset.entries.size() * file.num_classes, 0);
    const double n = static_cast<double>(file.n);
    for (std::size_t g = 0; g < file.dataset.entries.size(); ++g) {
        const auto& e = file.dataset.entries[g];
        const double group_n = e.weight * n;
        for (std::size_t y = 0; y < file.num_classes; ++y)
            counts[g * file.num_classes + y] = static_cast<std::uint64_t>(std::llround(e.q_yx.probs[y] * group_n));
    }
    return counts;
}

// ---------------------------------------------------------------------------
// Flat joint distribution CSV (z_index, probability) and loss table CSV.
// ---------------------------------------------------------------------------

inline Pmf read_joint_csv(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    std::vector<std::pair<std::uint64_t, double>> rows;
    std::uint64_t max_z = 0;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (first && (cells[0] == "z_index" || cells[0] == "z")) {
            first = false;
            continue;
        }
        first = false;
        if (cells.size() != 2) throw ParseError("joint CSV needs two columns: " + path.string());
        const std::uint64_t z = detail::parse_u64(cells[0], "joint CSV");
        rows.emplace_back(z, detail::parse_double(cells[1], "joint CSV"));
        max_z = std::max(max_z, z);
    }
    if (rows.empty()) throw ParseError("joint CSV has no rows: " + path.string());
    std::vector<double> probs(max_z + 1, 0.0);
    for (const auto& [z, p] : rows) probs[z] = p;
    return Pmf(std::move(probs));
}

inline std::vector<double> read_loss_table_csv(const std::filesystem::path& path, std::size_t alphabet) {
    std::istringstream in(read_file(path));
    std::string line;
    std::vector<double> loss(alphabet, 0.0);
    std::vector<bool> seen(alphabet, false);
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (first && (cells[0] == "z_index" || cells[0] == "z")) {
            first = false;
            continue;
        }
        first = false;
        if (cells.size() != 2) throw ParseError("loss CSV needs two columns: " + path.string());
        const std::uint64_t z = detail::parse_u64(cells[0], "loss CSV");
        if (z >= alphabet) throw ParseError("loss CSV index out of range: " + path.string());
        loss[z] = detail::parse_double(cells[1], "loss CSV");
        seen[z] = true;
    }
    for (std::size_t z = 0; z < alphabet; ++z)
        if (!seen[z]) throw ParseError("loss CSV is missing an index: " + path.string());
    return loss;
}

// ---------------------------------------------------------------------------
// Model checkpoint: JSON with the architecture fields, flat theta
// (17 significant digits), seed and a format version tag. Round-trips
// bit-exactly.
// ---------------------------------------------------------------------------

inline std::string checkpoint_to_string(const ModelSpec& spec, const ParamVector& params, RngSeed seed) {
    params.validate(spec);
    std::string s;
    s += "{\n";
    s += "  \"format_version\": \"" + std::string(kFormatVersion) + "\",\n";
    s += "  \"input_dim\": " + std::to_string(spec.input_dim) + ",\n";
    s += "  \"hidden_dims\": [";
    for (std::size_t i = 0; i < spec.hidden_dims.size(); ++i)
        s += (i ? ", " : "") + std::to_string(spec.hidden_dims[i]);
    s += "],\n";
    s += "  \"num_classes\": " + std::to_string(spec.num_classes) + ",\n";
    s += "  \"activation\": \"" + std::string(to_string(spec.activation)) + "\",\n";
    s += "  \"seed\": " + std::to_string(seed.seed) + ",\n";
    s += "  \"theta\": [";
    for (std::size_t i = 0; i < params.theta.size(); ++i) s += (i ? ", " : "") + format_double_17(params.theta[i]);
    s += "]\n}\n";
    return s;
}

inline void save_checkpoint(const std::filesystem::path& path, const ModelSpec& spec, const ParamVector& params,
                            RngSeed seed) {
    write_file(path, checkpoint_to_string(spec, params, seed));
}

struct Checkpoint {
    ModelSpec spec;
    ParamVector params;
    RngSeed seed;
};

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ParseError("checkpoint " + path.string() + ": " + e.what());
    }
    if (!j.contains("format_version") || j["format_version"] != kFormatVersion)
        throw ParseError("checkpoint format version mismatch: " + path.string());
    Checkpoint c;
    c.spec.input_dim = j.at("input_dim").get<std::size_t>();
    c.spec.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
    c.spec.num_classes = j.at("num_classes").get<std::size_t>();
    c.spec.activation = activation_from_string(j.at("activation").get<std::string>());
    c.seed.seed = j.at("seed").get<std::uint64_t>();
    c.params.theta = j.at("theta").get<std::vector<double>>();
    c.params.validate(c.spec);
    return c;
}

// ---------------------------------------------------------------------------
// Epoch records CSV (fixed 6-column schema) and correlation report JSON.
// ---------------------------------------------------------------------------

inline constexpr const char* kEpochCsvHeader = "epoch,train_loss,test_accuracy,mean_f,mean_g,lambda_max_max";

inline std::string epoch_records_to_csv(const std::vector<EpochRecord>& records) {
    std::string s = kEpochCsvHeader;
    s += "\n";
    for (const auto& r : records) {
        s += std::to_string(r.epoch);
        s += "," + format_double(r.train_loss);
        s += "," + format_double(r.test_accuracy);
        s += "," + format_double(r.mean_f);
        s += "," + format_double(r.mean_g);
        s += "," + format_double(r.lambda_max_max);
        s += "\n";
    }
    return s;
}

inline std::vector<EpochRecord> epoch_records_from_csv(const std::string& content) {
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line) || detail::split_csv_line(line).size() != 6)
        throw ParseError("epoch CSV: bad header");
    std::vector<EpochRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 6) throw ParseError("epoch CSV: bad row");
        EpochRecord r;
        r.epoch = detail::parse_u64(cells[0], "epoch CSV");
        r.train_loss = detail::parse_double(cells[1], "epoch CSV");
        r.test_accuracy = detail::parse_double(cells[2], "epoch CSV");
        r.mean_f = detail::parse_double(cells[3], "epoch CSV");
        r.mean_g = detail::parse_double(cells[4], "epoch CSV");
        r.lambda_max_max = detail::parse_double(cells[5], "epoch CSV");
        r.mean_residual_sq = r.mean_f + r.mean_g;
        records.push_back(r);
    }
    return records;
}

inline json correlation_report_json(const CorrelationReport& rep, const std::vector<EpochRecord>& records) {
    json j;
    j["seed"] = rep.seed;
    j["stabilized_at"] = rep.stabilized_at;
    j["window"] = rep.window;
    j["stable"] = rep.stable;
    j["r_accuracy_f"] = rep.r_f_defined ? json(rep.r_accuracy_f) : json(nullptr);
    j["r_accuracy_g"] = rep.r_g_defined ? json(rep.r_accuracy_g) : json(nullptr);
    j["accuracy_scale_divisor"] = rep.accuracy_scale_divisor;
    json scaled = json::array();
    for (const auto& r : records) scaled.push_back(r.test_accuracy / rep.accuracy_scale_divisor);
    j["accuracy_scaled"] = std::move(scaled);
    return j;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

inline json gen_bound_report_json(const GenBoundReport& rep) {
    json j;
    j["epsilon_grid"] = rep.epsilon_grid;
    j["empirical_tail"] = rep.empirical_tail;
    j["bound_values"] = rep.bound_values;
    j["loss_sup"] = rep.loss_sup;
    j["trials"] = rep.trials;
    j["mean_kl"] = rep.mean_kl;
    j["markov_t_grid"] = rep.markov_t_grid;
    j["markov_tail"] = rep.markov_tail;
    j["low_trials_warning"] = rep.low_trials_warning;
    return j;
}

inline std::string gen_bound_report_csv(const GenBoundReport& rep) {
    std::string s = "epsilon,empirical_tail,bound\n";
    for (std::size_t i = 0; i < rep.epsilon_grid.size(); ++i) {
        s += format_double(rep.epsilon_grid[i]);
        s += "," + format_double(rep.empirical_tail[i]);
        s += "," + format_double(rep.bound_values[i]);
        s += "\n";
    }
    return s;
}

inline json complexity_estimate_json(const ComplexityEstimate& est) {
    json j;
    j["mean"] = est.mean;
    j["std_error"] = est.std_error;
    j["num_samples"] = est.num_samples;
    j["closed_form"] = est.closed_form;
    j["consistent"] = est.consistent();
    return j;
}

inline json fit_report_json(const FitReport& rep) {
    json j;
    j["fit"] = rep.fit;
    j["fit_normalized"] = rep.fit_normalized;
    j["bound"] = rep.bound;
    j["loss_l2_mean"] = rep.loss_l2_mean;
    j["g_min"] = std::isfinite(rep.g_min) ? json(rep.g_min) : json(nullptr);
    j["lambda_max_max"] = rep.lambda_max_max;
    return j;
}

inline std::string input_diagnostics_csv(const std::vector<InputDiagnostic>& rows) {
    std::string s = "x_index,residual_sq,f_term,g_term,lambda_max\n";
    for (const auto& r : rows) {
        s += std::to_string(r.index);
        s += "," + format_double(r.residual_sq);
        s += "," + format_double(r.f_term);
        s += "," + format_double(r.g_term);
        s += "," + format_double(r.lambda_max);
        s += "\n";
    }
    return s;
}

inline json risk_bound_report_json(const RiskBoundReport& rep) {
    json j;
    j["model_risk"] = rep.model_risk;
    j["fit_bound_term"] = rep.fit_bound_term;
    j["gen_epsilon"] = rep.gen_epsilon;
    j["delta"] = rep.delta;
    j["total_bound"] = rep.total_bound;
    j["complexity"] = rep.complexity;
    j["loss_sup"] = rep.loss_sup;
    j["suggested_regularization"] = rep.suggested_regularization;
    return j;
}

// ---------------------------------------------------------------------------
// Run directory layout: <out>/<command>/<tag>/..., plus a `latest` pointer
// file next to the tag directories.
// ---------------------------------------------------------------------------

inline std::filesystem::path run_dir(const std::filesystem::path& out, const std::string& command,
                                     const std::string& tag) {
    const std::filesystem::path dir = out / command / tag;
    std::filesystem::create_directories(dir);
    write_file(out / command / "latest", tag + "\n");
    return dir;
}

/// Every emitted JSON document carries the format version plus the
/// resolved configuration it was produced under.
inline json wrap_output(json config_echo, json payload) {
    json j;
    j["format_version"] = kFormatVersion;
    j["config"] = std::move(config_echo);
    j["report"] = std::move(payload);
    return j;
}

}  // namespace riskbounds::io
