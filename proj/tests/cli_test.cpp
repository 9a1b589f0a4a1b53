// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 riskbounds contributors
//
// End-to-end checks of the command-line surface: exit codes, file
// artifacts, and rerun determinism. Drives the real binary.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "riskbounds/io.hpp"

namespace fs = std::filesystem;
namespace rb = riskbounds;

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << what << "\n";
    if (!ok) ++failures;
}

int run(const std::string& args, const fs::path& stdout_file) {
    const std::string cmd = std::string(RISKBOUNDS_CLI_PATH) + " " + args + " > " + stdout_file.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

int main() {
    const fs::path tmp = fs::temp_directory_path() / ("riskbounds_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(tmp);
    const fs::path out = tmp / "stdout.txt";

    // Contract suites succeed with exit 0.
    expect(run("verify --suite lemmas --seed 1", out) == 0, "verify lemmas exits 0");

    // Unknown suite and malformed config are configuration errors.
    expect(run("verify --suite bogus", out) == 2, "unknown suite exits 2");
    rb::io::write_file(tmp / "bad.json", "{not json");
    expect(run("verify --config " + (tmp / "bad.json").string(), out) == 2, "malformed config exits 2");
    expect(run("frobnicate", out) == 2, "unknown subcommand exits 2");

    // Complexity on a two-symbol dataset: frozen closed-form value.
    rb::io::write_file(tmp / "pairs.csv", "f0,label\n0,0\n0,1\n0,0\n0,1\n0,0\n0,1\n0,0\n0,1\n0,0\n0,1\n");
    expect(run("complexity --dataset " + (tmp / "pairs.csv").string() + " --samples 2000 --seed 3", out) == 0,
           "complexity exits 0");
    expect(rb::io::read_file(out).find("0.0216984") != std::string::npos, "closed form 0.021698 printed");
    rb::io::write_file(tmp / "empty.csv", "f0,label\n");
    expect(run("complexity --dataset " + (tmp / "empty.csv").string(), out) == 2, "empty dataset CSV exits 2");

    // Training: artifacts, determinism, and validation.
    rb::io::write_file(tmp / "train.json",
                       "{\"model\":{\"input_dim\":2,\"hidden_dims\":[4],\"num_classes\":2},"
                       "\"data\":{\"num_grid_points\":6,\"input_dim\":2,\"num_classes\":2,"
                       "\"label_noise\":0.1,\"train_n\":300,\"test_n\":100},"
                       "\"train\":{\"epochs\":6,\"batch_size\":4,\"schedule\":[[0,0.1]]}}");
    const std::string train_cmd =
        "train --config " + (tmp / "train.json").string() + " --seeds 1,2 --out " + (tmp / "runs").string();
    expect(run(train_cmd, out) == 0, "train exits 0");
    const fs::path run_dir = tmp / "runs" / "train" / "run";
    expect(fs::exists(run_dir / "records_seed1.csv"), "records_seed1.csv written");
    expect(fs::exists(run_dir / "records_seed2.csv"), "records_seed2.csv written");
    expect(fs::exists(run_dir / "summary.json"), "summary.json written");
    expect(fs::exists(run_dir / "checkpoint_seed1.json"), "checkpoint written");
    const std::string records_first = rb::io::read_file(run_dir / "records_seed1.csv");
    expect(records_first.rfind("epoch,train_loss,test_accuracy,mean_f,mean_g,lambda_max_max\n", 0) == 0,
           "records CSV header matches the schema");
    expect(run(train_cmd, out) == 0, "train rerun exits 0");
    expect(rb::io::read_file(run_dir / "records_seed1.csv") == records_first, "rerun records are byte-identical");

    rb::io::write_file(tmp / "zero.json", "{\"train\":{\"epochs\":0}}");
    expect(run("train --config " + (tmp / "zero.json").string(), out) == 2, "zero-epoch config exits 2");

    rb::io::write_file(tmp / "explode.json",
                       "{\"model\":{\"input_dim\":2,\"hidden_dims\":[4],\"num_classes\":2,"
                       "\"activation\":\"identity\"},"
                       "\"data\":{\"num_grid_points\":6,\"input_dim\":2,\"num_classes\":2,"
                       "\"label_noise\":0.1,\"train_n\":200,\"test_n\":100},"
                       "\"train\":{\"epochs\":10,\"schedule\":[[0,1e200]],\"weight_decay\":0}}");
    expect(run("train --config " + (tmp / "explode.json").string() + " --seed 1 --out " + (tmp / "runs").string() +
                   " --tag boom",
               out) == 1,
           "divergent run exits 1");
    expect(fs::exists(tmp / "runs" / "train" / "boom" / "records_seed1.csv"),
           "partial records preserved on divergence");

    // Correlate over the produced records.
    expect(run("correlate --records " + (run_dir / "records_seed1.csv").string() + " --window 3 --tolerance 10",
               out) == 0,
           "correlate exits 0");

    // Diagnose against the training checkpoint.
    rb::io::write_file(tmp / "diag.csv", "f0,f1,label\n0.1,0.2,0\n0.1,0.2,1\n-0.4,0.7,1\n");
    expect(run("diagnose --checkpoint " + (run_dir / "checkpoint_seed1.json").string() + " --dataset " +
                   (tmp / "diag.csv").string() + " --out " + (tmp / "runs").string(),
               out) == 0,
           "diagnose exits 0");
    const std::string per_input = rb::io::read_file(tmp / "runs" / "diagnose" / "run" / "per_input.csv");
    expect(std::count(per_input.begin(), per_input.end(), '\n') == 3, "per-input CSV has one row per distinct x");
    expect(run("diagnose --checkpoint " + (run_dir / "checkpoint_seed1.json").string() + " --dataset " +
                   (tmp / "diag.csv").string() + " --loss zero_one --out " + (tmp / "runs").string(),
               out) == 0,
           "diagnose with a bounded loss exits 0");
    expect(fs::exists(tmp / "runs" / "diagnose" / "run" / "risk_bound.json"),
           "bounded loss emits the assembled risk bound");
    expect(run("diagnose --checkpoint " + (run_dir / "checkpoint_seed1.json").string() + " --dataset " +
                   (tmp / "diag.csv").string() + " --json",
               out) == 0,
           "diagnose --json exits 0");
    {
        const auto doc = nlohmann::json::parse(rb::io::read_file(out));
        const double fit_n = doc["report"]["fit_normalized"].get<double>();
        const double bound = doc["report"]["bound"].get<double>();
        expect(fit_n <= bound + 1e-9, "reported fit_normalized respects the bound");
        expect(doc["format_version"] == rb::io::kFormatVersion, "report carries the format version");
    }
    expect(run("diagnose --checkpoint " + (run_dir / "records_seed1.csv").string() + " --dataset " +
                   (tmp / "diag.csv").string(),
               out) != 0,
           "checkpoint/dataset mismatch fails");

    // A low trial override flags itself in the gen-bound suite output.
    const int low_trials_exit = run("verify --suite gen_bound --trials 500 --seed 6 --json", out);
    expect(low_trials_exit == 0 || low_trials_exit == 1, "low-trials gen bound completes");
    expect(rb::io::read_file(out).find("low_trials_warning") != std::string::npos,
           "low-trials warning flag reported");

    // File-driven generalization bound.
    rb::io::write_file(tmp / "joint.csv", "z_index,probability\n0,0.2\n1,0.2\n2,0.2\n3,0.2\n4,0.1\n5,0.1\n");
    rb::io::write_file(tmp / "loss.csv", "z_index,loss\n0,0\n1,0.2\n2,0.4\n3,0.6\n4,0.8\n5,1\n");
    expect(run("verify --suite gen_bound --joint-csv " + (tmp / "joint.csv").string() + " --loss-csv " +
                   (tmp / "loss.csv").string() + " --n 50 --trials 5000 --seed 4 --out " + (tmp / "runs").string(),
               out) == 0,
           "file-driven gen bound exits 0");
    expect(fs::exists(tmp / "runs" / "verify" / "run" / "gen_bound.csv"), "gen bound CSV artifact written");

    fs::remove_all(tmp);
    if (failures == 0) {
        std::cout << "cli_tests: all checks passed\n";
        return 0;
    }
    std::cout << "cli_tests: " << failures << " failures\n";
    return 1;
}
