// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 riskbounds contributors

#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "riskbounds/io.hpp"

using namespace riskbounds;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("riskbounds_io_test_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE("io") {

TEST_CASE("format_double round-trips arbitrary values") {
    CounterRng rng(RngSeed{1});
    for (int c = 0; c < 1000; ++c) {
        const double v = std::ldexp(rng.normal(), static_cast<int>(rng.next_below(60)) - 30);
        CHECK(std::stod(io::format_double(v)) == v);
        CHECK(std::stod(io::format_double_17(v)) == v);
    }
}

TEST_CASE("checkpoint round-trips bit-exactly") {
    TempDir tmp;
    const ModelSpec spec{3, {5, 4}, 2, Activation::Relu};
    const ParamVector params = init_params(spec, RngSeed{99});
    const fs::path file = tmp.path / "ckpt.json";
    io::save_checkpoint(file, spec, params, RngSeed{99});
    const io::Checkpoint loaded = io::load_checkpoint(file);
    CHECK(loaded.spec.input_dim == 3);
    CHECK(loaded.spec.hidden_dims == std::vector<std::size_t>{5, 4});
    CHECK(loaded.spec.num_classes == 2);
    CHECK(loaded.spec.activation == Activation::Relu);
    CHECK(loaded.seed.seed == 99);
    REQUIRE(loaded.params.theta.size() == params.theta.size());
    for (std::size_t i = 0; i < params.theta.size(); ++i) CHECK(loaded.params.theta[i] == params.theta[i]);

    // Save -> load -> save is byte-stable.
    CHECK(io::checkpoint_to_string(loaded.spec, loaded.params, loaded.seed) ==
          io::checkpoint_to_string(spec, params, RngSeed{99}));

    io::write_file(tmp.path / "bad.json", "{\"format_version\": \"other\"}");
    CHECK_THROWS_AS(io::load_checkpoint(tmp.path / "bad.json"), std::runtime_error);
}

TEST_CASE("dataset CSV: grouping, counts, and error paths") {
    TempDir tmp;
    const fs::path file = tmp.path / "data.csv";
    io::write_file(file,
                   "f0,f1,label\n"
                   "0,0,0\n"
                   "0,0,1\n"
                   "0,0,0\n"
                   "1,0.5,2\n");
    const io::DatasetFile loaded = io::read_dataset_csv(file);
    CHECK(loaded.n == 4);
    CHECK(loaded.num_classes == 3);
    REQUIRE(loaded.dataset.entries.size() == 2);
    const auto& grouped = loaded.dataset.entries[0];  // (0,0) sorts first
    CHECK(grouped.weight == doctest::Approx(0.75));
    CHECK(grouped.q_yx.probs[0] == doctest::Approx(2.0 / 3.0));
    CHECK(grouped.q_yx.probs[1] == doctest::Approx(1.0 / 3.0));

    const std::vector<std::uint64_t> counts = io::joint_counts(loaded);
    CHECK(counts == std::vector<std::uint64_t>{2, 1, 0, 0, 0, 1});

    io::write_file(tmp.path / "empty.csv", "f0,label\n");
    CHECK_THROWS(io::read_dataset_csv(tmp.path / "empty.csv"));
    io::write_file(tmp.path / "badheader.csv", "a,b\n1,2\n");
    CHECK_THROWS(io::read_dataset_csv(tmp.path / "badheader.csv"));
    CHECK_THROWS(io::read_dataset_csv(tmp.path / "missing.csv"));
}

TEST_CASE("joint and loss-table CSV readers") {
    TempDir tmp;
    io::write_file(tmp.path / "joint.csv", "z_index,probability\n0,0.25\n1,0.25\n3,0.5\n");
    const Pmf joint = io::read_joint_csv(tmp.path / "joint.csv");
    CHECK(joint.probs == std::vector<double>{0.25, 0.25, 0.0, 0.5});

    io::write_file(tmp.path / "loss.csv", "z_index,loss\n0,0.1\n1,0.9\n2,0.5\n3,1\n");
    CHECK(io::read_loss_table_csv(tmp.path / "loss.csv", 4) == std::vector<double>{0.1, 0.9, 0.5, 1.0});
    CHECK_THROWS(io::read_loss_table_csv(tmp.path / "loss.csv", 5));  // missing index 4
}

TEST_CASE("epoch records CSV schema and round trip") {
    std::vector<EpochRecord> recs(2);
    recs[0] = EpochRecord{0, 1.5, 0.5, 0.125, 0.25, 3.0, 0.375, 0.1};
    recs[1] = EpochRecord{1, 1.25, 0.625, 0.1, 0.2, 2.5, 0.3, 0.05};
    const std::string csv = io::epoch_records_to_csv(recs);
    CHECK(csv.substr(0, csv.find('\n')) == "epoch,train_loss,test_accuracy,mean_f,mean_g,lambda_max_max");
    const std::vector<EpochRecord> back = io::epoch_records_from_csv(csv);
    REQUIRE(back.size() == 2);
    CHECK(back[1].train_loss == 1.25);
    CHECK(back[1].mean_g == 0.2);
    CHECK(back[0].epoch == 0);
    CHECK_THROWS(io::epoch_records_from_csv("bad,header\n"));
}

TEST_CASE("run directory layout writes a latest pointer") {
    TempDir tmp;
    const fs::path dir = io::run_dir(tmp.path, "verify", "mytag");
    CHECK(fs::exists(dir));
    CHECK(io::read_file(tmp.path / "verify" / "latest") == "mytag\n");
}

TEST_CASE("wrapped outputs carry the version tag and config echo") {
    const io::json doc = io::wrap_output({{"command", "x"}}, {{"value", 1}});
    CHECK(doc["format_version"] == io::kFormatVersion);
    CHECK(doc["config"]["command"] == "x");
    CHECK(doc["report"]["value"] == 1);
}

}  // TEST_SUITE
