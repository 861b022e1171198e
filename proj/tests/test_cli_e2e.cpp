#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "geomrazor/io.hpp"
#include "geomrazor/network.hpp"

// End-to-end checks against the built CLI binary.

namespace fs = std::filesystem;
using namespace geomrazor;

namespace {

const std::string kBin = GEOMRAZOR_BIN;
const std::string kTmp = std::string(GEOMRAZOR_TEST_TMP) + "_cli";

int run(const std::string& args, const std::string& stderr_file = "") {
    std::string cmd = kBin + " " + args;
    if (!stderr_file.empty()) cmd += " 2>" + stderr_file;
    else cmd += " 2>/dev/null";
    cmd += " >/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string tmp_path(const std::string& name) { return (fs::path(kTmp) / name).string(); }

}  // namespace

TEST_CASE("cli: train, plot, measure, check-theorem round trip") {
    fs::create_directories(kTmp);

    const char* spec = R"({
      "name": "smoke",
      "dataset": {"kind": "regression_1d", "n_points": 8, "seed": 3},
      "model": {"hidden": [12], "activation": "tanh", "init_seed": 1},
      "train": {"learning_rate": 0.05, "steps": 120, "track_every": 30}
    })";
    write_text_file(tmp_path("spec.json"), spec);

    const std::string out = tmp_path("train_out");
    REQUIRE(run("train --spec " + tmp_path("spec.json") + " --out " + out) == 0);
    CHECK(fs::exists(out + "/records.csv"));
    CHECK(fs::exists(out + "/model.json"));

    // the checkpoint loads back
    const Mlp model = load_mlp(out + "/model.json");
    CHECK(model.input_dim() == 1);
    CHECK(model.depth() == 2);

    // plot the records
    const std::string svg = tmp_path("loss.svg");
    REQUIRE(run("plot --csv " + out + "/records.csv --x step --y train_loss,discrete_de --out " +
                svg) == 0);
    CHECK(read_text_file(svg).rfind("<svg", 0) == 0);

    // measure on a dataset file
    const Dataset data = make_dataset({{Vector{-0.5}, Vector{0.1}},
                                       {Vector{0.0}, Vector{0.2}},
                                       {Vector{0.5}, Vector{-0.1}}});
    save_dataset(data, tmp_path("data.json"));
    const std::string mout = tmp_path("measure_out");
    REQUIRE(run("measure --model " + out + "/model.json --data " + tmp_path("data.json") +
                " --grid 256 --out " + mout) == 0);
    const auto report = nlohmann::json::parse(read_text_file(mout + "/report.json"));
    CHECK(report.at("discrete_de").is_number());
    CHECK(report.at("graph_volume").is_number());

    // theorem checks on the trained model
    write_text_file(tmp_path("inputs.json"), R"({"inputs": [[0.25], [-0.75]]})");
    const std::string tout = tmp_path("theorem_out");
    REQUIRE(run("check-theorem --model " + out + "/model.json --inputs " +
                tmp_path("inputs.json") + " --out " + tout) == 0);
    const auto verdicts = nlohmann::json::parse(read_text_file(tout + "/verdicts.json"));
    REQUIRE(verdicts.is_array());
    CHECK(verdicts.size() == 2);
    for (const auto& v : verdicts) CHECK(v.at("satisfied").get<bool>());
}

TEST_CASE("cli: regress1d writes snapshots and a summary") {
    fs::create_directories(kTmp);
    const char* spec = R"({
      "dataset": {"kind": "regression_1d", "n_points": 5, "seed": 4},
      "model": {"hidden": [8], "activation": "tanh"},
      "train": {"learning_rate": 0.05, "steps": 40, "track_every": 20},
      "snapshot_steps": [0, 40]
    })";
    write_text_file(tmp_path("reg.json"), spec);
    const std::string out = tmp_path("reg_out");
    REQUIRE(run("regress1d --spec " + tmp_path("reg.json") + " --out " + out) == 0);
    CHECK(fs::exists(out + "/snapshot_0.csv"));
    CHECK(fs::exists(out + "/snapshot_40.csv"));
    const auto summary = nlohmann::json::parse(read_text_file(out + "/summary.json"));
    CHECK(summary.at("arc_chord_ratio").get<double>() > 0.0);
    CHECK(fs::exists(out + "/records.csv"));
}

TEST_CASE("cli: sweep emits the result table") {
    fs::create_directories(kTmp);
    const char* spec = R"({
      "dataset": {"kind": "two_moons", "n": 60, "noise": 0.05, "seed": 5},
      "model": {"hidden": [8], "activation": "tanh"},
      "train": {"learning_rate": 0.05, "steps": 40, "batch_size": 12,
                "track_every": 20, "loss": "softmax_cross_entropy"},
      "sweep": {"learning_rates": [0.02, 0.05], "seeds": [1]}
    })";
    write_text_file(tmp_path("sweep.json"), spec);
    const std::string out = tmp_path("sweep_out");
    REQUIRE(run("sweep --spec " + tmp_path("sweep.json") + " --out " + out) == 0);
    const CsvTable table = read_csv(out + "/sweep.csv");
    CHECK(table.columns.front() == "learning_rate");
    CHECK(table.columns.back() == "diverged");
    CHECK(table.rows.size() == 2);

    // One marker per sweep row when plotted.
    const std::string svg = tmp_path("sweep.svg");
    REQUIRE(run("plot --csv " + out + "/sweep.csv --x learning_rate --y discrete_de_at_best "
                "--out " + svg) == 0);
    const std::string content = read_text_file(svg);
    std::size_t markers = 0;
    for (auto pos = content.find("<circle"); pos != std::string::npos;
         pos = content.find("<circle", pos + 7))
        ++markers;
    CHECK(markers == table.rows.size());
}

TEST_CASE("cli: failures exit nonzero with a JSON error") {
    fs::create_directories(kTmp);
    write_text_file(tmp_path("bad.json"), R"({
      "dataset": {"kind": "regression_1d", "n_points": 8},
      "model": {"hidden": [8]},
      "train": {"learning_rate": -1.0, "steps": 10}
    })");
    const std::string err_file = tmp_path("stderr.txt");
    CHECK(run("train --spec " + tmp_path("bad.json") + " --out " + tmp_path("bad_out"),
              err_file) != 0);
    const auto err = nlohmann::json::parse(read_text_file(err_file));
    CHECK(err.at("error").at("type") == "spec_validation");
    CHECK(err.at("error").at("message").get<std::string>().find("train.learning_rate") !=
          std::string::npos);

    // input files stay untouched
    CHECK(read_text_file(tmp_path("bad.json")).find("-1.0") != std::string::npos);
}
