#include <doctest.h>

#include "geomrazor/io.hpp"
#include "support/oracles.hpp"

using namespace geomrazor;

namespace {

const char* kMinimalSpec = R"({
  "dataset": {"kind": "regression_1d", "n_points": 10},
  "model": {"hidden": [8, 8]},
  "train": {"learning_rate": 0.01, "steps": 100}
})";

}  // namespace

TEST_CASE("spec parsing: minimal spec gets documented defaults") {
    const ExperimentSpec spec = spec_from_json_text(kMinimalSpec);
    CHECK(spec.name == "experiment");
    const auto& data = std::get<Regression1dSpec>(spec.dataset);
    CHECK(data.n_points == 10);
    CHECK(data.x_lo == -1.0);
    CHECK(data.x_hi == 1.0);
    CHECK(data.generator == "random_smooth");
    CHECK(data.seed == 0);
    CHECK(spec.model.activation == Activation::Tanh);
    CHECK(spec.model.init_seed == 0);
    CHECK(spec.train.batch_size == 0);  // full batch
    CHECK(spec.train.track_every == 100);
    CHECK(spec.train.loss == LossKind::HalfSquaredError);
    CHECK(!spec.sweep.has_value());
    CHECK(spec.snapshot_steps.empty());
}

TEST_CASE("spec parsing: errors name the JSON path") {
    const char* negative_lr = R"({
      "dataset": {"kind": "regression_1d", "n_points": 10},
      "model": {"hidden": [8]},
      "train": {"learning_rate": -0.5, "steps": 100}
    })";
    CHECK_THROWS_WITH_AS(spec_from_json_text(negative_lr),
                         doctest::Contains("train.learning_rate"), SpecValidationError);

    const char* unknown_key = R"({
      "dataset": {"kind": "regression_1d", "n_points": 10},
      "model": {"hidden": [8], "actvation": "tanh"},
      "train": {"learning_rate": 0.5, "steps": 100}
    })";
    CHECK_THROWS_WITH_AS(spec_from_json_text(unknown_key), doctest::Contains("model.actvation"),
                         SpecValidationError);

    const char* missing = R"({
      "dataset": {"kind": "two_moons"},
      "model": {"hidden": [8]},
      "train": {"learning_rate": 0.5, "steps": 100}
    })";
    CHECK_THROWS_WITH_AS(spec_from_json_text(missing), doctest::Contains("dataset.n"),
                         SpecValidationError);

    const char* bad_snapshot = R"({
      "dataset": {"kind": "regression_1d", "n_points": 10},
      "model": {"hidden": [8]},
      "train": {"learning_rate": 0.5, "steps": 100},
      "snapshot_steps": [0, 500]
    })";
    CHECK_THROWS_WITH_AS(spec_from_json_text(bad_snapshot),
                         doctest::Contains("snapshot_steps[1]"), SpecValidationError);

    CHECK_THROWS_AS(spec_from_json_text("{nonsense"), SpecValidationError);
}

TEST_CASE("spec serialization: canonical round trip") {
    const char* full = R"({
      "name": "sweep-demo",
      "dataset": {"kind": "two_moons", "n": 200, "noise": 0.15, "seed": 9},
      "model": {"hidden": [64, 64], "activation": "tanh", "init_seed": 4},
      "train": {"learning_rate": 0.02, "steps": 500, "batch_size": 32,
                "seed": 7, "track_every": 50, "loss": "softmax_cross_entropy"},
      "sweep": {"learning_rates": [0.01, 0.02], "seeds": [1, 2, 3]},
      "snapshot_steps": []
    })";
    const ExperimentSpec spec = spec_from_json_text(full);
    const std::string text = spec_to_json_text(spec);
    const ExperimentSpec again = spec_from_json_text(text);
    CHECK(spec_to_json_text(again) == text);  // serialize∘parse is idempotent

    CHECK(again.name == "sweep-demo");
    const auto& cls = std::get<ClassificationSpec>(again.dataset);
    CHECK(cls.kind == "two_moons");
    CHECK(cls.n == 200);
    CHECK(cls.noise == 0.15);
    CHECK(again.train.loss == LossKind::SoftmaxCrossEntropy);
    REQUIRE(again.sweep.has_value());
    CHECK(again.sweep->learning_rates == std::vector<double>{0.01, 0.02});
    CHECK(again.sweep->seeds == std::vector<std::uint64_t>{1, 2, 3});
}

TEST_CASE("dataset JSON round trip") {
    std::vector<Example> pts;
    for (int i = 0; i < 5; ++i)
        pts.push_back({oracles::random_vector(3, 100 + i), oracles::random_vector(2, 200 + i)});
    const Dataset data = make_dataset(std::move(pts));
    const Dataset again = dataset_from_json_text(dataset_to_json_text(data));
    REQUIRE(again.points.size() == data.points.size());
    CHECK(again.input_dim == 3);
    CHECK(again.output_dim == 2);
    for (std::size_t i = 0; i < data.points.size(); ++i) {
        CHECK(again.points[i].x == data.points[i].x);  // bit-exact
        CHECK(again.points[i].y == data.points[i].y);
    }
}

TEST_CASE("format_double survives a parse round trip") {
    Rng rng(42);
    for (int i = 0; i < 200; ++i) {
        const double v = (rng.uniform() - 0.5) * std::pow(10.0, double(i % 17) - 8.0);
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("train records CSV: header, fields, empty arc column") {
    std::vector<TrainRecord> records(2);
    records[0].step = 0;
    records[0].train_loss = 0.5;
    records[0].arc_length = 2.25;
    records[1].step = 10;
    records[1].train_loss = 0.25;
    records[1].arc_length.reset();

    const std::string path = std::string(GEOMRAZOR_TEST_TMP) + "_records.csv";
    write_train_records_csv(path, records);
    const CsvTable table = read_csv(path);
    CHECK(table.columns ==
          std::vector<std::string>{"step", "train_loss", "discrete_de", "igr_penalty",
                                   "modified_loss", "arc_length", "param_norm_sq"});
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0][table.column_index("arc_length")] == 2.25);
    CHECK(std::isnan(table.rows[1][table.column_index("arc_length")]));
    CHECK(table.rows[1][table.column_index("train_loss")] == 0.25);
}

TEST_CASE("verdict and report JSON include the diagnostic fields") {
    TheoremVerdict v;
    v.lhs = 1.0;
    v.rhs = 2.0;
    v.slack = 1.0;
    v.output_index = 0;
    LayerDiagnostics d;
    d.layer_index = 0;
    d.w_spectral = 1.5;
    d.a_i = 1.5;
    v.per_layer.push_back(d);
    const std::string text = verdict_to_json_text(v);
    CHECK(text.find("\"w_spectral\"") != std::string::npos);
    CHECK(text.find("\"hprime_opnorm\"") != std::string::npos);
    CHECK(text.find("\"satisfied\": true") != std::string::npos);

    ComplexityReport r;
    r.discrete_de = 0.125;
    r.graph_volume = 4.5;
    const std::string report = report_to_json_text(r);
    CHECK(report.find("\"discrete_de\": 0.125") != std::string::npos);
    CHECK(report.find("\"graph_volume\": 4.5") != std::string::npos);
    CHECK(report.find("\"arc_length\": null") != std::string::npos);
}

TEST_CASE("inputs file parsing") {
    const std::vector<Vector> inputs = inputs_from_json_text(R"({"inputs": [[1.0, 2.0], [3.0]]})");
    REQUIRE(inputs.size() == 2);
    CHECK(inputs[0].dim() == 2);
    CHECK(inputs[1][0] == 3.0);
    CHECK_THROWS_AS(inputs_from_json_text(R"({"inputs": []})"), std::invalid_argument);
    CHECK_THROWS_AS(inputs_from_json_text(R"([1, 2])"), std::invalid_argument);
}

TEST_CASE("read_csv: malformed input is rejected") {
    const std::string path = std::string(GEOMRAZOR_TEST_TMP) + "_bad.csv";
    write_text_file(path, "a,b\n1,2\n3\n");
    CHECK_THROWS_AS(read_csv(path), std::invalid_argument);
    write_text_file(path, "a,b\n1,zebra\n");
    CHECK_THROWS_AS(read_csv(path), std::invalid_argument);
    write_text_file(path, "");
    CHECK_THROWS_AS(read_csv(path), std::invalid_argument);
}
