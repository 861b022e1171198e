#include "geomrazor/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace geomrazor {

using nlohmann::json;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// ---- spec parsing -----------------------------------------------------------

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw SpecValidationError(path, message);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) fail(path + "." + it.key(), "unknown key");
    }
}

const json* find(const json& j, const char* key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double get_double(const json& j, const std::string& path, const char* key,
                  std::optional<double> fallback = {}) {
    const json* v = find(j, key);
    if (!v) {
        if (fallback) return *fallback;
        fail(path + "." + key, "missing required field");
    }
    if (!v->is_number()) fail(path + "." + key, "expected a number");
    return v->get<double>();
}

std::uint64_t get_uint(const json& j, const std::string& path, const char* key,
                       std::optional<std::uint64_t> fallback = {}) {
    const json* v = find(j, key);
    if (!v) {
        if (fallback) return *fallback;
        fail(path + "." + key, "missing required field");
    }
    if (!v->is_number_integer() || (v->is_number_integer() && v->get<std::int64_t>() < 0 &&
                                    !v->is_number_unsigned()))
        fail(path + "." + key, "expected a non-negative integer");
    return v->get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& path, const char* key,
                       std::optional<std::string> fallback = {}) {
    const json* v = find(j, key);
    if (!v) {
        if (fallback) return *fallback;
        fail(path + "." + key, "missing required field");
    }
    if (!v->is_string()) fail(path + "." + key, "expected a string");
    return v->get<std::string>();
}

DatasetSpec parse_dataset_spec(const json& j, const std::string& path) {
    check_keys(j, path, {"kind", "n_points", "x_range", "generator", "seed", "n", "noise"});
    const std::string kind = get_string(j, path, "kind");
    if (kind == "regression_1d") {
        check_keys(j, path, {"kind", "n_points", "x_range", "generator", "seed"});
        Regression1dSpec spec;
        spec.n_points = static_cast<std::size_t>(get_uint(j, path, "n_points"));
        if (spec.n_points < 2) fail(path + ".n_points", "must be >= 2");
        if (const json* r = find(j, "x_range")) {
            if (!r->is_array() || r->size() != 2 || !(*r)[0].is_number() || !(*r)[1].is_number())
                fail(path + ".x_range", "expected [lo, hi]");
            spec.x_lo = (*r)[0].get<double>();
            spec.x_hi = (*r)[1].get<double>();
            if (!(spec.x_lo < spec.x_hi)) fail(path + ".x_range", "lo must be < hi");
        }
        spec.generator = get_string(j, path, "generator", std::string("random_smooth"));
        if (spec.generator != "random_smooth" && spec.generator != "fixed_seeded")
            fail(path + ".generator", "expected \"random_smooth\" or \"fixed_seeded\"");
        spec.seed = get_uint(j, path, "seed", std::uint64_t{0});
        return spec;
    }
    if (kind == "two_moons" || kind == "gaussian_blobs") {
        check_keys(j, path, {"kind", "n", "noise", "seed"});
        ClassificationSpec spec;
        spec.kind = kind;
        spec.n = static_cast<std::size_t>(get_uint(j, path, "n"));
        if (spec.n < 10) fail(path + ".n", "must be >= 10");
        spec.noise = get_double(j, path, "noise", 0.1);
        if (spec.noise < 0.0) fail(path + ".noise", "must be >= 0");
        spec.seed = get_uint(j, path, "seed", std::uint64_t{0});
        return spec;
    }
    fail(path + ".kind", "expected \"regression_1d\", \"two_moons\" or \"gaussian_blobs\"");
}

ModelSpec parse_model_spec(const json& j, const std::string& path) {
    check_keys(j, path, {"hidden", "activation", "init_seed"});
    ModelSpec spec;
    const json* hidden = find(j, "hidden");
    if (!hidden) fail(path + ".hidden", "missing required field");
    if (!hidden->is_array()) fail(path + ".hidden", "expected an array of widths");
    for (std::size_t i = 0; i < hidden->size(); ++i) {
        const json& w = (*hidden)[i];
        if (!w.is_number_integer() || w.get<std::int64_t>() < 1)
            fail(path + ".hidden[" + std::to_string(i) + "]", "expected a positive integer");
        spec.hidden.push_back(w.get<std::size_t>());
    }
    const std::string act = get_string(j, path, "activation", std::string("tanh"));
    try {
        spec.activation = activation_from_name(act);
    } catch (const std::invalid_argument&) {
        fail(path + ".activation", "expected identity|relu|tanh|sigmoid");
    }
    spec.init_seed = get_uint(j, path, "init_seed", std::uint64_t{0});
    return spec;
}

TrainConfig parse_train_config(const json& j, const std::string& path) {
    check_keys(j, path, {"learning_rate", "steps", "batch_size", "seed", "track_every", "loss"});
    TrainConfig config;
    config.learning_rate = get_double(j, path, "learning_rate");
    if (config.learning_rate < 0.0) fail(path + ".learning_rate", "must be >= 0");
    config.steps = static_cast<std::size_t>(get_uint(j, path, "steps"));
    config.batch_size = static_cast<std::size_t>(get_uint(j, path, "batch_size", std::uint64_t{0}));
    config.seed = get_uint(j, path, "seed", std::uint64_t{0});
    config.track_every =
        static_cast<std::size_t>(get_uint(j, path, "track_every", std::uint64_t{100}));
    if (config.track_every == 0) fail(path + ".track_every", "must be >= 1");
    const std::string loss = get_string(j, path, "loss", std::string("half_squared_error"));
    try {
        config.loss = loss_from_name(loss);
    } catch (const std::invalid_argument&) {
        fail(path + ".loss", "expected half_squared_error|softmax_cross_entropy");
    }
    return config;
}

SweepSpec parse_sweep_spec(const json& j, const std::string& path) {
    check_keys(j, path, {"learning_rates", "seeds"});
    SweepSpec spec;
    const json* lrs = find(j, "learning_rates");
    if (!lrs || !lrs->is_array() || lrs->empty())
        fail(path + ".learning_rates", "expected a nonempty array of numbers");
    for (std::size_t i = 0; i < lrs->size(); ++i) {
        if (!(*lrs)[i].is_number() || (*lrs)[i].get<double>() <= 0.0)
            fail(path + ".learning_rates[" + std::to_string(i) + "]", "expected a positive number");
        spec.learning_rates.push_back((*lrs)[i].get<double>());
    }
    const json* seeds = find(j, "seeds");
    if (!seeds || !seeds->is_array() || seeds->empty())
        fail(path + ".seeds", "expected a nonempty array of integers");
    for (std::size_t i = 0; i < seeds->size(); ++i) {
        if (!(*seeds)[i].is_number_integer() || (*seeds)[i].get<std::int64_t>() < 0)
            fail(path + ".seeds[" + std::to_string(i) + "]", "expected a non-negative integer");
        spec.seeds.push_back((*seeds)[i].get<std::uint64_t>());
    }
    return spec;
}

}  // namespace

ExperimentSpec spec_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail("(root)", std::string("invalid JSON: ") + e.what());
    }
    check_keys(j, "(root)", {"name", "dataset", "model", "train", "sweep", "snapshot_steps"});

    ExperimentSpec spec;
    spec.name = get_string(j, "(root)", "name", std::string("experiment"));

    const json* dataset = find(j, "dataset");
    if (!dataset) fail("dataset", "missing required field");
    spec.dataset = parse_dataset_spec(*dataset, "dataset");

    const json* model = find(j, "model");
    if (!model) fail("model", "missing required field");
    spec.model = parse_model_spec(*model, "model");

    const json* train = find(j, "train");
    if (!train) fail("train", "missing required field");
    spec.train = parse_train_config(*train, "train");

    if (const json* sweep = find(j, "sweep")) spec.sweep = parse_sweep_spec(*sweep, "sweep");

    if (const json* steps = find(j, "snapshot_steps")) {
        if (!steps->is_array()) fail("snapshot_steps", "expected an array of step indices");
        for (std::size_t i = 0; i < steps->size(); ++i) {
            const json& s = (*steps)[i];
            if (!s.is_number_integer() || s.get<std::int64_t>() < 0)
                fail("snapshot_steps[" + std::to_string(i) + "]", "expected a non-negative integer");
            const std::size_t step = s.get<std::size_t>();
            if (step > spec.train.steps)
                fail("snapshot_steps[" + std::to_string(i) + "]", "exceeds train.steps");
            if (!spec.snapshot_steps.empty() && step < spec.snapshot_steps.back())
                fail("snapshot_steps[" + std::to_string(i) + "]", "must be sorted ascending");
            spec.snapshot_steps.push_back(step);
        }
    }
    return spec;
}

ExperimentSpec parse_spec(const std::string& path) {
    return spec_from_json_text(read_text_file(path));
}

std::string spec_to_json_text(const ExperimentSpec& spec) {
    json j;
    j["name"] = spec.name;
    if (const auto* reg = std::get_if<Regression1dSpec>(&spec.dataset)) {
        j["dataset"] = {{"kind", "regression_1d"},
                        {"n_points", reg->n_points},
                        {"x_range", {reg->x_lo, reg->x_hi}},
                        {"generator", reg->generator},
                        {"seed", reg->seed}};
    } else {
        const auto& cls = std::get<ClassificationSpec>(spec.dataset);
        j["dataset"] = {{"kind", cls.kind}, {"n", cls.n}, {"noise", cls.noise}, {"seed", cls.seed}};
    }
    j["model"] = {{"hidden", spec.model.hidden},
                  {"activation", activation_name(spec.model.activation)},
                  {"init_seed", spec.model.init_seed}};
    j["train"] = {{"learning_rate", spec.train.learning_rate},
                  {"steps", spec.train.steps},
                  {"batch_size", spec.train.batch_size},
                  {"seed", spec.train.seed},
                  {"track_every", spec.train.track_every},
                  {"loss", loss_name(spec.train.loss)}};
    if (spec.sweep) {
        j["sweep"] = {{"learning_rates", spec.sweep->learning_rates},
                      {"seeds", spec.sweep->seeds}};
    }
    if (!spec.snapshot_steps.empty()) j["snapshot_steps"] = spec.snapshot_steps;
    return j.dump(2);
}

// ---- datasets ------------------------------------------------------------------

std::string dataset_to_json_text(const Dataset& data) {
    json j;
    j["input_dim"] = data.input_dim;
    j["output_dim"] = data.output_dim;
    json points = json::array();
    for (const Example& e : data.points)
        points.push_back({{"x", e.x.data}, {"y", e.y.data}});
    j["points"] = std::move(points);
    return j.dump(2);
}

Dataset dataset_from_json_text(const std::string& text) {
    const json j = json::parse(text);
    if (!j.is_object() || !j.contains("points"))
        throw std::invalid_argument("dataset: expected an object with a points array");
    std::vector<Example> points;
    for (const auto& p : j.at("points")) {
        Example e;
        e.x.data = p.at("x").get<std::vector<double>>();
        e.y.data = p.at("y").get<std::vector<double>>();
        points.push_back(std::move(e));
    }
    Dataset data = make_dataset(std::move(points));
    if (j.contains("input_dim") && j.at("input_dim").get<std::size_t>() != data.input_dim)
        throw std::invalid_argument("dataset: input_dim does not match the points");
    if (j.contains("output_dim") && j.at("output_dim").get<std::size_t>() != data.output_dim)
        throw std::invalid_argument("dataset: output_dim does not match the points");
    return data;
}

void save_dataset(const Dataset& data, const std::string& path) {
    write_text_file(path, dataset_to_json_text(data) + "\n");
}

Dataset load_dataset(const std::string& path) {
    return dataset_from_json_text(read_text_file(path));
}

// ---- result files ---------------------------------------------------------------

void write_train_records_csv(const std::string& path, const std::vector<TrainRecord>& records) {
    std::ostringstream out;
    out << "step,train_loss,discrete_de,igr_penalty,modified_loss,arc_length,param_norm_sq\n";
    for (const TrainRecord& r : records) {
        out << r.step << ',' << format_double(r.train_loss) << ',' << format_double(r.discrete_de)
            << ',' << format_double(r.igr_penalty) << ',' << format_double(r.modified_loss) << ',';
        if (r.arc_length) out << format_double(*r.arc_length);
        out << ',' << format_double(r.param_norm_sq) << '\n';
    }
    write_text_file(path, out.str());
}

void write_sweep_csv(const std::string& path, const SweepResult& result) {
    std::ostringstream out;
    out << "learning_rate,seed,best_val_accuracy,step_of_best,discrete_de_at_best,slope_at_best,"
           "diverged\n";
    for (const SweepRow& r : result.rows) {
        out << format_double(r.learning_rate) << ',' << r.seed << ','
            << format_double(r.best_val_accuracy) << ',' << r.step_of_best << ','
            << format_double(r.discrete_de_at_best) << ',' << format_double(r.slope_at_best) << ','
            << (r.diverged ? 1 : 0) << '\n';
    }
    write_text_file(path, out.str());
}

void write_snapshot_csv(const std::string& path, const Snapshot& snapshot) {
    std::ostringstream out;
    out << "x,f_x\n";
    for (const auto& [x, fx] : snapshot.curve)
        out << format_double(x) << ',' << format_double(fx) << '\n';
    write_text_file(path, out.str());
}

namespace {

json diagnostics_to_json(const LayerDiagnostics& d) {
    return json{{"layer_index", d.layer_index},
                {"w_spectral", d.w_spectral},
                {"h_norm_sq", d.h_norm_sq},
                {"hprime_opnorm", d.hprime_opnorm},
                {"hprime_fronorm", d.hprime_fronorm},
                {"a_i", d.a_i},
                {"degenerate", d.degenerate},
                {"degenerate_reason", d.degenerate_reason},
                {"weight_term", d.weight_term},
                {"bias_term", d.bias_term}};
}

}  // namespace

std::string verdict_to_json_text(const TheoremVerdict& verdict) {
    json j;
    j["lhs"] = verdict.lhs;
    j["rhs"] = verdict.rhs;
    j["slack"] = verdict.slack;
    j["grad_x_norm_sq"] = verdict.grad_x_norm_sq;
    j["output_index"] = verdict.output_index;
    j["all_layers_degenerate"] = verdict.all_layers_degenerate;
    j["satisfied"] = verdict.slack >= -1e-9 * std::abs(verdict.rhs);
    json skipped = json::array();
    for (const auto& [index, reason] : verdict.skipped_layers)
        skipped.push_back({{"layer_index", index}, {"reason", reason}});
    j["skipped_layers"] = std::move(skipped);
    json layers = json::array();
    for (const LayerDiagnostics& d : verdict.per_layer) layers.push_back(diagnostics_to_json(d));
    j["per_layer"] = std::move(layers);
    return j.dump(2);
}

std::string report_to_json_text(const ComplexityReport& report) {
    json j;
    j["discrete_de"] = report.discrete_de;
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) {
            j[key] = *v;
        } else {
            j[key] = nullptr;
        }
    };
    put("continuous_de", report.continuous_de);
    put("graph_volume", report.graph_volume);
    put("polytope_volume", report.polytope_volume);
    put("taylor_residual", report.taylor_residual);
    put("arc_length", report.arc_length);
    return j.dump(2);
}

std::vector<Vector> inputs_from_json_text(const std::string& text) {
    const json j = json::parse(text);
    if (!j.is_object() || !j.contains("inputs") || !j.at("inputs").is_array())
        throw std::invalid_argument("inputs: expected an object with an inputs array");
    std::vector<Vector> inputs;
    for (const auto& row : j.at("inputs")) {
        Vector x;
        x.data = row.get<std::vector<double>>();
        inputs.push_back(std::move(x));
    }
    if (inputs.empty()) throw std::invalid_argument("inputs: array is empty");
    return inputs;
}

std::vector<Vector> load_inputs(const std::string& path) {
    return inputs_from_json_text(read_text_file(path));
}

// ---- CSV reading --------------------------------------------------------------------

std::size_t CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw std::invalid_argument("csv: no column named \"" + name + "\"");
}

CsvTable read_csv(const std::string& path) {
    const std::string text = read_text_file(path);
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string::size_type start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (header) {
            table.columns = fields;
            header = false;
            continue;
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (const std::string& f : fields) {
            if (f.empty()) {
                row.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            double v = 0.0;
            const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (res.ec != std::errc() || res.ptr != f.data() + f.size())
                throw std::invalid_argument("csv: malformed numeric field \"" + f + "\"");
            row.push_back(v);
        }
        if (row.size() != table.columns.size())
            throw std::invalid_argument("csv: row width does not match the header");
        table.rows.push_back(std::move(row));
    }
    if (table.columns.empty()) throw std::invalid_argument("csv: file has no header");
    return table;
}

}  // namespace geomrazor
