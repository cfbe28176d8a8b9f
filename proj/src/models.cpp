#include "cricrep/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cricrep/rng.hpp"

namespace cricrep {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kModelFormatVersion = 1;
constexpr const char* kModelFormatName = "cricrep-model";

DenseLayer make_layer(std::size_t in, std::size_t out) {
    return {ParamTensor(DenseMatrix(out, in)), ParamTensor(DenseMatrix(out, 1))};
}

std::vector<DenseLayer> make_stack(std::size_t in, const std::vector<std::size_t>& widths) {
    std::vector<DenseLayer> stack;
    for (std::size_t w : widths) {
        stack.push_back(make_layer(in, w));
        in = w;
    }
    return stack;
}

Vector stack_forward(const std::vector<DenseLayer>& stack, Vector x, StackTrace& trace) {
    for (const auto& layer : stack) {
        Vector pre = dense_forward(x, layer.weight.value, layer.bias.value.values());
        trace.inputs.push_back(std::move(x));
        x = relu(pre);
        trace.pre.push_back(std::move(pre));
    }
    return x;
}

Vector stack_backward(std::vector<DenseLayer>& stack, const StackTrace& trace, Vector grad) {
    if (trace.pre.size() != stack.size() || trace.inputs.size() != stack.size()) {
        throw ShapeError("backward: recorded trace has " + std::to_string(trace.pre.size()) +
                         " layers, stack has " + std::to_string(stack.size()));
    }
    for (std::size_t i = stack.size(); i-- > 0;) {
        grad = relu_backward(trace.pre[i], grad);
        grad = dense_backward(trace.inputs[i], stack[i].weight.value, grad, stack[i].weight.grad,
                              stack[i].bias.grad);
    }
    return grad;
}

void check_lineup(const EmbeddingTable& table, std::span<const std::size_t> lineup,
                  const char* which) {
    if (lineup.empty()) throw LookupError(std::string("empty ") + which + " lineup");
    for (std::size_t idx : lineup) {
        if (idx >= table.size()) {
            throw LookupError(std::string(which) + " player index " + std::to_string(idx) +
                              " out of range for table of " + std::to_string(table.size()));
        }
    }
}

void scatter_pool_grad(EmbeddingTable& table, std::span<const std::size_t> lineup,
                       std::span<const double> pooled_grad) {
    const Vector per_row = mean_pool_backward(lineup.size(), pooled_grad);
    for (std::size_t idx : lineup) {
        auto g = table.rows.grad.row(idx);
        for (std::size_t c = 0; c < g.size(); ++c) g[c] += per_row[c];
    }
}

void push_layers(std::vector<DenseLayer>& stack, std::vector<ParamTensor*>& out) {
    for (auto& l : stack) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
}

void push_names(const std::string& prefix, std::size_t count, std::vector<std::string>& out) {
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(prefix + "." + std::to_string(i) + ".weight");
        out.push_back(prefix + "." + std::to_string(i) + ".bias");
    }
}

}  // namespace

std::string to_string(HeadKind head) {
    return head == HeadKind::classifier ? "classifier" : "representation";
}

std::string to_string(ModelKind kind) {
    return kind == ModelKind::player ? "player" : "predictor";
}

std::size_t ModelConfig::trunk_input() const {
    std::size_t n = 2 * branch_widths.back();
    if (feature_dim > 0) n += feature_width;
    if (pitch_dim > 0) n += pitch_width;
    return n;
}

std::size_t ModelConfig::output_dim() const {
    return head == HeadKind::classifier ? num_classes : rep_dim;
}

void ModelConfig::validate() const {
    auto positive = [](const std::vector<std::size_t>& v) {
        return !v.empty() && std::all_of(v.begin(), v.end(), [](std::size_t w) { return w > 0; });
    };
    if (num_players == 0 || embed_dim == 0 || !positive(branch_widths) ||
        !positive(trunk_widths) || num_classes < 2 || rep_dim == 0 || feature_width == 0 ||
        pitch_width == 0) {
        throw ConfigurationError("model config: all widths and counts must be positive");
    }
    if (kind == ModelKind::player && (feature_dim > 0 || pitch_dim > 0)) {
        throw ConfigurationError("model config: the player model takes lineups only");
    }
}

ModelConfig player_model_config(std::size_t num_players, HeadKind head) {
    ModelConfig c;
    c.kind = ModelKind::player;
    c.head = head;
    c.num_players = num_players;
    c.branch_widths = {64};
    c.trunk_widths = {64};
    return c;
}

ModelConfig predictor_config(std::size_t num_players, std::size_t feature_dim,
                             std::size_t pitch_dim, HeadKind head) {
    ModelConfig c;
    c.kind = ModelKind::predictor;
    c.head = head;
    c.num_players = num_players;
    c.branch_widths = {64, 64};
    c.feature_dim = feature_dim;
    c.pitch_dim = pitch_dim;
    c.trunk_widths = {96, 48};
    return c;
}

void EmbeddingTable::normalize_rows() {
    auto& m = rows.value;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        const double norm = l2_norm(row);
        if (std::abs(norm - 1.0) <= 1e-14 || norm < 1e-8) continue;
        for (double& v : row) v /= norm;
    }
}

Vector embed_team(const EmbeddingTable& table, std::span<const std::size_t> lineup) {
    check_lineup(table, lineup, table.role == Role::batting ? "batting" : "bowling");
    std::vector<std::span<const double>> rows;
    rows.reserve(lineup.size());
    for (std::size_t idx : lineup) rows.push_back(table.rows.value.row(idx));
    return mean_pool(rows);
}

InningsModel::InningsModel(ModelConfig config) : config_(std::move(config)) {
    config_.validate();
    const auto& c = config_;
    batting_ = {Role::batting, ParamTensor(DenseMatrix(c.num_players, c.embed_dim))};
    bowling_ = {Role::bowling, ParamTensor(DenseMatrix(c.num_players, c.embed_dim))};
    batting_branch_ = make_stack(c.embed_dim, c.branch_widths);
    bowling_branch_ = make_stack(c.embed_dim, c.branch_widths);
    if (c.feature_dim > 0) feature_branch_ = make_stack(c.feature_dim, {c.feature_width});
    if (c.pitch_dim > 0) pitch_branch_ = make_stack(c.pitch_dim, {c.pitch_width});
    trunk_ = make_stack(c.trunk_input(), c.trunk_widths);
    head_ = make_layer(c.trunk_widths.back(), c.output_dim());
}

ForwardTrace InningsModel::forward(const InningsInput& input) const {
    const auto& c = config_;
    ForwardTrace t;
    t.batting_idx = input.batting;
    t.bowling_idx = input.bowling;
    t.batting_pooled = embed_team(batting_, input.batting);
    t.bowling_pooled = embed_team(bowling_, input.bowling);

    std::vector<Vector> parts;
    parts.push_back(stack_forward(batting_branch_, t.batting_pooled, t.batting_branch));
    parts.push_back(stack_forward(bowling_branch_, t.bowling_pooled, t.bowling_branch));

    if (c.kind == ModelKind::predictor) {
        if (c.feature_dim > 0) {
            if (input.features.size() != c.feature_dim) {
                throw ShapeError("forward: feature vector (" + std::to_string(input.features.size()) +
                                 ") vs feature branch input (" + std::to_string(c.feature_dim) + ")");
            }
            parts.push_back(stack_forward(feature_branch_, input.features, t.feature_branch));
        }
        if (c.has_pitch()) {
            if (!input.pitch) throw ConfigurationError("forward: model needs a pitch vector");
            if (input.pitch->size() != c.pitch_dim) {
                throw ShapeError("forward: pitch vector (" + std::to_string(input.pitch->size()) +
                                 ") vs pitch branch input (" + std::to_string(c.pitch_dim) + ")");
            }
            parts.push_back(stack_forward(pitch_branch_, *input.pitch, t.pitch_branch));
        } else if (input.pitch) {
            throw ConfigurationError("forward: pitch vector given to a model without pitch branch");
        }
    }
    for (const auto& p : parts) t.part_sizes.push_back(p.size());

    t.head_input = stack_forward(trunk_, concat(parts), t.trunk);
    t.head_pre = dense_forward(t.head_input, head_.weight.value, head_.bias.value.values());
    t.output = c.head == HeadKind::representation ? l2_normalize(t.head_pre) : t.head_pre;
    return t;
}

void InningsModel::backward(const ForwardTrace& t, std::span<const double> upstream) {
    if (upstream.size() != t.output.size() || upstream.size() != config_.output_dim()) {
        throw ShapeError("backward: upstream (" + std::to_string(upstream.size()) +
                         ") vs output (" + std::to_string(t.output.size()) + ")");
    }
    Vector g(upstream.begin(), upstream.end());
    if (config_.head == HeadKind::representation) g = l2_normalize_backward(t.head_pre, g);
    g = dense_backward(t.head_input, head_.weight.value, g, head_.weight.grad, head_.bias.grad);
    g = stack_backward(trunk_, t.trunk, std::move(g));

    auto parts = concat_backward(t.part_sizes, g);
    std::size_t next = 0;
    const Vector gb = stack_backward(batting_branch_, t.batting_branch, std::move(parts[next++]));
    const Vector gw = stack_backward(bowling_branch_, t.bowling_branch, std::move(parts[next++]));
    if (!feature_branch_.empty() && !t.feature_branch.pre.empty()) {
        stack_backward(feature_branch_, t.feature_branch, std::move(parts[next++]));
    }
    if (!pitch_branch_.empty() && !t.pitch_branch.pre.empty()) {
        stack_backward(pitch_branch_, t.pitch_branch, std::move(parts[next++]));
    }
    scatter_pool_grad(batting_, t.batting_idx, gb);
    scatter_pool_grad(bowling_, t.bowling_idx, gw);
}

std::vector<ParamTensor*> InningsModel::parameters() {
    std::vector<ParamTensor*> out{&batting_.rows, &bowling_.rows};
    push_layers(batting_branch_, out);
    push_layers(bowling_branch_, out);
    push_layers(feature_branch_, out);
    push_layers(pitch_branch_, out);
    push_layers(trunk_, out);
    out.push_back(&head_.weight);
    out.push_back(&head_.bias);
    return out;
}

std::vector<const ParamTensor*> InningsModel::parameters() const {
    auto mutable_params = const_cast<InningsModel*>(this)->parameters();
    return {mutable_params.begin(), mutable_params.end()};
}

std::vector<std::string> InningsModel::parameter_names() const {
    std::vector<std::string> out{"batting_table", "bowling_table"};
    push_names("batting_branch", batting_branch_.size(), out);
    push_names("bowling_branch", bowling_branch_.size(), out);
    push_names("feature_branch", feature_branch_.size(), out);
    push_names("pitch_branch", pitch_branch_.size(), out);
    push_names("trunk", trunk_.size(), out);
    out.push_back("head.weight");
    out.push_back("head.bias");
    return out;
}

void InningsModel::zero_grad() {
    for (auto* p : parameters()) p->zero_grad();
}

InningsModel init_model(const ModelConfig& config, std::uint64_t seed) {
    InningsModel model(config);
    Rng rng = Rng::derive(seed, "init");
    for (auto* table : {&model.batting_, &model.bowling_}) {
        for (double& v : table->rows.value.values()) v = rng.normal();
        table->normalize_rows();
    }
    auto params = model.parameters();
    for (std::size_t i = 2; i < params.size(); i += 2) {
        auto& w = params[i]->value;
        const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
        for (double& v : w.values()) v = rng.uniform(-limit, limit);
        params[i + 1]->value.fill(0.0);
    }
    return model;
}

void transfer_embeddings(const InningsModel& source, InningsModel& predictor) {
    const auto& src = source.config();
    const auto& dst = predictor.config();
    if (src.num_players != dst.num_players || src.embed_dim != dst.embed_dim) {
        throw ConfigurationError("transfer_embeddings: table shapes differ (" +
                                 std::to_string(src.num_players) + "x" +
                                 std::to_string(src.embed_dim) + " vs " +
                                 std::to_string(dst.num_players) + "x" +
                                 std::to_string(dst.embed_dim) + ")");
    }
    predictor.batting_table().rows = ParamTensor(source.batting_table().rows.value, false);
    predictor.bowling_table().rows = ParamTensor(source.bowling_table().rows.value, false);
}

// ---------------------------------------------------------------------------
// serialization

namespace {

ordered_json config_json(const ModelConfig& c) {
    ordered_json j;
    j["kind"] = to_string(c.kind);
    j["head"] = to_string(c.head);
    j["num_players"] = c.num_players;
    j["embed_dim"] = c.embed_dim;
    j["branch_widths"] = c.branch_widths;
    j["feature_dim"] = c.feature_dim;
    j["feature_width"] = c.feature_width;
    j["pitch_dim"] = c.pitch_dim;
    j["pitch_width"] = c.pitch_width;
    j["trunk_widths"] = c.trunk_widths;
    j["num_classes"] = c.num_classes;
    j["rep_dim"] = c.rep_dim;
    return j;
}

ModelConfig config_from_json(const json& j) {
    ModelConfig c;
    const auto kind = j.at("kind").get<std::string>();
    const auto head = j.at("head").get<std::string>();
    if (kind != "player" && kind != "predictor") throw ModelFormatError("unknown model kind " + kind);
    if (head != "classifier" && head != "representation") {
        throw ModelFormatError("unknown head kind " + head);
    }
    c.kind = kind == "player" ? ModelKind::player : ModelKind::predictor;
    c.head = head == "classifier" ? HeadKind::classifier : HeadKind::representation;
    c.num_players = j.at("num_players").get<std::size_t>();
    c.embed_dim = j.at("embed_dim").get<std::size_t>();
    c.branch_widths = j.at("branch_widths").get<std::vector<std::size_t>>();
    c.feature_dim = j.at("feature_dim").get<std::size_t>();
    c.feature_width = j.at("feature_width").get<std::size_t>();
    c.pitch_dim = j.at("pitch_dim").get<std::size_t>();
    c.pitch_width = j.at("pitch_width").get<std::size_t>();
    c.trunk_widths = j.at("trunk_widths").get<std::vector<std::size_t>>();
    c.num_classes = j.at("num_classes").get<std::size_t>();
    c.rep_dim = j.at("rep_dim").get<std::size_t>();
    return c;
}

}  // namespace

std::string serialize_model(const InningsModel& model) {
    ordered_json j;
    j["format"] = kModelFormatName;
    j["version"] = kModelFormatVersion;
    j["config"] = config_json(model.config());
    j["index"] = {{"players", model.index.players},
                  {"venues", model.index.features.venues},
                  {"first_year", model.index.features.first_year},
                  {"last_year", model.index.features.last_year}};
    ordered_json params = ordered_json::array();
    const auto names = model.parameter_names();
    const auto tensors = model.parameters();
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        ordered_json p;
        p["name"] = names[i];
        p["rows"] = tensors[i]->value.rows();
        p["cols"] = tensors[i]->value.cols();
        p["trainable"] = tensors[i]->trainable;
        p["values"] = tensors[i]->value.values();
        params.push_back(std::move(p));
    }
    j["params"] = std::move(params);
    return j.dump();
}

InningsModel deserialize_model(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelFormatError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kModelFormatName) {
            throw ModelFormatError("not a cricrep model file");
        }
        const int version = j.at("version").get<int>();
        if (version != kModelFormatVersion) {
            throw ModelFormatError("unsupported model format version " + std::to_string(version));
        }
        ModelConfig config;
        try {
            config = config_from_json(j.at("config"));
            config.validate();
        } catch (const ConfigurationError& e) {
            throw ModelFormatError(e.what());
        }
        InningsModel model(config);
        const auto& idx = j.at("index");
        model.index.players = idx.at("players").get<std::vector<std::string>>();
        model.index.features.venues = idx.at("venues").get<std::vector<std::string>>();
        model.index.features.first_year = idx.at("first_year").get<int>();
        model.index.features.last_year = idx.at("last_year").get<int>();

        const auto names = model.parameter_names();
        auto tensors = model.parameters();
        const auto& params = j.at("params");
        if (params.size() != tensors.size()) {
            throw ModelFormatError("expected " + std::to_string(tensors.size()) +
                                   " parameter tensors, found " + std::to_string(params.size()));
        }
        for (std::size_t i = 0; i < tensors.size(); ++i) {
            const auto& p = params[i];
            auto& t = *tensors[i];
            if (p.at("name").get<std::string>() != names[i] ||
                p.at("rows").get<std::size_t>() != t.value.rows() ||
                p.at("cols").get<std::size_t>() != t.value.cols()) {
                throw ModelFormatError("parameter " + std::to_string(i) + " (" + names[i] +
                                       ") does not match the declared config " +
                                       t.value.shape_string());
            }
            auto values = p.at("values").get<std::vector<double>>();
            if (values.size() != t.value.size()) {
                throw ModelFormatError("parameter " + names[i] + " has " +
                                       std::to_string(values.size()) + " values");
            }
            t = ParamTensor(DenseMatrix(t.value.rows(), t.value.cols(), std::move(values)),
                            p.at("trainable").get<bool>());
        }
        return model;
    } catch (const json::exception& e) {
        throw ModelFormatError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const InningsModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw LoadError("cannot write " + path.string());
    out << serialize_model(model) << '\n';
}

InningsModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return deserialize_model(buffer.str());
}

InningsInput make_input(const InningsRecord& record, const IdIndex& players,
                        const FeatureContext* context, const PitchEmbeddingSet* pitch) {
    InningsInput in;
    for (const auto& p : record.batting_lineup) in.batting.push_back(players.at(p));
    for (const auto& p : record.bowling_lineup) in.bowling.push_back(players.at(p));
    if (context) in.features = match_features(record, *context);
    if (pitch) {
        if (!record.pitch_text_id) {
            throw ConfigurationError("innings " + record.innings_id + " has no pitch_text_id");
        }
        const Vector* v = pitch->find(*record.pitch_text_id);
        if (!v) {
            throw ConfigurationError("innings " + record.innings_id + ": pitch vector " +
                                     *record.pitch_text_id + " not found");
        }
        in.pitch = *v;
    }
    return in;
}

}  // namespace cricrep
