#include "cricrep/commands.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "cricrep/data.hpp"
#include "cricrep/evaluation.hpp"
#include "cricrep/models.hpp"

namespace cricrep {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// config and report files

namespace {

template <typename T>
T field(const json& j, const char* key, const T& fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw ConfigurationError(std::string("config field '") + key + "': " + e.what());
    }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::none_of(known.begin(), known.end(),
                         [&](const char* k) { return it.key() == k; })) {
            throw ConfigurationError(std::string(where) + ": unknown key '" + it.key() + "'");
        }
    }
}

bool parse_switch(const std::string& text) {
    if (text == "on") return true;
    if (text == "off") return false;
    throw ConfigurationError("pitch must be 'on' or 'off', got '" + text + "'");
}

void write_json(const fs::path& path, const ordered_json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
    if (!j.is_object()) throw ConfigurationError("run config must be a JSON object");
    reject_unknown(j,
                   {"dataset", "labels", "pitch_embeddings", "embed_model", "predict_model",
                    "out", "seed", "objective", "pitch", "k", "per_class", "seeds", "train"},
                   "run config");
    RunConfig c;
    c.dataset = field<std::string>(j, "dataset", "");
    c.labels = field<std::string>(j, "labels", "");
    c.pitch_embeddings = field<std::string>(j, "pitch_embeddings", "");
    c.embed_model = field<std::string>(j, "embed_model", "");
    c.predict_model = field<std::string>(j, "predict_model", "");
    c.out = field<std::string>(j, "out", "");
    c.seed = field<std::uint64_t>(j, "seed", 0);
    c.objective = parse_objective(field<std::string>(j, "objective", "contrastive"));
    c.pitch = parse_switch(field<std::string>(j, "pitch", "off"));
    c.k = field<std::size_t>(j, "k", 1);
    c.per_class = field<std::size_t>(j, "per_class", 10);
    c.seeds = field<std::size_t>(j, "seeds", 5);
    if (auto t = j.find("train"); t != j.end()) {
        if (!t->is_object()) throw ConfigurationError("run config: 'train' must be an object");
        reject_unknown(*t, {"batch_size", "epochs", "lr", "margin", "loss_mode", "pair_balance"},
                       "train block");
        c.train.batch_size = field<std::size_t>(*t, "batch_size", c.train.batch_size);
        c.train.epochs = field<std::size_t>(*t, "epochs", c.train.epochs);
        c.train.lr = field<double>(*t, "lr", c.train.lr);
        c.train.contrastive.margin = field<double>(*t, "margin", c.train.contrastive.margin);
        c.train.contrastive.mode =
            parse_loss_mode(field<std::string>(*t, "loss_mode", to_string(LossMode::hinge)));
        c.train.contrastive.pair_balance =
            field<double>(*t, "pair_balance", c.train.contrastive.pair_balance);
    }
    return c;
}

ordered_json RunConfig::to_json() const {
    ordered_json j;
    j["dataset"] = dataset;
    j["labels"] = labels;
    j["pitch_embeddings"] = pitch_embeddings;
    j["embed_model"] = embed_model;
    j["predict_model"] = predict_model;
    j["out"] = out;
    j["seed"] = seed;
    j["objective"] = to_string(objective);
    j["pitch"] = pitch ? "on" : "off";
    j["k"] = k;
    j["per_class"] = per_class;
    j["seeds"] = seeds;
    ordered_json t;
    t["batch_size"] = train.batch_size;
    t["epochs"] = train.epochs;
    t["lr"] = train.lr;
    t["margin"] = train.contrastive.margin;
    t["loss_mode"] = to_string(train.contrastive.mode);
    t["pair_balance"] = train.contrastive.pair_balance;
    j["train"] = t;
    return j;
}

ordered_json to_json(const TrainConfig& config) {
    ordered_json j;
    j["batch_size"] = config.batch_size;
    j["epochs"] = config.epochs;
    j["lr"] = config.lr;
    j["seed"] = config.seed;
    j["objective"] = to_string(config.objective);
    j["margin"] = config.contrastive.margin;
    j["loss_mode"] = to_string(config.contrastive.mode);
    j["pair_balance"] = config.contrastive.pair_balance;
    return j;
}

ordered_json to_json(const TrainReport& report) {
    ordered_json j;
    j["config"] = to_json(report.config);
    j["loss_curve"] = report.loss_curve;
    j["seconds"] = report.seconds;
    j["model_path"] = report.model_path;
    return j;
}

void save_labels(const fs::path& path, const LabelScheme& scheme, const ElbowCurve& curve,
                 std::size_t elbow_k, std::uint64_t seed) {
    ordered_json j;
    j["centroids"] = scheme.centroids();
    j["provenance"] = {{"split_class", scheme.split_class()}, {"initial_k", 3}, {"seed", seed}};
    ordered_json points = ordered_json::array();
    for (const auto& [k, d] : curve.points) points.push_back({k, d});
    j["elbow"] = {{"k", elbow_k}, {"curve", points}};
    write_json(path, j);
}

LabelScheme load_labels(const fs::path& path) {
    const json j = read_json(path);
    try {
        return LabelScheme(j.at("centroids").get<std::vector<double>>(),
                           j.at("provenance").at("split_class").get<std::size_t>());
    } catch (const json::exception& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// commands

namespace {

void require_file(const std::string& path, const char* what) {
    if (path.empty()) throw ConfigurationError(std::string("no ") + what + " given");
    if (!fs::exists(path)) throw ConfigurationError(std::string(what) + " not found: " + path);
}

fs::path prepare_out(const RunConfig& c) {
    if (c.out.empty()) throw ConfigurationError("no output directory given (--out)");
    fs::create_directories(c.out);
    write_json(fs::path(c.out) / "config.json", c.to_json());
    return c.out;
}

std::string setting_slug(const Setting& s) {
    std::string name = s.name();
    std::replace(name.begin(), name.end(), '/', '_');
    return name;
}

// Inputs shared by every command that trains or evaluates on a split.
struct SplitInputs {
    Dataset dataset;
    LabelScheme scheme;
    Split split;
};

SplitInputs load_split(const RunConfig& c) {
    SplitInputs in{load_dataset(c.dataset), load_labels(c.labels), {}};
    in.split = sample_test_split(in.dataset, in.scheme, c.per_class, c.seed);
    return in;
}

std::optional<PitchEmbeddingSet> load_pitch_if(bool wanted, const RunConfig& c) {
    if (!wanted) return std::nullopt;
    require_file(c.pitch_embeddings, "pitch embedding file (needed for --pitch on)");
    return load_pitch_embeddings(c.pitch_embeddings);
}

void check_pitch_flag(const RunConfig& c, const InningsModel& model) {
    if (c.pitch != model.config().has_pitch()) {
        throw ConfigurationError(std::string("--pitch ") + (c.pitch ? "on" : "off") +
                                 " but the model was built " +
                                 (model.config().has_pitch() ? "with" : "without") +
                                 " a pitch branch");
    }
}

int cmd_synth(const SyntheticSpec& spec, const std::string& out_dir, std::ostream& out) {
    spec.validate();
    if (out_dir.empty()) throw ConfigurationError("no output directory given (--out)");
    const SyntheticData data = generate_synthetic(spec);
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    save_dataset(dir / "dataset.jsonl", data.dataset);
    save_truth(dir / "dataset.truth.json", data.truth);
    save_pitch_embeddings(dir / "pitch.vec", data.pitch);
    save_pitch_texts(dir / "pitch_texts.jsonl", data.pitch_texts);
    out << "wrote " << data.dataset.records.size() << " innings to "
        << (dir / "dataset.jsonl").string() << "\n";
    return exit_code::ok;
}

int cmd_labels(const RunConfig& c, std::ostream& out, std::ostream& err) {
    require_file(c.dataset, "dataset");
    const Dataset dataset = load_dataset(c.dataset);
    const fs::path dir = prepare_out(c);
    const auto rates = dataset.run_rates();
    const ElbowCurve curve = elbow_curve(rates, 1, 8, c.seed);
    const std::size_t elbow_k = select_elbow(curve);
    if (elbow_k != 3) {
        err << "note: elbow suggests k=" << elbow_k
            << "; classes are still built from 3 clusters split once\n";
    }
    const ClusterModel model = kmeans_1d(rates, 3, c.seed);
    const LabelScheme scheme = hierarchical_refine(model, rates, c.seed);
    save_labels(dir / "labels.json", scheme, curve, elbow_k, c.seed);
    out << "elbow k=" << elbow_k << ", centroids";
    for (double v : scheme.centroids()) out << " " << v;
    out << "\n";
    return exit_code::ok;
}

std::string final_loss(const TrainReport& report) {
    if (report.loss_curve.empty()) return " (no epochs run)";
    std::ostringstream s;
    s << ", final loss " << report.loss_curve.back();
    return s.str();
}

int cmd_train_embed(const RunConfig& c, std::ostream& out) {
    require_file(c.dataset, "dataset");
    require_file(c.labels, "labels file");
    TrainConfig cfg = c.train;
    cfg.objective = c.objective;
    cfg.validate();
    const fs::path dir = prepare_out(c);
    const SplitInputs in = load_split(c);
    FittedModel fitted = fit_player_model(in.dataset, in.scheme, in.split, c.objective, cfg, c.seed);
    fitted.report.model_path = (dir / "player_model.json").string();
    save_model(fitted.model, fitted.report.model_path);
    write_json(dir / "train_report.json", to_json(fitted.report));
    out << "player model (" << to_string(c.objective) << ") -> " << fitted.report.model_path
        << final_loss(fitted.report) << "\n";
    return exit_code::ok;
}

int cmd_train_predict(const RunConfig& c, std::ostream& out) {
    require_file(c.dataset, "dataset");
    require_file(c.labels, "labels file");
    require_file(c.embed_model, "embedding model");
    TrainConfig cfg = c.train;
    cfg.objective = c.objective;
    cfg.validate();
    const InningsModel player = load_model(c.embed_model);
    if (player.config().kind != ModelKind::player) {
        throw ConfigurationError(c.embed_model + " is not a player embedding model");
    }
    if (player.config().head != head_for(c.objective)) {
        throw ConfigurationError("--objective " + to_string(c.objective) +
                                 " does not match the embedding model's " +
                                 to_string(player.config().head) + " head");
    }
    const auto pitch = load_pitch_if(c.pitch, c);
    const fs::path dir = prepare_out(c);
    const SplitInputs in = load_split(c);
    if (player.index.players != in.dataset.players.names()) {
        throw ConfigurationError("embedding model was trained on a different player index");
    }
    FittedModel fitted = fit_predictor(in.dataset, in.scheme, in.split, player,
                                       pitch ? &*pitch : nullptr, cfg, c.seed);
    fitted.report.model_path = (dir / "predictor.json").string();
    save_model(fitted.model, fitted.report.model_path);
    write_json(dir / "train_report.json", to_json(fitted.report));
    out << "predictor (" << to_string(c.objective) << ", pitch " << (c.pitch ? "on" : "off")
        << ") -> " << fitted.report.model_path << final_loss(fitted.report) << "\n";
    return exit_code::ok;
}

void check_mode(const std::string& mode, const InningsModel& model) {
    const HeadKind head = model.config().head;
    if (mode == "similarity" && head != HeadKind::representation) {
        throw ConfigurationError("--mode similarity needs a representation-head model; " +
                                 std::string("this one has a classifier head"));
    }
    if (mode == "logits" && head != HeadKind::classifier) {
        throw ConfigurationError("--mode logits needs a classifier-head model; " +
                                 std::string("this one has a representation head"));
    }
}

int cmd_eval(const RunConfig& c, const std::string& mode, std::ostream& out) {
    require_file(c.dataset, "dataset");
    require_file(c.labels, "labels file");
    require_file(c.predict_model, "prediction model");
    const InningsModel model = load_model(c.predict_model);
    if (model.config().kind != ModelKind::predictor) {
        throw ConfigurationError(c.predict_model + " is not a prediction model");
    }
    check_mode(mode, model);
    check_pitch_flag(c, model);
    if (c.k < 1) throw ConfigurationError("--k must be >= 1");
    const auto pitch = load_pitch_if(c.pitch, c);
    const fs::path dir = prepare_out(c);
    const SplitInputs in = load_split(c);
    const FeatureContext context = FeatureContext::of(in.dataset);
    const PitchEmbeddingSet* p = pitch ? &*pitch : nullptr;
    const auto train = make_examples(in.dataset, in.scheme, in.split.train, &context, p);
    const auto test = make_examples(in.dataset, in.scheme, in.split.test, &context, p);

    ExperimentOptions opts;
    opts.k = c.k;
    opts.per_class = c.per_class;
    const Setting setting{model.config().head == HeadKind::classifier ? Objective::cross_entropy
                                                                      : Objective::contrastive,
                          model.config().has_pitch()};
    const EvalReport report = evaluate(model, train, test, setting, c.seed, opts);
    ordered_json j = to_json(report);
    j["k"] = c.k;
    j["config"] = c.to_json();
    write_json(dir / "eval_report.json", j);
    out << setting.name() << "\n" << render_confusion(report.matrix) << "ci95 ["
        << report.ci95.first << ", " << report.ci95.second << "]\n";
    return exit_code::ok;
}

InningsRecord read_single_innings(const std::string& source) {
    std::string text;
    if (source == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        text = buf.str();
    } else {
        require_file(source, "innings file");
        std::ifstream in(source, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    }
    // reuse the dataset reader so one innings is validated exactly like a file row
    std::string line;
    try {
        line = json::parse(text).dump();
    } catch (const json::exception& e) {
        throw LoadError(source + ": " + e.what());
    }
    std::istringstream row(line);
    return parse_dataset(row, source).records.front();
}

int cmd_predict(const RunConfig& c, const std::string& innings, std::ostream& out) {
    require_file(c.predict_model, "prediction model");
    const InningsModel model = load_model(c.predict_model);
    if (model.config().kind != ModelKind::predictor) {
        throw ConfigurationError(c.predict_model + " is not a prediction model");
    }
    const bool by_similarity = model.config().head == HeadKind::representation;
    if (by_similarity) {
        require_file(c.dataset, "dataset (needed for the representation index)");
        require_file(c.labels, "labels file (needed for the representation index)");
        if (c.k < 1) throw ConfigurationError("--k must be >= 1");
    }
    const auto pitch = load_pitch_if(model.config().has_pitch(), c);
    const PitchEmbeddingSet* p = pitch ? &*pitch : nullptr;
    const InningsRecord record = read_single_innings(innings);
    const IdIndex players = IdIndex::from_names(model.index.players);
    const Vector result = model.output(make_input(record, players, &model.index.features, p));

    ordered_json j;
    j["innings_id"] = record.innings_id;
    if (!by_similarity) {
        j["class"] = classify_by_logits(result);
        j["logits"] = result;
    } else {
        const SplitInputs in = load_split(c);
        if (in.dataset.players.names() != model.index.players) {
            throw ConfigurationError("dataset player index differs from the model's");
        }
        const auto train = make_examples(in.dataset, in.scheme, in.split.train,
                                         &model.index.features, p);
        const RepresentationIndex index = build_index(model, train);
        j["class"] = classify_by_similarity(index, result, c.k);
        ordered_json neighbors = ordered_json::array();
        for (const auto& n : nearest_neighbors(index, result, c.k)) {
            neighbors.push_back({{"innings_id", index.ids[n.row]},
                                 {"class", index.labels[n.row]},
                                 {"distance", n.distance}});
        }
        j["neighbors"] = neighbors;
    }
    out << j.dump(2) << "\n";
    return exit_code::ok;
}

int cmd_experiment(const RunConfig& c, std::ostream& out) {
    require_file(c.dataset, "dataset");
    require_file(c.labels, "labels file");
    if (c.seeds < 1) throw ConfigurationError("--seeds must be >= 1");
    if (c.k < 1) throw ConfigurationError("--k must be >= 1");
    c.train.validate();
    c.train.contrastive.validate();
    const auto pitch = load_pitch_if(true, c);
    const fs::path dir = prepare_out(c);
    const Dataset dataset = load_dataset(c.dataset);
    const LabelScheme scheme = load_labels(c.labels);

    ExperimentOptions opts;
    opts.k = c.k;
    opts.per_class = c.per_class;
    opts.embed_train = c.train;
    opts.predict_train = c.train;
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < c.seeds; ++i) seeds.push_back(c.seed + i);
    const auto settings = all_settings();
    const ExperimentResult result =
        run_experiment(dataset, scheme, &*pitch, settings, seeds, opts);

    ordered_json all;
    all["config"] = c.to_json();
    all["reports"] = ordered_json::array();
    for (const auto& r : result.reports) all["reports"].push_back(to_json(r));
    all["aggregates"] = ordered_json::array();
    for (const auto& a : result.aggregates) {
        all["aggregates"].push_back(to_json(a));
        write_json(dir / ("aggregate_" + setting_slug(a.setting) + ".json"), to_json(a));
        out << a.setting.name() << "\tmean " << a.mean_accuracy << "\tci95 [" << a.ci95.first
            << ", " << a.ci95.second << "]\n";
    }
    write_json(dir / "experiment.json", all);
    return exit_code::ok;
}

int cmd_vectorize(const std::string& input, const std::string& output, std::size_t dim,
                  std::ostream& out) {
    require_file(input, "pitch text file");
    if (output.empty()) throw ConfigurationError("no output file given (--out)");
    PitchEmbeddingSet set;
    set.dim = dim;
    for (const auto& t : load_pitch_texts(input)) {
        if (!set.vectors.emplace(t.pitch_text_id, hash_vectorize(t.text, dim)).second) {
            throw LoadError(input + ": duplicate pitch_text_id " + t.pitch_text_id);
        }
    }
    if (auto parent = fs::path(output).parent_path(); !parent.empty()) {
        fs::create_directories(parent);
    }
    save_pitch_embeddings(output, set);
    out << "wrote " << set.vectors.size() << " pitch vectors (dim " << dim << ") to " << output
        << "\n";
    return exit_code::ok;
}

// Flag values; each overrides the config file only when given.
struct Flags {
    std::string config;
    std::string dataset, labels, pitch_embeddings, embed_model, predict_model, out;
    std::uint64_t seed = 0;
    std::string objective, pitch, loss_mode;
    std::size_t k = 1, epochs = 0, batch_size = 64, per_class = 10, seeds = 5;
    double margin = 1.0, lr = 1e-3;
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> overrides;

    template <typename T>
    void add(CLI::App* app, const std::string& name, T& target, const std::string& help,
             std::function<void(RunConfig&)> apply) {
        overrides.emplace_back(app->add_option(name, target, help), std::move(apply));
    }

    RunConfig resolve() const {
        RunConfig c;
        if (!config.empty()) {
            require_file(config, "config file");
            c = RunConfig::from_json(read_json(config));
        }
        for (const auto& [opt, apply] : overrides) {
            if (opt->count() > 0) apply(c);
        }
        return c;
    }
};

void add_run_flags(CLI::App* app, Flags& f) {
    app->add_option("--config", f.config, "JSON run configuration");
    f.add(app, "--dataset", f.dataset, "innings JSONL", [&f](RunConfig& c) { c.dataset = f.dataset; });
    f.add(app, "--labels", f.labels, "labels JSON", [&f](RunConfig& c) { c.labels = f.labels; });
    f.add(app, "--pitch-embeddings", f.pitch_embeddings, "pitch embedding file",
          [&f](RunConfig& c) { c.pitch_embeddings = f.pitch_embeddings; });
    f.add(app, "--embed-model", f.embed_model, "player embedding model",
          [&f](RunConfig& c) { c.embed_model = f.embed_model; });
    f.add(app, "--model", f.predict_model, "prediction model",
          [&f](RunConfig& c) { c.predict_model = f.predict_model; });
    f.add(app, "--out", f.out, "output directory", [&f](RunConfig& c) { c.out = f.out; });
    f.add(app, "--seed", f.seed, "root seed", [&f](RunConfig& c) { c.seed = f.seed; });
    f.add(app, "--objective", f.objective, "ce | contrastive",
          [&f](RunConfig& c) { c.objective = parse_objective(f.objective); });
    f.add(app, "--pitch", f.pitch, "on | off",
          [&f](RunConfig& c) { c.pitch = parse_switch(f.pitch); });
    f.add(app, "--k", f.k, "neighbors for similarity classification",
          [&f](RunConfig& c) { c.k = f.k; });
    f.add(app, "--per-class", f.per_class, "test records per class",
          [&f](RunConfig& c) { c.per_class = f.per_class; });
    f.add(app, "--margin", f.margin, "contrastive margin",
          [&f](RunConfig& c) { c.train.contrastive.margin = f.margin; });
    f.add(app, "--loss-mode", f.loss_mode, "hinge | paper-literal",
          [&f](RunConfig& c) { c.train.contrastive.mode = parse_loss_mode(f.loss_mode); });
    f.add(app, "--epochs", f.epochs, "training epochs",
          [&f](RunConfig& c) { c.train.epochs = f.epochs; });
    f.add(app, "--batch-size", f.batch_size, "mini-batch size (default 64)",
          [&f](RunConfig& c) { c.train.batch_size = f.batch_size; });
    f.add(app, "--lr", f.lr, "Adam learning rate (default 1e-3)",
          [&f](RunConfig& c) { c.train.lr = f.lr; });
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Run-rate class prediction from T20 lineups with learned player embeddings",
                 "cricrep"};
    app.require_subcommand(1);

    SyntheticSpec spec;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "generate a planted synthetic dataset");
    synth->add_option("--players", spec.num_players);
    synth->add_option("--venues", spec.num_venues);
    synth->add_option("--innings", spec.num_innings);
    synth->add_option("--skill-dim", spec.skill_dim);
    synth->add_option("--noise", spec.noise_sd, "run-rate noise sd");
    synth->add_option("--venue-sd", spec.venue_sd);
    synth->add_option("--skill-scale", spec.skill_scale);
    synth->add_option("--pitch-dim", spec.pitch_dim);
    synth->add_option("--seed", spec.seed);
    synth->add_option("--out", synth_out, "output directory");

    Flags labels_f, embed_f, predict_f, eval_f, infer_f, exp_f;
    auto* labels = app.add_subcommand("labels", "cluster run rates into 4 classes");
    add_run_flags(labels, labels_f);
    auto* embed = app.add_subcommand("train-embed", "train the player embedding model");
    add_run_flags(embed, embed_f);
    auto* predict_train = app.add_subcommand("train-predict", "train a prediction model");
    add_run_flags(predict_train, predict_f);
    std::string mode = "auto";
    auto* eval = app.add_subcommand("eval", "evaluate a prediction model on the test split");
    add_run_flags(eval, eval_f);
    eval->add_option("--mode", mode, "auto | similarity | logits")
        ->check(CLI::IsMember({"auto", "similarity", "logits"}));
    std::string innings = "-";
    auto* infer = app.add_subcommand("predict", "classify one innings (JSON object)");
    add_run_flags(infer, infer_f);
    infer->add_option("--innings", innings, "innings JSON file, - for stdin");
    auto* experiment = app.add_subcommand("experiment", "all four settings over several seeds");
    add_run_flags(experiment, exp_f);
    exp_f.add(experiment, "--seeds", exp_f.seeds, "number of root seeds",
              [&exp_f](RunConfig& c) { c.seeds = exp_f.seeds; });

    std::string vec_in, vec_out;
    std::size_t vec_dim = 64;
    auto* vectorize = app.add_subcommand("vectorize-pitch-fallback",
                                         "hash-vectorize pitch texts into a pitch embedding file");
    vectorize->add_option("--in", vec_in, "pitch text JSONL")->required();
    vectorize->add_option("--out", vec_out, "pitch embedding file")->required();
    vectorize->add_option("--dim", vec_dim, "vector length (>= 8)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_code::ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_code::ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::usage;
    }

    try {
        if (*synth) return cmd_synth(spec, synth_out, out);
        if (*labels) return cmd_labels(labels_f.resolve(), out, err);
        if (*embed) return cmd_train_embed(embed_f.resolve(), out);
        if (*predict_train) return cmd_train_predict(predict_f.resolve(), out);
        if (*eval) return cmd_eval(eval_f.resolve(), mode, out);
        if (*infer) return cmd_predict(infer_f.resolve(), innings, out);
        if (*experiment) return cmd_experiment(exp_f.resolve(), out);
        if (*vectorize) return cmd_vectorize(vec_in, vec_out, vec_dim, out);
    } catch (const NumericFailure& e) {
        err << "numeric failure: " << e.what() << "\n";
        return exit_code::numeric;
    } catch (const std::logic_error& e) {
        err << "internal error: " << e.what() << "\n";
        return exit_code::failure;
    } catch (const std::runtime_error& e) {
        // every library error type is a runtime_error raised on bad input or config
        err << "error: " << e.what() << "\n";
        return exit_code::usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::failure;
    }
    return exit_code::usage;
}

}  // namespace cricrep
