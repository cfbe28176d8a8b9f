#include "cricrep/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "cricrep/rng.hpp"

namespace cricrep {

using ordered_json = nlohmann::ordered_json;

RepresentationIndex build_index(const InningsModel& model, std::span<const Example> train) {
    if (model.config().head != HeadKind::representation) {
        throw ConfigurationError("build_index needs a representation-head model");
    }
    RepresentationIndex index;
    index.reps = DenseMatrix(train.size(), model.config().rep_dim);
    for (std::size_t i = 0; i < train.size(); ++i) {
        const Vector rep = model.output(train[i].input);
        std::copy(rep.begin(), rep.end(), index.reps.row(i).begin());
        index.labels.push_back(train[i].label);
        index.ids.push_back(train[i].id);
    }
    return index;
}

std::vector<Neighbor> nearest_neighbors(const RepresentationIndex& index,
                                        std::span<const double> query, std::size_t k) {
    if (index.size() == 0) throw ValidationError("nearest_neighbors: empty index");
    if (k < 1 || k > index.size()) {
        throw ValidationError("nearest_neighbors: need 1 <= k <= " +
                              std::to_string(index.size()) + ", got " + std::to_string(k));
    }
    std::vector<Neighbor> all(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        all[i] = {i, euclidean_distance(index.reps.row(i), query)};
    }
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(),
                      [](const Neighbor& a, const Neighbor& b) {
                          return a.distance < b.distance ||
                                 (a.distance == b.distance && a.row < b.row);
                      });
    all.resize(k);
    return all;
}

std::size_t classify_by_similarity(const RepresentationIndex& index,
                                   std::span<const double> query, std::size_t k) {
    const auto neighbors = nearest_neighbors(index, query, k);
    std::map<std::size_t, std::pair<std::size_t, double>> votes;  // label -> (count, dist)
    for (const auto& n : neighbors) {
        auto& v = votes[index.labels[n.row]];
        v.first += 1;
        v.second += n.distance;
    }
    auto best = votes.begin();
    for (auto it = std::next(votes.begin()); it != votes.end(); ++it) {
        const auto& [count, dist] = it->second;
        if (count > best->second.first ||
            (count == best->second.first && dist < best->second.second)) {
            best = it;
        }
    }
    return best->first;
}

std::size_t classify_by_logits(std::span<const double> logits) {
    if (logits.empty()) throw ValidationError("classify_by_logits: empty logits");
    return static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) -
                                    logits.begin());
}

std::size_t ConfusionMatrix::total() const {
    std::size_t n = 0;
    for (const auto& row : counts)
        for (auto c : row) n += c;
    return n;
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < kClasses; ++i) n += counts[i][i];
    return n;
}

double ConfusionMatrix::accuracy() const {
    const auto n = total();
    return n == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(n);
}

ConfusionMatrix confusion_and_accuracy(std::span<const std::size_t> preds,
                                       std::span<const std::size_t> truths) {
    if (preds.size() != truths.size()) {
        throw ValidationError("confusion_and_accuracy: " + std::to_string(preds.size()) +
                              " predictions vs " + std::to_string(truths.size()) + " truths");
    }
    if (preds.empty()) throw ValidationError("confusion_and_accuracy: no samples");
    ConfusionMatrix m;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] >= ConfusionMatrix::kClasses || truths[i] >= ConfusionMatrix::kClasses) {
            throw ValidationError("confusion_and_accuracy: class id out of range");
        }
        m.counts[truths[i]][preds[i]] += 1;
    }
    return m;
}

std::pair<double, double> bootstrap_ci(const std::vector<bool>& correct, double level,
                                       std::size_t resamples, std::uint64_t seed) {
    if (correct.empty()) throw ValidationError("bootstrap_ci: no flags");
    if (resamples < 100) throw ValidationError("bootstrap_ci: need at least 100 resamples");
    if (!(level > 0.0 && level < 1.0)) throw ValidationError("bootstrap_ci: level in (0, 1)");
    Rng rng = Rng::derive(seed, "bootstrap");
    const std::size_t n = correct.size();
    std::vector<double> means(resamples);
    for (auto& m : means) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) hits += correct[rng.index(n)] ? 1 : 0;
        m = static_cast<double>(hits) / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());
    const double alpha = 1.0 - level;
    const double b = static_cast<double>(resamples);
    const auto lo = static_cast<std::size_t>(std::floor(alpha / 2.0 * b));
    const auto hi = static_cast<std::size_t>(std::ceil((1.0 - alpha / 2.0) * b)) - 1;
    return {means[lo], means[std::min(hi, resamples - 1)]};
}

std::string Setting::name() const {
    return to_string(objective) + (pitch ? "/pitch-on" : "/pitch-off");
}

std::vector<Setting> all_settings() {
    return {{Objective::cross_entropy, false},
            {Objective::cross_entropy, true},
            {Objective::contrastive, false},
            {Objective::contrastive, true}};
}

std::vector<Example> make_examples(const Dataset& dataset, const LabelScheme& scheme,
                                   std::span<const std::size_t> indices,
                                   const FeatureContext* features,
                                   const PitchEmbeddingSet* pitch) {
    std::vector<Example> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) {
        const auto& r = dataset.records.at(i);
        out.push_back({r.innings_id, make_input(r, dataset.players, features, pitch),
                       scheme.assign(r.run_rate)});
    }
    return out;
}

std::vector<std::size_t> predict_all(const InningsModel& model, std::span<const Example> test,
                                     const RepresentationIndex* index, std::size_t k) {
    std::vector<std::size_t> preds;
    preds.reserve(test.size());
    const bool by_similarity = model.config().head == HeadKind::representation;
    if (by_similarity && !index) {
        throw ConfigurationError("representation-head models need an index to classify");
    }
    for (const auto& e : test) {
        const Vector out = model.output(e.input);
        preds.push_back(by_similarity ? classify_by_similarity(*index, out, k)
                                      : classify_by_logits(out));
    }
    return preds;
}

EvalReport evaluate(const InningsModel& model, std::span<const Example> train,
                    std::span<const Example> test, const Setting& setting, std::uint64_t seed,
                    const ExperimentOptions& options) {
    std::optional<RepresentationIndex> index;
    if (model.config().head == HeadKind::representation) index = build_index(model, train);
    const auto preds = predict_all(model, test, index ? &*index : nullptr, options.k);

    std::vector<std::size_t> truths;
    for (const auto& e : test) truths.push_back(e.label);
    EvalReport report;
    report.setting = setting;
    report.seed = seed;
    report.matrix = confusion_and_accuracy(preds, truths);
    report.accuracy = report.matrix.accuracy();
    for (std::size_t i = 0; i < preds.size(); ++i) report.correct.push_back(preds[i] == truths[i]);
    auto ci = bootstrap_ci(report.correct, 0.95, options.resamples,
                           Rng::derive(seed, "eval-ci").next_u64());
    // percentile intervals can exclude the point estimate for tiny samples
    ci.first = std::min(ci.first, report.accuracy);
    ci.second = std::max(ci.second, report.accuracy);
    report.ci95 = ci;
    return report;
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream) {
    return Rng::derive(root, stream).next_u64();
}

HeadKind head_for(Objective objective) {
    return objective == Objective::cross_entropy ? HeadKind::classifier
                                                 : HeadKind::representation;
}

FittedModel fit_player_model(const Dataset& dataset, const LabelScheme& scheme,
                             const Split& split, Objective objective, const TrainConfig& base,
                             std::uint64_t root_seed) {
    const auto train = make_examples(dataset, scheme, split.train, nullptr, nullptr);
    FittedModel out;
    out.model = init_model(player_model_config(dataset.players.size(), head_for(objective)),
                           derive_seed(root_seed, "embed-init"));
    out.model.index = {dataset.players.names(), FeatureContext::of(dataset)};
    TrainConfig cfg = base;
    cfg.objective = objective;
    cfg.seed = derive_seed(root_seed, "embed-train");
    out.report = objective == Objective::cross_entropy ? train_cross_entropy(out.model, train, cfg)
                                                       : train_contrastive(out.model, train, cfg);
    return out;
}

FittedModel fit_predictor(const Dataset& dataset, const LabelScheme& scheme, const Split& split,
                          const InningsModel& player, const PitchEmbeddingSet* pitch,
                          const TrainConfig& base, std::uint64_t root_seed) {
    if (player.config().kind != ModelKind::player) {
        throw ConfigurationError("fit_predictor: embedding source must be a player model");
    }
    const Objective objective = player.config().head == HeadKind::classifier
                                    ? Objective::cross_entropy
                                    : Objective::contrastive;
    const FeatureContext context = FeatureContext::of(dataset);
    const auto train = make_examples(dataset, scheme, split.train, &context, pitch);
    FittedModel out;
    out.model = init_model(predictor_config(dataset.players.size(), context.dim(),
                                            pitch ? pitch->dim : 0, head_for(objective)),
                           derive_seed(root_seed, "predict-init"));
    out.model.index = {dataset.players.names(), context};
    transfer_embeddings(player, out.model);
    TrainConfig cfg = base;
    cfg.objective = objective;
    cfg.seed = derive_seed(root_seed, "predict-train");
    out.report = train_predictor(out.model, player, train, cfg);
    return out;
}

ExperimentResult run_experiment(const Dataset& dataset, const LabelScheme& scheme,
                                const PitchEmbeddingSet* pitch,
                                std::span<const Setting> settings,
                                std::span<const std::uint64_t> seeds,
                                const ExperimentOptions& options) {
    for (const auto& s : settings) {
        if (s.pitch && !pitch) {
            throw ConfigurationError("setting " + s.name() + " needs pitch embeddings");
        }
    }
    const FeatureContext context = FeatureContext::of(dataset);

    ExperimentResult result;
    for (std::uint64_t seed : seeds) {
        const Split split = sample_test_split(dataset, scheme, options.per_class, seed);
        std::map<Objective, InningsModel> player_models;

        for (const auto& setting : settings) {
            auto it = player_models.find(setting.objective);
            if (it == player_models.end()) {
                it = player_models
                         .emplace(setting.objective,
                                  fit_player_model(dataset, scheme, split, setting.objective,
                                                   options.embed_train, seed)
                                      .model)
                         .first;
            }
            const PitchEmbeddingSet* pitch_set = setting.pitch ? pitch : nullptr;
            const auto train = make_examples(dataset, scheme, split.train, &context, pitch_set);
            const auto test = make_examples(dataset, scheme, split.test, &context, pitch_set);
            const InningsModel predictor =
                fit_predictor(dataset, scheme, split, it->second, pitch_set,
                              options.predict_train, seed)
                    .model;
            result.reports.push_back(evaluate(predictor, train, test, setting, seed, options));
        }
    }

    for (const auto& setting : settings) {
        AggregateReport agg;
        agg.setting = setting;
        std::vector<bool> pooled;
        for (const auto& r : result.reports) {
            if (!(r.setting == setting)) continue;
            agg.seeds.push_back(r.seed);
            agg.accuracies.push_back(r.accuracy);
            pooled.insert(pooled.end(), r.correct.begin(), r.correct.end());
        }
        if (agg.accuracies.empty()) continue;
        double sum = 0.0;
        for (double a : agg.accuracies) sum += a;
        agg.mean_accuracy = sum / static_cast<double>(agg.accuracies.size());
        agg.ci95 = bootstrap_ci(pooled, 0.95, options.resamples,
                                derive_seed(agg.seeds.front(), "aggregate-ci"));
        result.aggregates.push_back(std::move(agg));
    }
    return result;
}

ordered_json to_json(const EvalReport& report) {
    ordered_json j;
    j["setting"] = report.setting.name();
    j["seed"] = report.seed;
    ordered_json rows = ordered_json::array();
    for (const auto& row : report.matrix.counts) rows.push_back(row);
    j["confusion"] = rows;
    j["accuracy"] = report.accuracy;
    j["ci95"] = {report.ci95.first, report.ci95.second};
    return j;
}

ordered_json to_json(const AggregateReport& report) {
    ordered_json j;
    j["setting"] = report.setting.name();
    j["seeds"] = report.seeds;
    j["accuracies"] = report.accuracies;
    j["mean_accuracy"] = report.mean_accuracy;
    j["ci95"] = {report.ci95.first, report.ci95.second};
    return j;
}

std::string render_confusion(const ConfusionMatrix& matrix) {
    std::ostringstream out;
    out << "true\\pred";
    for (std::size_t p = 0; p < ConfusionMatrix::kClasses; ++p) out << "\t" << p;
    out << "\n";
    for (std::size_t t = 0; t < ConfusionMatrix::kClasses; ++t) {
        out << t;
        for (std::size_t p = 0; p < ConfusionMatrix::kClasses; ++p) out << "\t" << matrix.counts[t][p];
        out << "\n";
    }
    out << "accuracy " << matrix.accuracy() << " (" << matrix.trace() << "/" << matrix.total()
        << ")\n";
    return out.str();
}

}  // namespace cricrep
