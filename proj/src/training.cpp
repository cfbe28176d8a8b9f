#include "cricrep/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace cricrep {

std::string to_string(Objective objective) {
    return objective == Objective::cross_entropy ? "ce" : "contrastive";
}

std::string to_string(LossMode mode) {
    return mode == LossMode::hinge ? "hinge" : "paper-literal";
}

Objective parse_objective(const std::string& text) {
    if (text == "ce" || text == "cross_entropy") return Objective::cross_entropy;
    if (text == "contrastive") return Objective::contrastive;
    throw ConfigurationError("unknown objective '" + text + "' (expected ce or contrastive)");
}

LossMode parse_loss_mode(const std::string& text) {
    if (text == "hinge") return LossMode::hinge;
    if (text == "paper-literal" || text == "paper_literal") return LossMode::paper_literal;
    throw ConfigurationError("unknown loss mode '" + text + "' (expected hinge or paper-literal)");
}

void ContrastiveConfig::validate() const {
    if (!(margin > 0.0)) throw ConfigurationError("contrastive margin must be > 0");
    if (!(pair_balance > 0.0 && pair_balance < 1.0)) {
        throw ConfigurationError("pair balance must lie strictly between 0 and 1");
    }
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigurationError("batch size must be >= 1");
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigurationError("learning rate must be >= 0");
    if (objective == Objective::contrastive) contrastive.validate();
}

// ---------------------------------------------------------------------------
// loss

double contrastive_loss(double distance, bool dissimilar, double margin, LossMode mode) {
    if (!(distance >= 0.0)) throw DomainError("contrastive_loss: distance must be >= 0");
    if (!(margin > 0.0)) throw DomainError("contrastive_loss: margin must be > 0");
    if (!dissimilar) return distance;
    return mode == LossMode::hinge ? std::max(margin - distance, 0.0)
                                   : std::min(margin - distance, margin);
}

double contrastive_loss_grad(double distance, bool dissimilar, double margin, LossMode mode) {
    if (!(distance >= 0.0)) throw DomainError("contrastive_loss_grad: distance must be >= 0");
    if (!(margin > 0.0)) throw DomainError("contrastive_loss_grad: margin must be > 0");
    if (!dissimilar) return 1.0;
    if (mode == LossMode::hinge) return distance < margin ? -1.0 : 0.0;
    return distance > 0.0 ? -1.0 : 0.0;
}

// ---------------------------------------------------------------------------
// pairs

std::vector<PairSample> sample_pairs(std::span<const std::size_t> labels, std::size_t batch_size,
                                     double balance, Rng& rng) {
    if (labels.size() < 2) throw SamplingError("sample_pairs: need at least 2 records");
    std::size_t num_classes = 0;
    for (auto l : labels) num_classes = std::max(num_classes, l + 1);
    std::vector<std::vector<std::size_t>> members(num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);

    const auto n_similar = static_cast<std::size_t>(
        std::llround(balance * static_cast<double>(batch_size)));
    const std::size_t n_dissimilar = batch_size - std::min(n_similar, batch_size);

    // pair counts per class and per class pair, for exact uniform draws
    std::vector<std::uint64_t> same(num_classes);
    std::uint64_t total_same = 0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        const std::uint64_t n = members[c].size();
        same[c] = n * (n > 0 ? n - 1 : 0) / 2;
        total_same += same[c];
    }
    std::vector<std::pair<std::size_t, std::size_t>> class_pairs;
    std::vector<std::uint64_t> cross;
    std::uint64_t total_cross = 0;
    for (std::size_t a = 0; a < num_classes; ++a) {
        for (std::size_t b = a + 1; b < num_classes; ++b) {
            const std::uint64_t w = members[a].size() * members[b].size();
            if (w == 0) continue;
            class_pairs.emplace_back(a, b);
            cross.push_back(w);
            total_cross += w;
        }
    }
    if (n_similar > 0 && total_same == 0) {
        throw SamplingError("sample_pairs: no class has two members, cannot draw similar pairs");
    }
    if (n_dissimilar > 0 && total_cross == 0) {
        throw SamplingError("sample_pairs: only one class present, cannot draw dissimilar pairs");
    }

    auto locate = [&](const std::vector<std::uint64_t>& weights, std::uint64_t total) {
        std::uint64_t r = rng.index(static_cast<std::size_t>(total));
        std::size_t i = 0;
        while (r >= weights[i]) r -= weights[i++];
        return i;
    };

    std::vector<PairSample> pairs;
    pairs.reserve(batch_size);
    for (std::size_t s = 0; s < n_similar; ++s) {
        const auto& group = members[locate(same, total_same)];
        const std::size_t i = rng.index(group.size());
        std::size_t j = rng.index(group.size() - 1);
        if (j >= i) ++j;
        pairs.push_back({group[i], group[j], false});
    }
    for (std::size_t s = 0; s < n_dissimilar; ++s) {
        const auto [a, b] = class_pairs[locate(cross, total_cross)];
        const std::size_t i = members[a][rng.index(members[a].size())];
        const std::size_t j = members[b][rng.index(members[b].size())];
        pairs.push_back({i, j, true});
    }
    return pairs;
}

// ---------------------------------------------------------------------------
// batch objectives

double contrastive_batch(InningsModel& model, std::span<const Example> examples,
                         std::span<const PairSample> pairs, const ContrastiveConfig& config,
                         bool accumulate) {
    if (pairs.empty()) return 0.0;
    const double scale = 1.0 / static_cast<double>(pairs.size());
    double total = 0.0;
    Vector direction(model.config().output_dim());
    for (const auto& pair : pairs) {
        const auto first = model.forward(examples[pair.first].input);
        const auto second = model.forward(examples[pair.second].input);
        const double d = euclidean_distance(first.output, second.output);
        total += contrastive_loss(d, pair.dissimilar, config.margin, config.mode);
        if (!accumulate || d == 0.0) continue;
        const double g =
            scale * contrastive_loss_grad(d, pair.dissimilar, config.margin, config.mode);
        if (g == 0.0) continue;
        for (std::size_t i = 0; i < direction.size(); ++i) {
            direction[i] = g * (first.output[i] - second.output[i]) / d;
        }
        model.backward(first, direction);
        for (double& v : direction) v = -v;
        model.backward(second, direction);
    }
    return total * scale;
}

double cross_entropy_batch(InningsModel& model, std::span<const Example> examples,
                           std::span<const std::size_t> batch, bool accumulate) {
    if (batch.empty()) return 0.0;
    const double scale = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (std::size_t idx : batch) {
        const auto trace = model.forward(examples[idx].input);
        auto ce = softmax_cross_entropy(trace.output, examples[idx].label);
        total += ce.loss;
        if (!accumulate) continue;
        for (double& v : ce.grad_logits) v *= scale;
        model.backward(trace, ce.grad_logits);
    }
    return total * scale;
}

// ---------------------------------------------------------------------------
// training loops

namespace {

class Optimizer {
public:
    Optimizer(InningsModel& model, const TrainConfig& config) : lr_(config.lr) {
        for (auto* p : model.parameters()) {
            states_.emplace_back(p->value.rows(), p->value.cols(), config.adam);
        }
    }

    void step(InningsModel& model) {
        auto params = model.parameters();
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (params[i]->trainable) {
                adam_step(*params[i], states_[i], lr_);
            } else {
                params[i]->zero_grad();
            }
        }
        if (model.batting_table().rows.trainable) model.batting_table().normalize_rows();
        if (model.bowling_table().rows.trainable) model.bowling_table().normalize_rows();
        ++steps_;
    }

    std::size_t steps() const { return steps_; }

private:
    double lr_;
    std::size_t steps_ = 0;
    std::vector<AdamState> states_;
};

void check_finite(double loss, std::size_t epoch) {
    if (!std::isfinite(loss)) {
        throw NumericFailure("training diverged: non-finite loss in epoch " +
                             std::to_string(epoch));
    }
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

TrainReport train_cross_entropy(InningsModel& model, std::span<const Example> examples,
                                const TrainConfig& config, const StepObserver& observer) {
    config.validate();
    if (model.config().head != HeadKind::classifier) {
        throw ConfigurationError("cross-entropy training needs a classifier head");
    }
    if (config.objective != Objective::cross_entropy) {
        throw ConfigurationError("train_cross_entropy called with a contrastive config");
    }
    if (examples.empty()) throw ConfigurationError("no training examples");

    const auto start = std::chrono::steady_clock::now();
    TrainReport report{config, {}, 0.0, {}};
    Optimizer opt(model, config);
    model.zero_grad();
    Rng rng = Rng::derive(config.seed, "shuffle");
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            const std::span<const std::size_t> batch(order.data() + begin, end - begin);
            const double loss = cross_entropy_batch(model, examples, batch, true);
            check_finite(loss, epoch);
            epoch_loss += loss * static_cast<double>(batch.size());
            opt.step(model);
            if (observer) observer(model, opt.steps());
        }
        report.loss_curve.push_back(epoch_loss / static_cast<double>(order.size()));
    }
    report.seconds = elapsed_since(start);
    return report;
}

TrainReport train_contrastive(InningsModel& model, std::span<const Example> examples,
                              const TrainConfig& config, const StepObserver& observer) {
    config.validate();
    if (model.config().head != HeadKind::representation) {
        throw ConfigurationError("contrastive training needs a representation head");
    }
    if (config.objective != Objective::contrastive) {
        throw ConfigurationError("train_contrastive called with a cross-entropy config");
    }
    if (examples.empty()) throw ConfigurationError("no training examples");

    const auto start = std::chrono::steady_clock::now();
    TrainReport report{config, {}, 0.0, {}};
    Optimizer opt(model, config);
    model.zero_grad();
    Rng rng = Rng::derive(config.seed, "pairs");
    std::vector<std::size_t> labels;
    labels.reserve(examples.size());
    for (const auto& e : examples) labels.push_back(e.label);
    const std::size_t batches = (examples.size() + config.batch_size - 1) / config.batch_size;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < batches; ++b) {
            const auto pairs =
                sample_pairs(labels, config.batch_size, config.contrastive.pair_balance, rng);
            const double loss = contrastive_batch(model, examples, pairs, config.contrastive, true);
            check_finite(loss, epoch);
            epoch_loss += loss;
            opt.step(model);
            if (observer) observer(model, opt.steps());
        }
        report.loss_curve.push_back(epoch_loss / static_cast<double>(batches));
    }
    report.seconds = elapsed_since(start);
    return report;
}

TrainReport train_predictor(InningsModel& predictor, const InningsModel& source,
                            std::span<const Example> examples, const TrainConfig& config,
                            const StepObserver& observer) {
    if (predictor.config().kind != ModelKind::predictor) {
        throw ConfigurationError("train_predictor needs a predictor model");
    }
    const auto& bat = predictor.batting_table().rows;
    const auto& bowl = predictor.bowling_table().rows;
    if (bat.trainable || bowl.trainable) {
        throw ConfigurationError("predictor embedding tables must be frozen before training");
    }
    if (bat.value != source.batting_table().rows.value ||
        bowl.value != source.bowling_table().rows.value) {
        throw ConfigurationError("predictor embedding tables differ from the source model");
    }
    const bool needs_pitch = predictor.config().has_pitch();
    for (const auto& e : examples) {
        if (needs_pitch != e.input.pitch.has_value()) {
            throw ConfigurationError(needs_pitch ? "pitch-configured predictor needs pitch vectors"
                                                 : "predictor has no pitch branch but "
                                                   "examples carry pitch vectors");
        }
    }
    const DenseMatrix bat_before = bat.value;
    const DenseMatrix bowl_before = bowl.value;

    TrainReport report = config.objective == Objective::cross_entropy
                             ? train_cross_entropy(predictor, examples, config, observer)
                             : train_contrastive(predictor, examples, config, observer);

    if (bat.value != bat_before || bowl.value != bowl_before) {
        throw std::logic_error("train_predictor: frozen embedding tables changed");
    }
    return report;
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k,
                                                  std::uint64_t seed) {
    if (k < 2 || n < k) {
        throw ValidationError("kfold_split: need 2 <= k <= n, got k=" + std::to_string(k) +
                              ", n=" + std::to_string(n));
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng = Rng::derive(seed, "kfold");
    rng.shuffle(std::span<std::size_t>(perm));
    std::vector<std::vector<std::size_t>> folds(k);
    for (std::size_t i = 0; i < n; ++i) folds[i % k].push_back(perm[i]);
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

}  // namespace cricrep
