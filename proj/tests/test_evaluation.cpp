#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "cricrep/evaluation.hpp"
#include "test_support.hpp"

using namespace cricrep;

namespace {

ExperimentOptions quick_options(std::size_t epochs) {
    ExperimentOptions o;
    o.embed_train.epochs = epochs;
    o.predict_train.epochs = epochs;
    o.resamples = 200;
    return o;
}

}  // namespace

TEST(Index, ShapeNormAndDeterminism) {
    const auto data = fixtures::toy_data(1);
    const auto ex = fixtures::toy_examples(data, false, false);
    const InningsModel m = init_model(player_model_config(24, HeadKind::representation), 1);
    const auto a = build_index(m, ex), b = build_index(m, ex);
    EXPECT_EQ(a.reps.rows(), ex.size());
    EXPECT_EQ(a.reps.cols(), 32u);
    EXPECT_EQ(a.reps, b.reps);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_NEAR(l2_norm(a.reps.row(i)), 1.0, 1e-6);
        EXPECT_EQ(a.ids[i], ex[i].id);
    }
    const InningsModel cls = init_model(player_model_config(24, HeadKind::classifier), 1);
    EXPECT_THROW(build_index(cls, ex), ConfigurationError);
}

TEST(Similarity, SelfQueryAndMajority) {
    Rng rng(2);
    RepresentationIndex idx = fixtures::random_index(rng, 30, 8);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto row = idx.reps.row(i);
        EXPECT_EQ(classify_by_similarity(idx, row, 1), idx.labels[i]);
    }
    for (std::size_t i = 0; i < idx.size(); ++i) idx.labels[i] = i < 20 ? 2 : i % 4;
    EXPECT_EQ(classify_by_similarity(idx, idx.reps.row(0), idx.size()), 2u);
    EXPECT_THROW(classify_by_similarity(idx, idx.reps.row(0), 0), ValidationError);
    EXPECT_THROW(classify_by_similarity(idx, idx.reps.row(0), 31), ValidationError);
    EXPECT_THROW(classify_by_similarity(RepresentationIndex{}, Vector(8), 1), ValidationError);
}

TEST(Similarity, VoteTiesGoToSmallerSummedDistanceThenClassId) {
    RepresentationIndex idx;
    idx.reps = DenseMatrix(4, 1, {0.0, 1.0, 3.0, 4.0});
    idx.labels = {3, 1, 1, 3};
    idx.ids = {"a", "b", "c", "d"};
    // neighbors of 0.4 with k=2: rows 0 (0.4, class 3) and 1 (0.6, class 1)
    EXPECT_EQ(classify_by_similarity(idx, Vector{0.4}, 2), 3u);
    EXPECT_EQ(classify_by_similarity(idx, Vector{0.6}, 2), 1u);
    // equal summed distance: the smaller class id wins
    EXPECT_EQ(classify_by_similarity(idx, Vector{0.5}, 2), 1u);
}

TEST(Similarity, MatchesExhaustiveScanOracle) {
    Rng rng(3);
    const RepresentationIndex idx = fixtures::random_index(rng, 150, 32);
    for (int q = 0; q < 200; ++q) {
        Vector v(32);
        for (double& x : v) x = rng.normal();
        const Vector u = l2_normalize(v);
        for (std::size_t k : {1, 3, 5}) {
            EXPECT_EQ(classify_by_similarity(idx, u, k), fixtures::oracle_knn_class(idx, u, k));
        }
    }
}

TEST(Logits, ArgmaxAndTies) {
    EXPECT_EQ(classify_by_logits(Vector{0.1, 2.0, 0.3, 0.0}), 1u);
    EXPECT_EQ(classify_by_logits(Vector{1, 1, 1, 1}), 0u);
    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
        Vector z{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
        const std::size_t c = classify_by_logits(z);
        for (double& x : z) x += 123.0;
        EXPECT_EQ(classify_by_logits(z), c);
    }
}

TEST(Confusion, CountsAndAccuracy) {
    const std::vector<std::size_t> truth{0, 1, 2, 3, 3};
    const auto m = confusion_and_accuracy(truth, truth);
    EXPECT_EQ(m.trace(), 5u);
    EXPECT_EQ(m.accuracy(), 1.0);
    EXPECT_EQ(m.counts[3][3], 2u);

    std::vector<std::size_t> t40, p40(40, 0);
    for (std::size_t c = 0; c < 4; ++c) t40.insert(t40.end(), 10, c);
    const auto all_zero = confusion_and_accuracy(p40, t40);
    EXPECT_EQ(all_zero.accuracy(), 0.25);
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(all_zero.counts[c][0], 10u);

    EXPECT_THROW(confusion_and_accuracy(std::vector<std::size_t>{}, std::vector<std::size_t>{}),
                 ValidationError);
    EXPECT_THROW(confusion_and_accuracy(std::vector<std::size_t>{0}, std::vector<std::size_t>{0, 1}),
                 ValidationError);
    EXPECT_THROW(confusion_and_accuracy(std::vector<std::size_t>{4}, std::vector<std::size_t>{0}),
                 ValidationError);
}

TEST(Confusion, AccuracyMatchesIndependentCount) {
    Rng rng(5);
    std::vector<std::size_t> p, t;
    for (int i = 0; i < 97; ++i) {
        p.push_back(rng.index(4));
        t.push_back(rng.index(4));
    }
    const auto m = confusion_and_accuracy(p, t);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < p.size(); ++i) hits += p[i] == t[i];
    EXPECT_EQ(m.accuracy(), static_cast<double>(hits) / 97.0);
    EXPECT_EQ(m.total(), 97u);
}

TEST(Bootstrap, DegenerateAndFairCoin) {
    EXPECT_EQ(bootstrap_ci(std::vector<bool>(40, true), 0.95, 2000, 1), std::make_pair(1.0, 1.0));
    EXPECT_EQ(bootstrap_ci(std::vector<bool>(40, false), 0.95, 2000, 1), std::make_pair(0.0, 0.0));
    EXPECT_THROW(bootstrap_ci({}, 0.95, 2000, 1), ValidationError);
    EXPECT_THROW(bootstrap_ci({true}, 0.95, 99, 1), ValidationError);

    Rng rng(6);
    std::vector<bool> flags(1000);
    for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = rng.uniform() < 0.5;
    const auto [lo, hi] = bootstrap_ci(flags, 0.95, 2000, 7);
    EXPECT_LE(lo, 0.5);
    EXPECT_GE(hi, 0.5);
    EXPECT_LT(hi - lo, 0.08);
    EXPECT_EQ(bootstrap_ci(flags, 0.95, 2000, 7), std::make_pair(lo, hi));
}

TEST(Experiment, SettingsShareSplitsAndReportsAreConsistent) {
    SyntheticSpec spec;
    spec.num_players = 24;
    spec.num_innings = 240;
    spec.seed = 2;
    const auto data = generate_synthetic(spec);
    const auto scheme = fixtures::toy_scheme(data.dataset);
    const auto settings = all_settings();
    const std::vector<std::uint64_t> seeds{3};
    const auto res = run_experiment(data.dataset, scheme, &data.pitch, settings, seeds, quick_options(2));
    ASSERT_EQ(res.reports.size(), 4u);
    ASSERT_EQ(res.aggregates.size(), 4u);
    for (const auto& r : res.reports) {
        EXPECT_EQ(r.matrix.total(), 40u);
        for (const auto& row : r.matrix.counts) {
            std::size_t n = 0;
            for (auto c : row) n += c;
            EXPECT_EQ(n, 10u);
        }
        EXPECT_LE(r.ci95.first, r.accuracy);
        EXPECT_GE(r.ci95.second, r.accuracy);
        EXPECT_EQ(r.correct.size(), 40u);
        const auto j = to_json(r);
        EXPECT_EQ(j["confusion"].size(), 4u);
        EXPECT_EQ(j["setting"], r.setting.name());
    }
    EXPECT_EQ(res.reports[0].setting.name(), "ce/pitch-off");
    EXPECT_EQ(res.reports[3].setting.name(), "contrastive/pitch-on");
}

TEST(Experiment, MissingPitchIsRejectedBeforeTraining) {
    const auto data = fixtures::toy_data(3, 24, 120);
    const auto scheme = fixtures::toy_scheme(data.dataset);
    const auto settings = all_settings();
    const std::vector<std::uint64_t> seeds{1};
    EXPECT_THROW(run_experiment(data.dataset, scheme, nullptr, settings, seeds, quick_options(1)),
                 ConfigurationError);
}

TEST(Experiment, FixedSeedIsBitReproducible) {
    const auto data = fixtures::toy_data(4, 24, 160);
    const auto scheme = fixtures::toy_scheme(data.dataset);
    const auto settings = all_settings();
    const std::vector<std::uint64_t> seeds{5, 6};
    const auto a = run_experiment(data.dataset, scheme, &data.pitch, settings, seeds, quick_options(2));
    const auto b = run_experiment(data.dataset, scheme, &data.pitch, settings, seeds, quick_options(2));
    ASSERT_EQ(a.reports.size(), b.reports.size());
    for (std::size_t i = 0; i < a.reports.size(); ++i) {
        EXPECT_EQ(to_json(a.reports[i]).dump(), to_json(b.reports[i]).dump());
    }
    for (std::size_t i = 0; i < a.aggregates.size(); ++i) {
        EXPECT_EQ(to_json(a.aggregates[i]).dump(), to_json(b.aggregates[i]).dump());
    }
}

TEST(Experiment, UntrainedModelsSitNearChance) {
    SyntheticSpec spec;
    spec.seed = 8;
    spec.num_innings = 400;
    const auto data = generate_synthetic(spec);
    const auto scheme = fixtures::toy_scheme(data.dataset);
    const auto settings = all_settings();
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 10; ++s) seeds.push_back(100 + s);
    const auto res = run_experiment(data.dataset, scheme, &data.pitch, settings, seeds, quick_options(0));
    // the band applies to the 10-seed mean: random features plus 1-NN can
    // carry real lineup signal on a single split
    for (const auto& a : res.aggregates) {
        EXPECT_GE(a.mean_accuracy, 0.05) << a.setting.name();
        EXPECT_LE(a.mean_accuracy, 0.55) << a.setting.name();
    }
}

TEST(Render, ConfusionText) {
    ConfusionMatrix m;
    m.counts[0][0] = 3;
    m.counts[1][0] = 1;
    const std::string text = render_confusion(m);
    EXPECT_NE(text.find("accuracy 0.75 (3/4)"), std::string::npos);
}
