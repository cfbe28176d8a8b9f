#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cricrep/models.hpp"
#include "test_support.hpp"

using namespace cricrep;
using cricrep::fixtures::check_parameter_gradients;

namespace {

Vector random_upstream(Rng& rng, std::size_t n) {
    Vector v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

InningsModel predictor_for(const SyntheticData& data, bool pitch, HeadKind head, std::uint64_t seed) {
    const auto ctx = FeatureContext::of(data.dataset);
    auto m = init_model(predictor_config(data.dataset.players.size(), ctx.dim(),
                                         pitch ? data.pitch.dim : 0, head),
                        seed);
    m.index = {data.dataset.players.names(), ctx};
    return m;
}

}  // namespace

TEST(ModelConfig, TrunkWidths) {
    EXPECT_EQ(player_model_config(30, HeadKind::classifier).trunk_input(), 128u);
    EXPECT_EQ(predictor_config(30, 11, 0, HeadKind::classifier).trunk_input(), 160u);
    EXPECT_EQ(predictor_config(30, 11, 8, HeadKind::classifier).trunk_input(), 192u);
    EXPECT_EQ(predictor_config(30, 11, 8, HeadKind::representation).output_dim(), 32u);
    EXPECT_EQ(predictor_config(30, 11, 8, HeadKind::classifier).output_dim(), 4u);
}

TEST(Init, DeterministicUnitRowsZeroBiases) {
    const auto cfg = predictor_config(24, 6, 4, HeadKind::classifier);
    const InningsModel a = init_model(cfg, 5), b = init_model(cfg, 5), c = init_model(cfg, 6);
    EXPECT_EQ(serialize_model(a), serialize_model(b));
    EXPECT_NE(serialize_model(a), serialize_model(c));
    for (std::size_t r = 0; r < a.batting_table().size(); ++r) {
        EXPECT_NEAR(l2_norm(a.batting_table().rows.value.row(r)), 1.0, 1e-12);
        EXPECT_NEAR(l2_norm(a.bowling_table().rows.value.row(r)), 1.0, 1e-12);
    }
    const auto names = a.parameter_names();
    const auto params = a.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (names[i].ends_with(".bias")) {
            for (double v : params[i]->value.values()) EXPECT_EQ(v, 0.0) << names[i];
        }
    }
}

TEST(EmbedTeam, MeanOfRows) {
    InningsModel m = init_model(player_model_config(24, HeadKind::classifier), 1);
    const std::vector<std::size_t> same(11, 7);
    const Vector pooled = embed_team(m.batting_table(), same);
    const auto row = m.batting_table().rows.value.row(7);
    for (std::size_t i = 0; i < pooled.size(); ++i) EXPECT_NEAR(pooled[i], row[i], 1e-15);

    const std::vector<std::size_t> lineup{0, 3, 5, 6, 8, 10, 11, 12, 15, 20, 23};
    const Vector got = embed_team(m.batting_table(), lineup);
    for (std::size_t d = 0; d < got.size(); ++d) {
        double acc = 0.0;
        for (auto p : lineup) acc += m.batting_table().rows.value.at(p, d);
        EXPECT_EQ(got[d], acc / 11.0);
    }
    std::vector<std::size_t> bad = lineup;
    bad.back() = 24;
    EXPECT_THROW(embed_team(m.batting_table(), bad), LookupError);
}

TEST(Forward, HeadContracts) {
    const auto data = fixtures::toy_data(1);
    const auto examples = fixtures::toy_examples(data, false, false);
    const InningsModel cls = init_model(player_model_config(24, HeadKind::classifier), 2);
    const InningsModel rep = init_model(player_model_config(24, HeadKind::representation), 2);
    for (const auto& e : examples) {
        const Vector logits = cls.output(e.input);
        ASSERT_EQ(logits.size(), 4u);
        EXPECT_TRUE(std::all_of(logits.begin(), logits.end(), [](double v) { return std::isfinite(v); }));
        const Vector r = rep.output(e.input);
        ASSERT_EQ(r.size(), 32u);
        EXPECT_NEAR(l2_norm(r), 1.0, 1e-6);
    }
}

TEST(Forward, BattingAndBowlingBranchesAreDistinct) {
    const auto data = fixtures::toy_data(2);
    const auto examples = fixtures::toy_examples(data, false, false);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const InningsModel m = init_model(player_model_config(24, HeadKind::classifier), seed);
        InningsInput swapped = examples[seed].input;
        std::swap(swapped.batting, swapped.bowling);
        const Vector a = m.output(examples[seed].input), b = m.output(swapped);
        double diff = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
        EXPECT_GT(diff, 1e-6) << seed;
    }
}

TEST(Forward, PitchAndFeatureErrors) {
    const auto data = fixtures::toy_data(3);
    const auto with_pitch = fixtures::toy_examples(data, true, true);
    const auto without = fixtures::toy_examples(data, true, false);
    const InningsModel pitched = predictor_for(data, true, HeadKind::classifier, 1);
    const InningsModel plain = predictor_for(data, false, HeadKind::classifier, 1);
    EXPECT_NO_THROW(pitched.output(with_pitch[0].input));
    EXPECT_NO_THROW(plain.output(without[0].input));
    EXPECT_THROW(pitched.output(without[0].input), ConfigurationError);
    EXPECT_THROW(plain.output(with_pitch[0].input), ConfigurationError);

    InningsInput short_features = without[0].input;
    short_features.features.pop_back();
    EXPECT_THROW(plain.output(short_features), ShapeError);
    InningsInput short_pitch = with_pitch[0].input;
    short_pitch.pitch->pop_back();
    EXPECT_THROW(pitched.output(short_pitch), ShapeError);
}

TEST(Forward, PlayerModelIgnoresMatchFeatures) {
    const auto data = fixtures::toy_data(4);
    const auto plain = fixtures::toy_examples(data, false, false);
    const auto featured = fixtures::toy_examples(data, true, true);
    const InningsModel m = init_model(player_model_config(24, HeadKind::representation), 3);
    EXPECT_EQ(m.output(plain[0].input), m.output(featured[0].input));
}

TEST(Forward, LineupPermutationInvariance) {
    const auto data = fixtures::toy_data(5);
    const auto examples = fixtures::toy_examples(data, true, true);
    const InningsModel m = predictor_for(data, true, HeadKind::representation, 4);
    Rng rng(99);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto& e = examples[rng.index(examples.size())];
        InningsInput p = e.input;
        rng.shuffle(std::span<std::size_t>(p.batting));
        rng.shuffle(std::span<std::size_t>(p.bowling));
        const Vector a = m.output(e.input), b = m.output(p);
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    EXPECT_LT(worst, 1e-9);
}

TEST(Backward, PlayerModelGradientsMatchFiniteDifferences) {
    const auto data = fixtures::toy_data(6);
    const auto examples = fixtures::toy_examples(data, false, false);
    Rng rng(17);
    for (HeadKind head : {HeadKind::classifier, HeadKind::representation}) {
        for (int c = 0; c < 4; ++c) {
            InningsModel m = init_model(player_model_config(24, head), 100 + c);
            const Example* pick = &examples[rng.index(examples.size())];
            while (fixtures::near_kink(m, pick->input)) pick = &examples[rng.index(examples.size())];
            const auto& e = *pick;
            const Vector up = random_upstream(rng, m.config().output_dim());
            const auto res = check_parameter_gradients(
                m, [&](const InningsModel& mm) { return dot(up, mm.output(e.input)); },
                [&](InningsModel& mm) { mm.backward(mm.forward(e.input), up); }, rng, 6);
            EXPECT_LT(res.worst, 1e-4) << res.worst_at;
        }
    }
}

TEST(Backward, PredictorGradientsMatchFiniteDifferences) {
    const auto data = fixtures::toy_data(7);
    const auto examples = fixtures::toy_examples(data, true, true);
    Rng rng(18);
    for (HeadKind head : {HeadKind::classifier, HeadKind::representation}) {
        for (int c = 0; c < 3; ++c) {
            InningsModel m = predictor_for(data, true, head, 200 + c);
            const Example* pick = &examples[rng.index(examples.size())];
            while (fixtures::near_kink(m, pick->input)) pick = &examples[rng.index(examples.size())];
            const auto& e = *pick;
            const Vector up = random_upstream(rng, m.config().output_dim());
            const auto res = check_parameter_gradients(
                m, [&](const InningsModel& mm) { return dot(up, mm.output(e.input)); },
                [&](InningsModel& mm) { mm.backward(mm.forward(e.input), up); }, rng, 6);
            EXPECT_LT(res.worst, 1e-4) << res.worst_at;
        }
    }
}

TEST(Backward, UpstreamShapeIsChecked) {
    const auto data = fixtures::toy_data(8);
    const auto examples = fixtures::toy_examples(data, false, false);
    InningsModel m = init_model(player_model_config(24, HeadKind::classifier), 1);
    const auto trace = m.forward(examples[0].input);
    EXPECT_THROW(m.backward(trace, Vector(3, 1.0)), ShapeError);
}

TEST(Transfer, CopiesAndFreezesTables) {
    const auto data = fixtures::toy_data(9);
    const InningsModel player = init_model(player_model_config(24, HeadKind::representation), 1);
    InningsModel pred = predictor_for(data, false, HeadKind::representation, 2);
    transfer_embeddings(player, pred);
    EXPECT_EQ(pred.batting_table().rows.value, player.batting_table().rows.value);
    EXPECT_EQ(pred.bowling_table().rows.value, player.bowling_table().rows.value);
    EXPECT_FALSE(pred.batting_table().rows.trainable);
    EXPECT_FALSE(pred.bowling_table().rows.trainable);

    const InningsModel bigger = init_model(player_model_config(30, HeadKind::representation), 1);
    EXPECT_THROW(transfer_embeddings(bigger, pred), ConfigurationError);
}

TEST(Serialization, RoundTripIsBitExact) {
    const auto data = fixtures::toy_data(10);
    const auto examples = fixtures::toy_examples(data, true, true);
    InningsModel m = predictor_for(data, true, HeadKind::representation, 3);
    transfer_embeddings(init_model(player_model_config(24, HeadKind::representation), 1), m);
    const auto dir = fixtures::scratch_dir("model");
    save_model(m, dir / "m.json");
    const InningsModel back = load_model(dir / "m.json");
    EXPECT_EQ(back.config(), m.config());
    EXPECT_EQ(back.index.players, m.index.players);
    EXPECT_EQ(back.index.features.venues, m.index.features.venues);
    EXPECT_FALSE(back.embeddings_trainable());
    EXPECT_EQ(serialize_model(back), serialize_model(m));
    for (const auto& e : examples) EXPECT_EQ(back.output(e.input), m.output(e.input));

    InningsInput no_pitch = examples[0].input;
    no_pitch.pitch.reset();
    EXPECT_THROW(back.output(no_pitch), ConfigurationError);
}

TEST(Serialization, MalformedFilesAreFormatErrors) {
    const auto data = fixtures::toy_data(11);
    const InningsModel m = predictor_for(data, false, HeadKind::classifier, 3);
    const std::string text = serialize_model(m);
    EXPECT_THROW(deserialize_model(text.substr(0, text.size() / 2)), ModelFormatError);

    auto j = nlohmann::json::parse(text);
    j["version"] = 99;
    EXPECT_THROW(deserialize_model(j.dump()), ModelFormatError);
    j = nlohmann::json::parse(text);
    j["params"][3]["values"].erase(0);
    EXPECT_THROW(deserialize_model(j.dump()), ModelFormatError);
    j = nlohmann::json::parse(text);
    j["format"] = "something-else";
    EXPECT_THROW(deserialize_model(j.dump()), ModelFormatError);
}
