#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cricrep/clustering.hpp"
#include "cricrep/errors.hpp"
#include "cricrep/numerics.hpp"

namespace cricrep {

inline constexpr std::size_t kLineupSize = 11;

using Lineup = std::array<std::string, kLineupSize>;

/// Parses YYYY-MM-DD; returns nullopt for malformed or impossible dates.
std::optional<std::chrono::year_month_day> parse_date(std::string_view text);
std::string format_date(const std::chrono::year_month_day& date);

struct InningsRecord {
    std::string innings_id;
    std::chrono::year_month_day match_date{};
    std::string venue_id;
    Lineup batting_lineup;
    Lineup bowling_lineup;
    double run_rate = 0.0;
    std::optional<std::string> pitch_text_id;
};

/// Throws ValidationError naming the innings and the offending field.
void validate_record(const InningsRecord& record);

/// Dense ids assigned in first-seen order.
class IdIndex {
public:
    std::size_t add(const std::string& id);
    std::optional<std::size_t> find(const std::string& id) const;
    std::size_t at(const std::string& id) const;
    const std::string& name(std::size_t index) const { return names_.at(index); }
    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    static IdIndex from_names(const std::vector<std::string>& names);

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> lookup_;
};

struct Dataset {
    std::vector<InningsRecord> records;
    IdIndex players;
    IdIndex venues;
    std::chrono::year_month_day first_date{};
    std::chrono::year_month_day last_date{};

    /// Validates every record and builds the indices.
    static Dataset from_records(std::vector<InningsRecord> records);

    std::vector<double> run_rates() const;
};

Dataset parse_dataset(std::istream& in, const std::string& source = "<stream>");
Dataset load_dataset(const std::filesystem::path& path);
/// Canonical JSONL: fixed key order, shortest round-trip doubles.
void write_dataset(std::ostream& out, const Dataset& dataset);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);

struct PitchEmbeddingSet {
    std::size_t dim = 0;
    std::map<std::string, Vector> vectors;

    const Vector* find(const std::string& id) const;
};

PitchEmbeddingSet parse_pitch_embeddings(std::istream& in, const std::string& source = "<stream>");
PitchEmbeddingSet load_pitch_embeddings(const std::filesystem::path& path);
void write_pitch_embeddings(std::ostream& out, const PitchEmbeddingSet& set);
void save_pitch_embeddings(const std::filesystem::path& path, const PitchEmbeddingSet& set);

/// Shortest decimal string that parses back to exactly `value`.
std::string shortest_double(double value);

/// Signed feature hashing over lowercase alphanumeric tokens. Each token is
/// hashed with FNV-1a 64 under two fixed offset bases: the first picks the
/// bucket, the parity of the second picks the sign. Result is L2-normalized.
Vector hash_vectorize(std::string_view text, std::size_t dim);
std::vector<std::string> tokenize(std::string_view text);

struct PitchText {
    std::string pitch_text_id;
    std::string text;
};

std::vector<PitchText> load_pitch_texts(const std::filesystem::path& path);
void save_pitch_texts(const std::filesystem::path& path, const std::vector<PitchText>& texts);

/// Context needed to encode pre-match features without the full dataset.
struct FeatureContext {
    std::vector<std::string> venues;
    int first_year = 0;
    int last_year = 0;

    static FeatureContext of(const Dataset& dataset);
    std::size_t dim() const { return venues.size() + 3; }
};

/// [venue one-hot | season in [0,1] | sin(2*pi*m/12) | cos(2*pi*m/12)]
Vector match_features(const InningsRecord& record, const FeatureContext& context);
Vector match_features(const InningsRecord& record, const Dataset& dataset);

struct SyntheticSpec {
    std::size_t num_players = 30;
    std::size_t num_venues = 8;
    std::size_t num_innings = 1000;
    std::size_t skill_dim = 4;
    double noise_sd = 0.5;
    double venue_sd = 1.0;
    double skill_scale = 1.0;
    std::size_t pitch_dim = 8;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticTruth {
    SyntheticSpec spec;
    DenseMatrix batting_skill;  // players x skill_dim
    DenseMatrix bowling_skill;
    std::vector<double> venue_offset;
    double mean_run_rate = 0.0;
    /// Pearson correlation between mean first-coordinate batting skill of the
    /// batting lineup and the run rate.
    double batting_skill_correlation = 0.0;
};

struct SyntheticData {
    Dataset dataset;
    SyntheticTruth truth;
    /// One pitch report per venue, encoding its offset.
    PitchEmbeddingSet pitch;
    std::vector<PitchText> pitch_texts;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);
/// Recomputes the summary statistics stored in the truth sidecar.
void compute_truth_statistics(const Dataset& dataset, SyntheticTruth& truth);

void save_truth(const std::filesystem::path& path, const SyntheticTruth& truth);
SyntheticTruth load_truth(const std::filesystem::path& path);

struct Split {
    std::vector<std::size_t> train;  // record indices, dataset order
    std::vector<std::size_t> test;   // per_class per class, class-major
};

Split sample_test_split(const Dataset& dataset, const LabelScheme& scheme, std::size_t per_class,
                        std::uint64_t seed);

}  // namespace cricrep
