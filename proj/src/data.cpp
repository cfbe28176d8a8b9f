#include "cricrep/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cricrep/rng.hpp"

namespace cricrep {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;
namespace chr = std::chrono;

// ---------------------------------------------------------------------------
// dates

std::optional<chr::year_month_day> parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        int v = 0;
        const char* first = text.data() + pos;
        auto [ptr, ec] = std::from_chars(first, first + len, v);
        if (ec != std::errc{} || ptr != first + len) return std::nullopt;
        return v;
    };
    const auto y = num(0, 4);
    const auto m = num(5, 2);
    const auto d = num(8, 2);
    if (!y || !m || !d) return std::nullopt;
    const chr::year_month_day date{chr::year{*y}, chr::month{static_cast<unsigned>(*m)},
                                   chr::day{static_cast<unsigned>(*d)}};
    if (!date.ok()) return std::nullopt;
    return date;
}

std::string format_date(const chr::year_month_day& date) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

// ---------------------------------------------------------------------------
// records

namespace {

[[noreturn]] void invalid(const std::string& innings, const std::string& field,
                          const std::string& what) {
    throw ValidationError("innings " + innings + ": field " + field + ": " + what);
}

void check_lineup(const InningsRecord& r, const Lineup& lineup, const char* field) {
    std::set<std::string> seen;
    for (const auto& p : lineup) {
        if (p.empty()) invalid(r.innings_id, field, "empty player id");
        if (!seen.insert(p).second) invalid(r.innings_id, field, "duplicate player " + p);
    }
}

}  // namespace

void validate_record(const InningsRecord& r) {
    if (r.innings_id.empty()) invalid("<unnamed>", "innings_id", "empty");
    if (r.venue_id.empty()) invalid(r.innings_id, "venue_id", "empty");
    if (!r.match_date.ok()) invalid(r.innings_id, "match_date", "not a valid date");
    check_lineup(r, r.batting_lineup, "batting_lineup");
    check_lineup(r, r.bowling_lineup, "bowling_lineup");
    for (const auto& p : r.batting_lineup) {
        if (std::find(r.bowling_lineup.begin(), r.bowling_lineup.end(), p) !=
            r.bowling_lineup.end()) {
            invalid(r.innings_id, "bowling_lineup", "player " + p + " is also in batting_lineup");
        }
    }
    if (!std::isfinite(r.run_rate) || r.run_rate < 0.0 || r.run_rate > 36.0) {
        invalid(r.innings_id, "run_rate",
                "must be finite and within [0, 36], got " + shortest_double(r.run_rate));
    }
}

std::size_t IdIndex::add(const std::string& id) {
    auto [it, inserted] = lookup_.try_emplace(id, names_.size());
    if (inserted) names_.push_back(id);
    return it->second;
}

std::optional<std::size_t> IdIndex::find(const std::string& id) const {
    auto it = lookup_.find(id);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

std::size_t IdIndex::at(const std::string& id) const {
    auto found = find(id);
    if (!found) throw LookupError("unknown id: " + id);
    return *found;
}

IdIndex IdIndex::from_names(const std::vector<std::string>& names) {
    IdIndex idx;
    for (const auto& n : names) {
        if (idx.find(n)) throw ValidationError("duplicate id in index: " + n);
        idx.add(n);
    }
    return idx;
}

Dataset Dataset::from_records(std::vector<InningsRecord> records) {
    Dataset ds;
    std::set<std::string> ids;
    for (const auto& r : records) {
        validate_record(r);
        if (!ids.insert(r.innings_id).second) {
            invalid(r.innings_id, "innings_id", "duplicate innings id");
        }
        for (const auto& p : r.batting_lineup) ds.players.add(p);
        for (const auto& p : r.bowling_lineup) ds.players.add(p);
        ds.venues.add(r.venue_id);
        if (ds.records.empty() || r.match_date < ds.first_date) ds.first_date = r.match_date;
        if (ds.records.empty() || r.match_date > ds.last_date) ds.last_date = r.match_date;
        ds.records.push_back(r);
    }
    return ds;
}

std::vector<double> Dataset::run_rates() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.run_rate);
    return out;
}

namespace {

InningsRecord record_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": expected a JSON object");
    InningsRecord r;
    const auto id_it = j.find("innings_id");
    if (id_it == j.end() || !id_it->is_string()) {
        throw ValidationError(where + ": field innings_id: missing or not a string");
    }
    r.innings_id = id_it->get<std::string>();

    auto string_field = [&](const char* name) {
        auto it = j.find(name);
        if (it == j.end() || !it->is_string()) invalid(r.innings_id, name, "missing or not a string");
        return it->get<std::string>();
    };
    auto lineup_field = [&](const char* name) {
        auto it = j.find(name);
        if (it == j.end() || !it->is_array()) invalid(r.innings_id, name, "missing or not an array");
        if (it->size() != kLineupSize) {
            invalid(r.innings_id, name,
                    "expected 11 players, got " + std::to_string(it->size()));
        }
        Lineup lineup;
        for (std::size_t i = 0; i < kLineupSize; ++i) {
            if (!(*it)[i].is_string()) invalid(r.innings_id, name, "player ids must be strings");
            lineup[i] = (*it)[i].get<std::string>();
        }
        return lineup;
    };

    const auto date = parse_date(string_field("match_date"));
    if (!date) invalid(r.innings_id, "match_date", "malformed date, expected YYYY-MM-DD");
    r.match_date = *date;
    r.venue_id = string_field("venue_id");
    r.batting_lineup = lineup_field("batting_lineup");
    r.bowling_lineup = lineup_field("bowling_lineup");

    auto rr = j.find("run_rate");
    if (rr == j.end() || !rr->is_number()) invalid(r.innings_id, "run_rate", "missing or not a number");
    r.run_rate = rr->get<double>();

    auto pt = j.find("pitch_text_id");
    if (pt != j.end() && !pt->is_null()) {
        if (!pt->is_string()) invalid(r.innings_id, "pitch_text_id", "must be a string or null");
        r.pitch_text_id = pt->get<std::string>();
    }
    return r;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw LoadError("cannot write " + path.string());
    return out;
}

}  // namespace

Dataset parse_dataset(std::istream& in, const std::string& source) {
    std::vector<InningsRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = source + ":" + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError(where + ": malformed JSON: " + e.what());
        }
        records.push_back(record_from_json(j, where));
    }
    return Dataset::from_records(std::move(records));
}

Dataset load_dataset(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_dataset(in, path.string());
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
    for (const auto& r : dataset.records) {
        ordered_json j;
        j["innings_id"] = r.innings_id;
        j["match_date"] = format_date(r.match_date);
        j["venue_id"] = r.venue_id;
        j["batting_lineup"] = r.batting_lineup;
        j["bowling_lineup"] = r.bowling_lineup;
        j["run_rate"] = r.run_rate;
        j["pitch_text_id"] = r.pitch_text_id ? ordered_json(*r.pitch_text_id) : ordered_json(nullptr);
        out << j.dump() << '\n';
    }
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
    auto out = open_output(path);
    write_dataset(out, dataset);
}

// ---------------------------------------------------------------------------
// pitch embeddings

std::string shortest_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

const Vector* PitchEmbeddingSet::find(const std::string& id) const {
    auto it = vectors.find(id);
    return it == vectors.end() ? nullptr : &it->second;
}

PitchEmbeddingSet parse_pitch_embeddings(std::istream& in, const std::string& source) {
    auto fail = [&](std::size_t row, const std::string& what) -> LoadError {
        return LoadError(source + ": row " + std::to_string(row) + ": " + what);
    };
    PitchEmbeddingSet set;
    std::string line;
    std::size_t row = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!have_header) {
            std::size_t dim = 0;
            const char* first = line.data() + 4;
            const char* last = line.data() + line.size();
            if (line.rfind("dim=", 0) != 0) throw fail(row, "expected header dim=<d>");
            auto [ptr, ec] = std::from_chars(first, last, dim);
            if (ec != std::errc{} || ptr != last || dim == 0) throw fail(row, "bad dim header");
            set.dim = dim;
            have_header = true;
            continue;
        }
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) throw fail(row, "expected <id>\\t<values>");
        std::string id = line.substr(0, tab);
        Vector values;
        const char* p = line.data() + tab + 1;
        const char* end = line.data() + line.size();
        while (p <= end) {
            const char* comma = std::find(p, end, ',');
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(p, comma, v);
            if (ec != std::errc{} || ptr != comma) throw fail(row, "unparseable value");
            if (!std::isfinite(v)) throw fail(row, "non-finite value");
            values.push_back(v);
            p = comma + 1;
        }
        if (values.size() != set.dim) {
            throw fail(row, "expected " + std::to_string(set.dim) + " values, got " +
                                std::to_string(values.size()));
        }
        const double norm = l2_norm(values);
        if (std::abs(norm - 1.0) > 1e-3) {
            throw fail(row, "vector norm " + shortest_double(norm) + " is not within 1e-3 of 1");
        }
        for (double& v : values) v /= norm;
        if (!set.vectors.emplace(std::move(id), std::move(values)).second) {
            throw fail(row, "duplicate pitch_text_id " + line.substr(0, tab));
        }
    }
    if (!have_header) throw fail(0, "empty file, missing dim header");
    return set;
}

PitchEmbeddingSet load_pitch_embeddings(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_pitch_embeddings(in, path.string());
}

void write_pitch_embeddings(std::ostream& out, const PitchEmbeddingSet& set) {
    out << "dim=" << set.dim << '\n';
    for (const auto& [id, vec] : set.vectors) {
        out << id << '\t';
        for (std::size_t i = 0; i < vec.size(); ++i) {
            if (i) out << ',';
            out << shortest_double(vec[i]);
        }
        out << '\n';
    }
}

void save_pitch_embeddings(const std::filesystem::path& path, const PitchEmbeddingSet& set) {
    auto out = open_output(path);
    write_pitch_embeddings(out, set);
}

// ---------------------------------------------------------------------------
// text hashing

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Vector hash_vectorize(std::string_view text, std::size_t dim) {
    if (dim < 8) throw ValidationError("hash_vectorize: dim must be >= 8");
    constexpr std::uint64_t kBucketBasis = 0xcbf29ce484222325ULL;  // standard FNV offset
    constexpr std::uint64_t kSignBasis = 0x84222325cbf29ce4ULL;
    Vector counts(dim, 0.0);
    for (const auto& token : tokenize(text)) {
        const auto bucket = fnv1a64(token, kBucketBasis) % dim;
        const double sign = (fnv1a64(token, kSignBasis) & 1ULL) ? -1.0 : 1.0;
        counts[bucket] += sign;
    }
    return l2_normalize(counts, 1e-8);
}

std::vector<PitchText> load_pitch_texts(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<PitchText> out;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            out.push_back({j.at("pitch_text_id").get<std::string>(), j.at("text").get<std::string>()});
        } catch (const json::exception& e) {
            throw LoadError(path.string() + ": row " + std::to_string(row) + ": " + e.what());
        }
    }
    return out;
}

void save_pitch_texts(const std::filesystem::path& path, const std::vector<PitchText>& texts) {
    auto out = open_output(path);
    for (const auto& t : texts) {
        ordered_json j;
        j["pitch_text_id"] = t.pitch_text_id;
        j["text"] = t.text;
        out << j.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// match features

FeatureContext FeatureContext::of(const Dataset& dataset) {
    return {dataset.venues.names(), static_cast<int>(dataset.first_date.year()),
            static_cast<int>(dataset.last_date.year())};
}

Vector match_features(const InningsRecord& record, const FeatureContext& context) {
    const auto it = std::find(context.venues.begin(), context.venues.end(), record.venue_id);
    if (it == context.venues.end()) {
        throw LookupError("match_features: unknown venue " + record.venue_id + " in innings " +
                          record.innings_id);
    }
    Vector out(context.dim(), 0.0);
    out[static_cast<std::size_t>(it - context.venues.begin())] = 1.0;
    const int year = static_cast<int>(record.match_date.year());
    const int span = context.last_year - context.first_year;
    const double season =
        span > 0 ? static_cast<double>(year - context.first_year) / span : 0.0;
    const double month = static_cast<unsigned>(record.match_date.month());
    const double angle = 2.0 * std::numbers::pi * month / 12.0;
    const std::size_t n = context.venues.size();
    out[n] = std::clamp(season, 0.0, 1.0);
    out[n + 1] = std::sin(angle);
    out[n + 2] = std::cos(angle);
    return out;
}

Vector match_features(const InningsRecord& record, const Dataset& dataset) {
    return match_features(record, FeatureContext::of(dataset));
}

// ---------------------------------------------------------------------------
// synthetic data

void SyntheticSpec::validate() const {
    if (num_players < 2 * kLineupSize) {
        throw SpecError("synthetic spec: num_players must be >= 22, got " +
                        std::to_string(num_players));
    }
    if (num_innings < 40) {
        throw SpecError("synthetic spec: num_innings must be >= 40, got " +
                        std::to_string(num_innings));
    }
    if (num_venues < 1) throw SpecError("synthetic spec: num_venues must be >= 1");
    if (skill_dim < 1) throw SpecError("synthetic spec: skill_dim must be >= 1");
    if (!(noise_sd >= 0.0) || !(venue_sd >= 0.0) || !(skill_scale >= 0.0)) {
        throw SpecError("synthetic spec: noise_sd, venue_sd and skill_scale must be >= 0");
    }
    if (pitch_dim < 2 || pitch_dim % 2 != 0) {
        throw SpecError("synthetic spec: pitch_dim must be even and >= 2");
    }
}

namespace {

constexpr double kBaseRunRate = 8.0;
constexpr double kBattingWeight = 1.5;
constexpr double kBowlingWeight = 1.5;

std::string numbered(const char* prefix, std::size_t i, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, i);
    return buf;
}

// Harmonics of atan(offset): a smooth, monotone-in-sin encoding with unit norm.
Vector pitch_encoding(double offset, std::size_t dim) {
    const double theta = std::atan(offset);
    const std::size_t harmonics = dim / 2;
    const double scale = 1.0 / std::sqrt(static_cast<double>(harmonics));
    Vector v(dim);
    for (std::size_t h = 0; h < harmonics; ++h) {
        v[2 * h] = scale * std::cos(static_cast<double>(h + 1) * theta);
        v[2 * h + 1] = scale * std::sin(static_cast<double>(h + 1) * theta);
    }
    return v;
}

std::string pitch_description(const std::string& venue, double offset) {
    const char* words = offset < -1.0   ? "slow sluggish turner, low scoring, grip for spinners"
                        : offset < -0.3 ? "dry surface, some help for the slower bowlers"
                        : offset < 0.3  ? "balanced surface, even contest between bat and ball"
                        : offset < 1.0  ? "good batting surface with true bounce"
                                        : "flat road, batting paradise, high scoring venue";
    return "Pitch report for " + venue + ": " + words;
}

}  // namespace

void compute_truth_statistics(const Dataset& dataset, SyntheticTruth& truth) {
    const std::size_t n = dataset.records.size();
    std::vector<double> skill(n), rate(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = dataset.records[i];
        double acc = 0.0;
        for (const auto& p : r.batting_lineup) {
            // player ids are "P<row>"
            acc += truth.batting_skill.at(std::stoul(p.substr(1)), 0);
        }
        skill[i] = acc / static_cast<double>(kLineupSize);
        rate[i] = r.run_rate;
    }
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return v.empty() ? 0.0 : s / static_cast<double>(v.size());
    };
    const double ms = mean(skill), mr = mean(rate);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (skill[i] - ms) * (rate[i] - mr);
        sxx += (skill[i] - ms) * (skill[i] - ms);
        syy += (rate[i] - mr) * (rate[i] - mr);
    }
    truth.mean_run_rate = mr;
    truth.batting_skill_correlation = (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng = Rng::derive(spec.seed, "synthetic");

    SyntheticData out;
    auto& truth = out.truth;
    truth.spec = spec;
    truth.batting_skill = DenseMatrix(spec.num_players, spec.skill_dim);
    truth.bowling_skill = DenseMatrix(spec.num_players, spec.skill_dim);
    for (double& v : truth.batting_skill.values()) v = spec.skill_scale * rng.normal();
    for (double& v : truth.bowling_skill.values()) v = spec.skill_scale * rng.normal();
    truth.venue_offset.resize(spec.num_venues);
    for (double& v : truth.venue_offset) v = spec.venue_sd * rng.normal();

    std::vector<std::string> players(spec.num_players), venues(spec.num_venues);
    for (std::size_t i = 0; i < players.size(); ++i) players[i] = numbered("P", i, 3);
    for (std::size_t i = 0; i < venues.size(); ++i) venues[i] = numbered("V", i, 2);

    std::vector<std::size_t> order(spec.num_players);
    std::vector<InningsRecord> records;
    records.reserve(spec.num_innings);
    for (std::size_t i = 0; i < spec.num_innings; ++i) {
        InningsRecord r;
        r.innings_id = numbered("I", i, 5);
        const int year = 2012 + static_cast<int>(rng.index(8));
        const unsigned month = 4 + static_cast<unsigned>(rng.index(2));
        const unsigned day = 1 + static_cast<unsigned>(rng.index(28));
        r.match_date = chr::year_month_day{chr::year{year}, chr::month{month}, chr::day{day}};
        const std::size_t venue = rng.index(spec.num_venues);
        r.venue_id = venues[venue];

        for (std::size_t p = 0; p < order.size(); ++p) order[p] = p;
        rng.shuffle(std::span<std::size_t>(order));
        double bat = 0.0, bowl = 0.0;
        for (std::size_t s = 0; s < kLineupSize; ++s) {
            r.batting_lineup[s] = players[order[s]];
            r.bowling_lineup[s] = players[order[kLineupSize + s]];
            bat += truth.batting_skill.at(order[s], 0);
            bowl += truth.bowling_skill.at(order[kLineupSize + s], 0);
        }
        bat /= static_cast<double>(kLineupSize);
        bowl /= static_cast<double>(kLineupSize);
        const double noise = rng.normal(0.0, spec.noise_sd);
        const double rate = kBaseRunRate + kBattingWeight * bat - kBowlingWeight * bowl +
                            truth.venue_offset[venue] + noise;
        r.run_rate = std::clamp(rate, 0.5, 36.0);
        r.pitch_text_id = "pitch-" + r.venue_id;
        records.push_back(std::move(r));
    }
    out.dataset = Dataset::from_records(std::move(records));
    compute_truth_statistics(out.dataset, truth);

    out.pitch.dim = spec.pitch_dim;
    for (std::size_t v = 0; v < spec.num_venues; ++v) {
        const std::string id = "pitch-" + venues[v];
        out.pitch.vectors.emplace(id, pitch_encoding(truth.venue_offset[v], spec.pitch_dim));
        out.pitch_texts.push_back({id, pitch_description(venues[v], truth.venue_offset[v])});
    }
    return out;
}

namespace {

ordered_json matrix_json(const DenseMatrix& m) {
    ordered_json rows = ordered_json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    }
    return rows;
}

DenseMatrix matrix_from_json(const json& j) {
    const std::size_t rows = j.size();
    const std::size_t cols = rows ? j[0].size() : 0;
    std::vector<double> values;
    for (const auto& row : j) {
        if (row.size() != cols) throw LoadError("ragged matrix in truth file");
        for (const auto& v : row) values.push_back(v.get<double>());
    }
    return DenseMatrix(rows, cols, std::move(values));
}

}  // namespace

void save_truth(const std::filesystem::path& path, const SyntheticTruth& truth) {
    const auto& s = truth.spec;
    ordered_json j;
    j["spec"] = {{"num_players", s.num_players}, {"num_venues", s.num_venues},
                 {"num_innings", s.num_innings}, {"skill_dim", s.skill_dim},
                 {"noise_sd", s.noise_sd},       {"venue_sd", s.venue_sd},
                 {"skill_scale", s.skill_scale}, {"pitch_dim", s.pitch_dim},
                 {"seed", s.seed}};
    j["model"] = {{"base_run_rate", kBaseRunRate},
                  {"batting_weight", kBattingWeight},
                  {"bowling_weight", kBowlingWeight},
                  {"clamp", {0.5, 36.0}}};
    j["batting_skill"] = matrix_json(truth.batting_skill);
    j["bowling_skill"] = matrix_json(truth.bowling_skill);
    j["venue_offset"] = truth.venue_offset;
    j["statistics"] = {{"mean_run_rate", truth.mean_run_rate},
                       {"batting_skill_correlation", truth.batting_skill_correlation}};
    auto out = open_output(path);
    out << j.dump(1) << '\n';
}

SyntheticTruth load_truth(const std::filesystem::path& path) {
    auto in = open_input(path);
    try {
        const json j = json::parse(in);
        SyntheticTruth t;
        const auto& s = j.at("spec");
        t.spec.num_players = s.at("num_players").get<std::size_t>();
        t.spec.num_venues = s.at("num_venues").get<std::size_t>();
        t.spec.num_innings = s.at("num_innings").get<std::size_t>();
        t.spec.skill_dim = s.at("skill_dim").get<std::size_t>();
        t.spec.noise_sd = s.at("noise_sd").get<double>();
        t.spec.venue_sd = s.at("venue_sd").get<double>();
        t.spec.skill_scale = s.at("skill_scale").get<double>();
        t.spec.pitch_dim = s.at("pitch_dim").get<std::size_t>();
        t.spec.seed = s.at("seed").get<std::uint64_t>();
        t.batting_skill = matrix_from_json(j.at("batting_skill"));
        t.bowling_skill = matrix_from_json(j.at("bowling_skill"));
        t.venue_offset = j.at("venue_offset").get<std::vector<double>>();
        t.mean_run_rate = j.at("statistics").at("mean_run_rate").get<double>();
        t.batting_skill_correlation =
            j.at("statistics").at("batting_skill_correlation").get<double>();
        return t;
    } catch (const json::exception& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// splits

Split sample_test_split(const Dataset& dataset, const LabelScheme& scheme, std::size_t per_class,
                        std::uint64_t seed) {
    std::vector<std::vector<std::size_t>> by_class(LabelScheme::kNumClasses);
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        by_class[scheme.assign(dataset.records[i].run_rate)].push_back(i);
    }
    Rng rng = Rng::derive(seed, "test-split");
    Split split;
    std::vector<bool> in_test(dataset.records.size(), false);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& members = by_class[c];
        if (members.size() < per_class) {
            throw SplitError("sample_test_split: class " + std::to_string(c) + " has " +
                             std::to_string(members.size()) + " members, need " +
                             std::to_string(per_class));
        }
        rng.shuffle(std::span<std::size_t>(members));
        for (std::size_t i = 0; i < per_class; ++i) {
            split.test.push_back(members[i]);
            in_test[members[i]] = true;
        }
    }
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        if (!in_test[i]) split.train.push_back(i);
    }
    return split;
}

}  // namespace cricrep
