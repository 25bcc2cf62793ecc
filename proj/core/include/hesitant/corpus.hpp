#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace hesitant {

/// One labeller's verdict for the target observation.
enum class TriLabel { Positive, Negative, Uncertain, Missing };

enum class Split { Train, Validation, Test };

std::string_view to_string(TriLabel label);
std::string_view to_string(Split split);

/// CheXpert export coding: "1.0", "0.0", "-1.0", "" (integer spellings accepted).
TriLabel parse_label_code(std::string_view cell);
std::string label_code(TriLabel label);

/// "train" | "validate" | "test".
Split parse_split(std::string_view cell);
std::string_view split_code(Split split);

struct ReportRecord {
    std::string study_id;
    std::string text;

    bool operator==(const ReportRecord&) const = default;
};

struct LabelRecord {
    std::string study_id;
    Split split = Split::Train;
    TriLabel chexpert = TriLabel::Missing;
    TriLabel negbio = TriLabel::Missing;

    bool operator==(const LabelRecord&) const = default;
};

struct LabelledStudy {
    std::string study_id;
    Split split = Split::Train;
    std::string text;
    TriLabel chexpert = TriLabel::Missing;
    TriLabel negbio = TriLabel::Missing;

    bool operator==(const LabelledStudy&) const = default;
};

// reports.jsonl: {"study_id": "...", "text": "..."} per line. Blank lines are skipped.
std::vector<ReportRecord> parse_reports(std::istream& in);
std::vector<ReportRecord> load_reports(const std::filesystem::path& path);
void write_reports(std::ostream& out, const std::vector<LabelledStudy>& studies);

// labels.csv with header exactly study_id,split,chexpert,negbio.
std::vector<LabelRecord> parse_labels(std::istream& in);
std::vector<LabelRecord> load_labels(const std::filesystem::path& path);
void write_labels(std::ostream& out, const std::vector<LabelledStudy>& studies);

struct JoinResult {
    std::vector<LabelledStudy> studies;
    std::size_t reports_without_labels = 0;
    std::size_t labels_without_reports = 0;
    std::size_t missing_label = 0;
    std::size_t empty_text = 0;
};

/// Inner join on study_id in report order. Studies with a Missing verdict from
/// either labeller, or with blank text, are counted and dropped.
JoinResult join_and_filter(const std::vector<ReportRecord>& reports,
                           const std::vector<LabelRecord>& labels);

struct Partition {
    std::vector<LabelledStudy> train;
    std::vector<LabelledStudy> validation;
    std::vector<LabelledStudy> test;
};

Partition partition(const std::vector<LabelledStudy>& studies);

enum class Scenario {
    CertainPositive,
    CertainNegative,
    ExplicitUncertain,
    BorderlineDisagreement,
    RandomNoise,
};
inline constexpr std::size_t kScenarioCount = 5;

std::string_view to_string(Scenario scenario);
Scenario parse_scenario(std::string_view name);

/// Scenario fractions; always sums to 1 within 1e-9.
class ScenarioMix {
public:
    /// Throws ValidationError on negative entries or a sum away from 1.
    static ScenarioMix from_fractions(const std::array<double, kScenarioCount>& fractions);
    static ScenarioMix only(Scenario scenario);

    double fraction(Scenario scenario) const {
        return m_fractions[static_cast<std::size_t>(scenario)];
    }
    const std::array<double, kScenarioCount>& fractions() const { return m_fractions; }

    /// Maps a uniform draw in [0,1) to a scenario by cumulative fraction.
    Scenario pick(double u) const;

    bool operator==(const ScenarioMix&) const = default;

private:
    explicit ScenarioMix(const std::array<double, kScenarioCount>& f) : m_fractions(f) {}
    std::array<double, kScenarioCount> m_fractions{};
};

struct SplitFractions {
    double train = 0.8;
    double validation = 0.1;
    double test = 0.1;

    bool operator==(const SplitFractions&) const = default;
};

struct SyntheticSpec {
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    ScenarioMix mix = ScenarioMix::only(Scenario::CertainPositive);
    SplitFractions splits{};
};

// Generator config JSON: {"n", "seed", "mix": {scenario: fraction}, "split_fractions"}.
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SyntheticSpec& spec);

/// Deterministic in (n, mix, seed, splits). Each study draws from its own
/// stream keyed by (seed, index), so studies can be generated in any order.
std::vector<LabelledStudy> generate_synthetic(const SyntheticSpec& spec);

/// Single-study generator exposed for order-independence checks.
LabelledStudy generate_study(const SyntheticSpec& spec, std::size_t index);

/// Version tag of the embedded template vocabulary.
int synthetic_template_version();

} // namespace hesitant
