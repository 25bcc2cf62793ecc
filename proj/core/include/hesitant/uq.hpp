#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hesitant/labels.hpp"
#include "hesitant/model.hpp"

namespace hesitant {

enum class SampleSource { McDropout, DeepEnsemble, External };
std::string_view to_string(SampleSource source);

/// N studies x T samples, row-major. Every entry lies in [0, 1] and T >= 2.
class SampleMatrix {
public:
    /// Throws ValidationError when any invariant fails.
    SampleMatrix(std::vector<std::string> study_ids, std::size_t samples_per_study, std::vector<double> values,
                 SampleSource source);

    std::size_t studies() const { return m_ids.size(); }
    std::size_t samples_per_study() const { return m_t; }
    SampleSource source() const { return m_source; }
    const std::vector<std::string>& study_ids() const { return m_ids; }
    std::span<const double> row(std::size_t i) const { return std::span<const double>(m_values).subspan(i * m_t, m_t); }
    std::span<const double> values() const { return m_values; }

private:
    std::vector<std::string> m_ids;
    std::size_t m_t;
    std::vector<double> m_values;
    SampleSource m_source;
};

/// T dropout-on passes per study. Pass t of study i uses mask key
/// derive_key({seed, i, t}). Throws ValidationError for T < 2.
SampleMatrix mc_dropout_predict(const MlpParams& params, std::span<const FeatureVector> xs,
                                std::vector<std::string> study_ids, std::size_t passes, std::uint64_t seed);

/// Member i trains with seeds[i]; members train concurrently.
std::vector<MlpParams> ensemble_train_with_seeds(const BinaryDataset& data, const Arch& arch, const TrainConfig& config,
                                                 std::span<const std::uint64_t> seeds);

/// Member i trains with seed base_seed + i. Throws ValidationError for M < 2.
std::vector<MlpParams> ensemble_train(const BinaryDataset& data, const Arch& arch, const TrainConfig& config,
                                      std::size_t members, std::uint64_t base_seed);

/// Column j is the dropout-off output of model j.
SampleMatrix ensemble_predict(std::span<const MlpParams> models, std::span<const FeatureVector> xs,
                              std::vector<std::string> study_ids);

/// Binary predictive entropy in nats, with 0 log 0 = 0.
double predictive_entropy(double p_hat);

struct UncertaintySummary {
    std::string study_id;
    double mean_prob = 0.0;
    double psd = 0.0;
    double pe = 0.0;
    BinaryLabel predicted_label = BinaryLabel::Negative;

    bool operator==(const UncertaintySummary&) const = default;
};

std::vector<UncertaintySummary> summarize(const SampleMatrix& matrix, double threshold = 0.5);

enum class IndicatorField { Tld, ChexUncertain, NegUncertain };
std::string_view to_string(IndicatorField field);
int indicator_value(const UncertaintyIndicator& indicator, IndicatorField field);

struct GroupMean {
    double mean_pe = 0.0;
    double mean_psd = 0.0;
    std::size_t count = 0;
};

/// Mean PE and PSD per indicator group. A group with no members is left empty.
struct GroupMeans {
    std::optional<GroupMean> flagged;    // indicator = 1 (e.g. TLD)
    std::optional<GroupMean> unflagged;  // indicator = 0 (e.g. TLA)
    std::optional<GroupMean> overall;
};

/// Throws ValidationError if the two sequences are not keyed identically.
GroupMeans group_means(std::span<const UncertaintySummary> summaries, std::span<const UncertaintyIndicator> indicators,
                       IndicatorField field = IndicatorField::Tld);

// predictions.csv: study_id,s0,...,s{T-1}
void write_predictions(std::ostream& out, const SampleMatrix& matrix);
/// With expected_samples set, a file with a different column count is
/// rejected; std::nullopt accepts every column ("all").
SampleMatrix parse_predictions(std::istream& in, std::optional<std::size_t> expected_samples = std::nullopt,
                               SampleSource source = SampleSource::External);
SampleMatrix load_predictions(const std::filesystem::path& path, std::optional<std::size_t> expected_samples = std::nullopt,
                              SampleSource source = SampleSource::External);

// summaries.csv: study_id,mean_prob,psd,pe,predicted_label
void write_summaries(std::ostream& out, std::span<const UncertaintySummary> summaries);
std::vector<UncertaintySummary> parse_summaries(std::istream& in);

} // namespace hesitant
