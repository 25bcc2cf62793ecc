#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hesitant/corpus.hpp"
#include "hesitant/labels.hpp"
#include "hesitant/stats.hpp"
#include "hesitant/uq.hpp"

namespace hesitant {

enum class Measure { PE, PSD };
std::string_view to_string(Measure measure);

inline constexpr std::array<IndicatorField, 3> kIndicatorColumns = {
    IndicatorField::Tld, IndicatorField::ChexUncertain, IndicatorField::NegUncertain};

struct SourceSummaries {
    SampleSource source = SampleSource::External;
    std::vector<UncertaintySummary> summaries;
};

struct CorrelationRow {
    SampleSource source = SampleSource::External;
    /// Ordered as kIndicatorColumns; empty when the correlation is undefined.
    std::array<std::optional<CorrelationResult>, 3> cells;
};

struct CorrelationTable {
    Measure measure = Measure::PE;
    std::vector<CorrelationRow> rows;
};

struct CorrelationTables {
    CorrelationTable pe;
    CorrelationTable psd;
};

/// Indicators are matched to summaries by study_id; both must cover exactly
/// the same keys or ValidationError is thrown.
std::vector<UncertaintyIndicator> align_indicators(std::span<const UncertaintySummary> summaries,
                                                   std::span<const UncertaintyIndicator> indicators);

CorrelationTables correlate_uncertainty(std::span<const SourceSummaries> sources,
                                        std::span<const UncertaintyIndicator> indicators);

struct MetricDeltas {
    double accuracy = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

struct OodResult {
    ClassificationMetrics in_distribution;
    ClassificationMetrics out_of_distribution;
    MetricDeltas delta;  // in-distribution minus out-of-distribution
};

OodResult ood_eval(std::span<const BinaryLabel> predicted, std::span<const BinaryLabel> in_distribution_labels,
                   std::span<const BinaryLabel> ood_labels);

inline constexpr std::size_t kExcerptLength = 300;

struct ErrorCase {
    std::string study_id;
    double mean_prob = 0.0;
    int tld = 1;
    std::string excerpt;

    bool operator==(const ErrorCase&) const = default;
};

/// Studies with tld = 1 and |p - 0.5| > tau, most confident first, ties by
/// study_id. Excerpts come from `studies` when the id is present there.
std::vector<ErrorCase> mine_errors(std::span<const UncertaintySummary> summaries,
                                   std::span<const UncertaintyIndicator> indicators, double tau,
                                   std::span<const LabelledStudy> studies = {});

/// First `limit` bytes of text without splitting a UTF-8 sequence.
std::string excerpt(std::string_view text, std::size_t limit = kExcerptLength);

} // namespace hesitant
