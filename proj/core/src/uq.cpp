#include "hesitant/uq.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "hesitant/error.hpp"
#include "hesitant/io.hpp"
#include "hesitant/parallel.hpp"
#include "hesitant/rng.hpp"
#include "hesitant/stats.hpp"

namespace hesitant {

std::string_view to_string(SampleSource source) {
    switch (source) {
        case SampleSource::McDropout: return "mc_dropout";
        case SampleSource::DeepEnsemble: return "deep_ensemble";
        case SampleSource::External: return "external";
    }
    return "external";
}

SampleMatrix::SampleMatrix(std::vector<std::string> study_ids, std::size_t samples_per_study,
                           std::vector<double> values, SampleSource source)
    : m_ids(std::move(study_ids)), m_t(samples_per_study), m_values(std::move(values)), m_source(source) {
    if (m_t < 2) throw ValidationError("a sample matrix needs at least 2 samples per study");
    if (m_values.size() != m_ids.size() * m_t) throw ValidationError("sample matrix shape mismatch");
    for (double v : m_values) {
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("sample outside [0,1]: " + io::format_real(v));
    }
}

SampleMatrix mc_dropout_predict(const MlpParams& params, std::span<const FeatureVector> xs,
                                std::vector<std::string> study_ids, std::size_t passes, std::uint64_t seed) {
    if (passes < 2) throw ValidationError("MC dropout needs T >= 2 passes");
    if (study_ids.size() != xs.size()) throw ValidationError("study id / feature count mismatch");
    params.check_finite();
    std::vector<double> values(xs.size() * passes);
    parallel_for(xs.size(), [&](std::size_t i) {
        for (std::size_t t = 0; t < passes; ++t) {
            const StochasticDropout mode{derive_key({seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(t)})};
            values[i * passes + t] = forward(params, xs[i], mode);
        }
    });
    return SampleMatrix(std::move(study_ids), passes, std::move(values), SampleSource::McDropout);
}

std::vector<MlpParams> ensemble_train_with_seeds(const BinaryDataset& data, const Arch& arch, const TrainConfig& config,
                                                 std::span<const std::uint64_t> seeds) {
    if (seeds.size() < 2) throw ValidationError("an ensemble needs M >= 2 members");
    std::vector<MlpParams> members(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) {
        TrainConfig member_config = config;
        member_config.seed = seeds[i];
        members[i] = train(data, arch, member_config).params;
    });
    return members;
}

std::vector<MlpParams> ensemble_train(const BinaryDataset& data, const Arch& arch, const TrainConfig& config,
                                      std::size_t members, std::uint64_t base_seed) {
    if (members < 2) throw ValidationError("an ensemble needs M >= 2 members");
    std::vector<std::uint64_t> seeds(members);
    for (std::size_t i = 0; i < members; ++i) seeds[i] = base_seed + i;
    return ensemble_train_with_seeds(data, arch, config, seeds);
}

SampleMatrix ensemble_predict(std::span<const MlpParams> models, std::span<const FeatureVector> xs,
                              std::vector<std::string> study_ids) {
    if (models.size() < 2) throw ValidationError("ensemble prediction needs at least 2 models");
    if (study_ids.size() != xs.size()) throw ValidationError("study id / feature count mismatch");
    for (const auto& m : models) m.check_finite();
    const std::size_t m_count = models.size();
    std::vector<double> values(xs.size() * m_count);
    parallel_for(xs.size(), [&](std::size_t i) {
        for (std::size_t j = 0; j < m_count; ++j) values[i * m_count + j] = forward(models[j], xs[i], Deterministic{});
    });
    return SampleMatrix(std::move(study_ids), m_count, std::move(values), SampleSource::DeepEnsemble);
}

double predictive_entropy(double p_hat) {
    if (!(p_hat >= 0.0 && p_hat <= 1.0)) throw ValidationError("predictive entropy needs p in [0,1]");
    auto term = [](double p) { return p > 0.0 ? -p * std::log(p) : 0.0; };
    return term(p_hat) + term(1.0 - p_hat);
}

std::vector<UncertaintySummary> summarize(const SampleMatrix& matrix, double threshold) {
    std::vector<UncertaintySummary> out;
    out.reserve(matrix.studies());
    for (std::size_t i = 0; i < matrix.studies(); ++i) {
        const auto row = matrix.row(i);
        UncertaintySummary s;
        s.study_id = matrix.study_ids()[i];
        const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
        const bool constant = *lo == *hi;
        // Rounding in the running sum must not move the mean outside the row's range.
        s.mean_prob = constant ? *lo : std::clamp(mean(row), *lo, *hi);
        s.psd = constant ? 0.0 : sample_sd(row);
        s.pe = predictive_entropy(s.mean_prob);
        s.predicted_label = decide(s.mean_prob, threshold);
        out.push_back(std::move(s));
    }
    return out;
}

std::string_view to_string(IndicatorField field) {
    switch (field) {
        case IndicatorField::Tld: return "tld";
        case IndicatorField::ChexUncertain: return "chex_uncertain";
        case IndicatorField::NegUncertain: return "neg_uncertain";
    }
    return "tld";
}

int indicator_value(const UncertaintyIndicator& indicator, IndicatorField field) {
    switch (field) {
        case IndicatorField::Tld: return indicator.tld;
        case IndicatorField::ChexUncertain: return indicator.chex_uncertain;
        case IndicatorField::NegUncertain: return indicator.neg_uncertain;
    }
    return 0;
}

GroupMeans group_means(std::span<const UncertaintySummary> summaries, std::span<const UncertaintyIndicator> indicators,
                       IndicatorField field) {
    if (summaries.size() != indicators.size()) throw ValidationError("summaries and indicators differ in length");
    struct Acc {
        double pe = 0.0;
        double psd = 0.0;
        std::size_t n = 0;
        std::optional<GroupMean> finish() const {
            if (n == 0) return std::nullopt;
            return GroupMean{pe / static_cast<double>(n), psd / static_cast<double>(n), n};
        }
    } flagged, unflagged, overall;
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        if (summaries[i].study_id != indicators[i].study_id) {
            throw ValidationError("key mismatch at row " + std::to_string(i) + ": '" + summaries[i].study_id +
                                  "' vs '" + indicators[i].study_id + "'");
        }
        Acc& group = indicator_value(indicators[i], field) == 1 ? flagged : unflagged;
        for (Acc* acc : {&group, &overall}) {
            acc->pe += summaries[i].pe;
            acc->psd += summaries[i].psd;
            acc->n += 1;
        }
    }
    return {flagged.finish(), unflagged.finish(), overall.finish()};
}

void write_predictions(std::ostream& out, const SampleMatrix& matrix) {
    out << "study_id";
    for (std::size_t t = 0; t < matrix.samples_per_study(); ++t) out << ",s" << t;
    out << '\n';
    for (std::size_t i = 0; i < matrix.studies(); ++i) {
        out << io::csv_field(matrix.study_ids()[i]);
        for (double v : matrix.row(i)) out << ',' << io::format_real(v);
        out << '\n';
    }
}

SampleMatrix parse_predictions(std::istream& in, std::optional<std::size_t> expected_samples, SampleSource source) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "empty predictions file");
    const auto header = io::split_csv_row(line);
    if (header.empty() || io::trim(header[0]) != "study_id") throw ParseError(1, "first column must be study_id");
    const std::size_t samples = header.size() - 1;
    for (std::size_t t = 0; t < samples; ++t) {
        if (io::trim(header[t + 1]) != "s" + std::to_string(t)) {
            throw ParseError(1, "expected column s" + std::to_string(t));
        }
    }
    if (expected_samples && samples != *expected_samples) {
        throw ValidationError("predictions file has " + std::to_string(samples) + " sample columns, expected " +
                              std::to_string(*expected_samples));
    }
    std::vector<std::string> ids;
    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (io::trim(line).empty()) continue;
        const auto cells = io::split_csv_row(line);
        if (cells.size() != samples + 1) throw ParseError(line_no, "expected " + std::to_string(samples + 1) + " cells");
        ids.emplace_back(io::trim(cells[0]));
        for (std::size_t t = 0; t < samples; ++t) {
            const double v = io::parse_real(cells[t + 1], line_no);
            if (v < 0.0 || v > 1.0) throw ParseError(line_no, "probability outside [0,1]");
            values.push_back(v);
        }
    }
    return SampleMatrix(std::move(ids), samples, std::move(values), source);
}

SampleMatrix load_predictions(const std::filesystem::path& path, std::optional<std::size_t> expected_samples,
                              SampleSource source) {
    auto in = io::open_input(path);
    return parse_predictions(in, expected_samples, source);
}

void write_summaries(std::ostream& out, std::span<const UncertaintySummary> summaries) {
    out << "study_id,mean_prob,psd,pe,predicted_label\n";
    for (const auto& s : summaries) {
        out << io::csv_field(s.study_id) << ',' << io::format_real(s.mean_prob) << ',' << io::format_real(s.psd) << ','
            << io::format_real(s.pe) << ',' << (s.predicted_label == BinaryLabel::Positive ? 1 : 0) << '\n';
    }
}

std::vector<UncertaintySummary> parse_summaries(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "empty summaries file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "study_id,mean_prob,psd,pe,predicted_label") throw ParseError(1, "unexpected summaries header");
    std::vector<UncertaintySummary> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (io::trim(line).empty()) continue;
        const auto cells = io::split_csv_row(line);
        if (cells.size() != 5) throw ParseError(line_no, "expected 5 cells");
        UncertaintySummary s;
        s.study_id = std::string(io::trim(cells[0]));
        s.mean_prob = io::parse_real(cells[1], line_no);
        s.psd = io::parse_real(cells[2], line_no);
        s.pe = io::parse_real(cells[3], line_no);
        const auto label = io::trim(cells[4]);
        if (label != "0" && label != "1") throw ParseError(line_no, "predicted_label must be 0 or 1");
        s.predicted_label = label == "1" ? BinaryLabel::Positive : BinaryLabel::Negative;
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace hesitant
