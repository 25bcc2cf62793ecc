#include "hesitant/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "hesitant/error.hpp"

namespace hesitant {

std::string_view to_string(Measure measure) { return measure == Measure::PE ? "pe" : "psd"; }

std::vector<UncertaintyIndicator> align_indicators(std::span<const UncertaintySummary> summaries,
                                                   std::span<const UncertaintyIndicator> indicators) {
    std::unordered_map<std::string_view, const UncertaintyIndicator*> by_id;
    for (const auto& ind : indicators) {
        if (!by_id.emplace(ind.study_id, &ind).second) {
            throw ValidationError("duplicate study_id in indicators: '" + ind.study_id + "'");
        }
    }
    if (by_id.size() != summaries.size()) {
        throw ValidationError("key mismatch: " + std::to_string(summaries.size()) + " summaries vs " +
                              std::to_string(by_id.size()) + " indicators");
    }
    std::vector<UncertaintyIndicator> aligned;
    aligned.reserve(summaries.size());
    for (const auto& s : summaries) {
        auto it = by_id.find(s.study_id);
        if (it == by_id.end()) throw ValidationError("key mismatch: no indicators for study '" + s.study_id + "'");
        aligned.push_back(*it->second);
    }
    return aligned;
}

CorrelationTables correlate_uncertainty(std::span<const SourceSummaries> sources,
                                        std::span<const UncertaintyIndicator> indicators) {
    CorrelationTables tables;
    tables.pe.measure = Measure::PE;
    tables.psd.measure = Measure::PSD;
    for (const auto& source : sources) {
        const auto aligned = align_indicators(source.summaries, indicators);
        std::vector<double> pe;
        std::vector<double> psd;
        for (const auto& s : source.summaries) {
            pe.push_back(s.pe);
            psd.push_back(s.psd);
        }
        CorrelationRow pe_row{source.source, {}};
        CorrelationRow psd_row{source.source, {}};
        for (std::size_t c = 0; c < kIndicatorColumns.size(); ++c) {
            std::vector<int> x;
            x.reserve(aligned.size());
            for (const auto& ind : aligned) x.push_back(indicator_value(ind, kIndicatorColumns[c]));
            auto cell = [&](const std::vector<double>& y) -> std::optional<CorrelationResult> {
                try {
                    return point_biserial(y, x);
                } catch (const UndefinedCorrelation&) {
                    return std::nullopt;
                }
            };
            pe_row.cells[c] = cell(pe);
            psd_row.cells[c] = cell(psd);
        }
        tables.pe.rows.push_back(std::move(pe_row));
        tables.psd.rows.push_back(std::move(psd_row));
    }
    return tables;
}

OodResult ood_eval(std::span<const BinaryLabel> predicted, std::span<const BinaryLabel> in_distribution_labels,
                   std::span<const BinaryLabel> ood_labels) {
    OodResult r;
    r.in_distribution = classification_metrics(predicted, in_distribution_labels);
    r.out_of_distribution = classification_metrics(predicted, ood_labels);
    auto diff = [](std::optional<double> a, std::optional<double> b) -> std::optional<double> {
        if (!a || !b) return std::nullopt;
        return *a - *b;
    };
    r.delta.accuracy = r.in_distribution.accuracy - r.out_of_distribution.accuracy;
    r.delta.precision = diff(r.in_distribution.precision, r.out_of_distribution.precision);
    r.delta.recall = diff(r.in_distribution.recall, r.out_of_distribution.recall);
    r.delta.f1 = diff(r.in_distribution.f1, r.out_of_distribution.f1);
    return r;
}

std::string excerpt(std::string_view text, std::size_t limit) {
    if (text.size() <= limit) return std::string(text);
    std::size_t cut = limit;
    // Back off continuation bytes (10xxxxxx) so a code point is never split.
    while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0u) == 0x80u) --cut;
    return std::string(text.substr(0, cut));
}

std::vector<ErrorCase> mine_errors(std::span<const UncertaintySummary> summaries,
                                   std::span<const UncertaintyIndicator> indicators, double tau,
                                   std::span<const LabelledStudy> studies) {
    if (!(tau > 0.0 && tau < 0.5)) throw ValidationError("tau must be in (0, 0.5)");
    const auto aligned = align_indicators(summaries, indicators);
    std::unordered_map<std::string_view, std::string_view> texts;
    for (const auto& s : studies) texts.emplace(s.study_id, s.text);

    std::vector<ErrorCase> out;
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        const auto& s = summaries[i];
        if (aligned[i].tld != 1 || !(std::abs(s.mean_prob - 0.5) > tau)) continue;
        ErrorCase e{s.study_id, s.mean_prob, 1, {}};
        if (auto it = texts.find(s.study_id); it != texts.end()) e.excerpt = excerpt(it->second);
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end(), [](const ErrorCase& a, const ErrorCase& b) {
        const double ca = std::abs(a.mean_prob - 0.5);
        const double cb = std::abs(b.mean_prob - 0.5);
        if (ca != cb) return ca > cb;
        return a.study_id < b.study_id;
    });
    return out;
}

} // namespace hesitant
