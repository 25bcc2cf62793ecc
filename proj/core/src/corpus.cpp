#include "hesitant/corpus.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "hesitant/error.hpp"
#include "hesitant/io.hpp"

namespace hesitant {

using nlohmann::json;

std::string_view to_string(TriLabel label) {
    switch (label) {
        case TriLabel::Positive: return "positive";
        case TriLabel::Negative: return "negative";
        case TriLabel::Uncertain: return "uncertain";
        case TriLabel::Missing: return "missing";
    }
    return "missing";
}

std::string_view to_string(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Validation: return "validation";
        case Split::Test: return "test";
    }
    return "train";
}

TriLabel parse_label_code(std::string_view cell) {
    cell = io::trim(cell);
    if (cell.empty()) return TriLabel::Missing;
    double code = 0.0;
    try {
        code = io::parse_real(cell, 0);
    } catch (const ParseError&) {
        throw ValidationError("unknown label code '" + std::string(cell) + "'");
    }
    if (code == 1.0) return TriLabel::Positive;
    if (code == 0.0) return TriLabel::Negative;
    if (code == -1.0) return TriLabel::Uncertain;
    throw ValidationError("unknown label code '" + std::string(cell) + "'");
}

std::string label_code(TriLabel label) {
    switch (label) {
        case TriLabel::Positive: return "1.0";
        case TriLabel::Negative: return "0.0";
        case TriLabel::Uncertain: return "-1.0";
        case TriLabel::Missing: return "";
    }
    return "";
}

Split parse_split(std::string_view cell) {
    cell = io::trim(cell);
    if (cell == "train") return Split::Train;
    if (cell == "validate") return Split::Validation;
    if (cell == "test") return Split::Test;
    throw ValidationError("unknown split '" + std::string(cell) + "'");
}

std::string_view split_code(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Validation: return "validate";
        case Split::Test: return "test";
    }
    return "train";
}

std::vector<ReportRecord> parse_reports(std::istream& in) {
    std::vector<ReportRecord> records;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (io::trim(line).empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
        }
        if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");
        for (const char* field : {"study_id", "text"}) {
            auto it = obj.find(field);
            if (it == obj.end() || !it->is_string()) {
                throw ParseError(line_no, std::string("missing string field '") + field + "'");
            }
        }
        ReportRecord record{obj["study_id"].get<std::string>(), obj["text"].get<std::string>()};
        if (!seen.insert(record.study_id).second) {
            throw ValidationError("line " + std::to_string(line_no) + ": duplicate study_id '" +
                                  record.study_id + "'");
        }
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<ReportRecord> load_reports(const std::filesystem::path& path) {
    auto in = io::open_input(path);
    return parse_reports(in);
}

void write_reports(std::ostream& out, const std::vector<LabelledStudy>& studies) {
    for (const auto& s : studies) {
        json obj = {{"study_id", s.study_id}, {"text", s.text}};
        out << obj.dump() << '\n';
    }
}

std::vector<LabelRecord> parse_labels(std::istream& in) {
    std::vector<LabelRecord> records;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!have_header) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line != "study_id,split,chexpert,negbio") {
                throw ParseError(line_no, "expected header 'study_id,split,chexpert,negbio'");
            }
            have_header = true;
            continue;
        }
        if (io::trim(line).empty()) continue;
        auto cells = io::split_csv_row(line);
        if (cells.size() != 4) {
            throw ParseError(line_no, "expected 4 cells, found " + std::to_string(cells.size()));
        }
        LabelRecord record;
        record.study_id = std::string(io::trim(cells[0]));
        try {
            record.split = parse_split(cells[1]);
            record.chexpert = parse_label_code(cells[2]);
            record.negbio = parse_label_code(cells[3]);
        } catch (const ValidationError& e) {
            throw ParseError(line_no, e.what());
        }
        if (!seen.insert(record.study_id).second) {
            throw ValidationError("line " + std::to_string(line_no) + ": duplicate study_id '" +
                                  record.study_id + "'");
        }
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<LabelRecord> load_labels(const std::filesystem::path& path) {
    auto in = io::open_input(path);
    return parse_labels(in);
}

void write_labels(std::ostream& out, const std::vector<LabelledStudy>& studies) {
    out << "study_id,split,chexpert,negbio\n";
    for (const auto& s : studies) {
        out << io::csv_field(s.study_id) << ',' << split_code(s.split) << ',' << label_code(s.chexpert)
            << ',' << label_code(s.negbio) << '\n';
    }
}

JoinResult join_and_filter(const std::vector<ReportRecord>& reports,
                           const std::vector<LabelRecord>& labels) {
    std::unordered_map<std::string_view, const LabelRecord*> by_id;
    by_id.reserve(labels.size());
    for (const auto& l : labels) by_id.emplace(l.study_id, &l);

    JoinResult result;
    std::size_t matched = 0;
    for (const auto& report : reports) {
        auto it = by_id.find(report.study_id);
        if (it == by_id.end()) {
            ++result.reports_without_labels;
            continue;
        }
        ++matched;
        const LabelRecord& label = *it->second;
        if (label.chexpert == TriLabel::Missing || label.negbio == TriLabel::Missing) {
            ++result.missing_label;
            continue;
        }
        if (io::trim(report.text).empty()) {
            ++result.empty_text;
            continue;
        }
        result.studies.push_back({report.study_id, label.split, report.text, label.chexpert, label.negbio});
    }
    result.labels_without_reports = labels.size() - matched;
    return result;
}

Partition partition(const std::vector<LabelledStudy>& studies) {
    Partition p;
    for (const auto& s : studies) {
        switch (s.split) {
            case Split::Train: p.train.push_back(s); break;
            case Split::Validation: p.validation.push_back(s); break;
            case Split::Test: p.test.push_back(s); break;
        }
    }
    return p;
}

namespace {
constexpr std::array<std::string_view, kScenarioCount> kScenarioNames = {
    "CertainPositive", "CertainNegative", "ExplicitUncertain", "BorderlineDisagreement", "RandomNoise"};
}

std::string_view to_string(Scenario scenario) {
    return kScenarioNames[static_cast<std::size_t>(scenario)];
}

Scenario parse_scenario(std::string_view name) {
    for (std::size_t i = 0; i < kScenarioCount; ++i) {
        if (kScenarioNames[i] == name) return static_cast<Scenario>(i);
    }
    throw ValidationError("unknown scenario '" + std::string(name) + "'");
}

ScenarioMix ScenarioMix::from_fractions(const std::array<double, kScenarioCount>& fractions) {
    double sum = 0.0;
    for (double f : fractions) {
        if (!(f >= 0.0 && f <= 1.0)) throw ValidationError("scenario fraction outside [0,1]");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ValidationError("scenario fractions sum to " + io::format_real(sum) + ", expected 1");
    }
    return ScenarioMix(fractions);
}

ScenarioMix ScenarioMix::only(Scenario scenario) {
    std::array<double, kScenarioCount> f{};
    f[static_cast<std::size_t>(scenario)] = 1.0;
    return ScenarioMix(f);
}

Scenario ScenarioMix::pick(double u) const {
    double cumulative = 0.0;
    std::size_t last_nonzero = 0;
    for (std::size_t i = 0; i < kScenarioCount; ++i) {
        if (m_fractions[i] <= 0.0) continue;
        last_nonzero = i;
        cumulative += m_fractions[i];
        if (u < cumulative) return static_cast<Scenario>(i);
    }
    // Rounding can leave u just above the final cumulative sum.
    return static_cast<Scenario>(last_nonzero);
}

SyntheticSpec synthetic_spec_from_json(const json& j) {
    SyntheticSpec spec;
    spec.n = j.at("n").get<std::size_t>();
    spec.seed = j.value("seed", std::uint64_t{0});
    if (spec.n < 1) throw ValidationError("synthetic corpus needs n >= 1");
    std::array<double, kScenarioCount> fractions{};
    for (const auto& [name, value] : j.at("mix").items()) {
        fractions[static_cast<std::size_t>(parse_scenario(name))] = value.get<double>();
    }
    spec.mix = ScenarioMix::from_fractions(fractions);
    if (auto it = j.find("split_fractions"); it != j.end()) {
        spec.splits.train = it->value("train", 0.8);
        spec.splits.validation = it->value("validate", 0.1);
        spec.splits.test = it->value("test", 0.1);
        const double sum = spec.splits.train + spec.splits.validation + spec.splits.test;
        if (spec.splits.train < 0 || spec.splits.validation < 0 || spec.splits.test < 0 ||
            std::abs(sum - 1.0) > 1e-9) {
            throw ValidationError("split_fractions must be non-negative and sum to 1");
        }
    }
    return spec;
}

json to_json(const SyntheticSpec& spec) {
    json mix = json::object();
    for (std::size_t i = 0; i < kScenarioCount; ++i) {
        mix[std::string(kScenarioNames[i])] = spec.mix.fractions()[i];
    }
    return {{"n", spec.n},
            {"seed", spec.seed},
            {"mix", mix},
            {"split_fractions",
             {{"train", spec.splits.train}, {"validate", spec.splits.validation}, {"test", spec.splits.test}}}};
}

} // namespace hesitant
