#include <cctype>
#include <cstdio>
#include <map>

#include "hesitant/corpus.hpp"
#include "hesitant/embedded_data.hpp"
#include "hesitant/error.hpp"
#include "hesitant/rng.hpp"

namespace hesitant {

namespace {

using nlohmann::json;

struct Templates {
    int version = 0;
    std::vector<std::string> headers;
    std::vector<std::string> indications;
    std::vector<std::string> comparisons;
    std::vector<std::string> context;
    std::map<std::string, std::vector<std::string>, std::less<>> fillers;
    std::array<std::vector<std::string>, kScenarioCount> scenarios;
};

const Templates& templates() {
    static const Templates t = [] {
        const json j = json::parse(embedded::kSyntheticTemplates);
        Templates out;
        out.version = j.at("version").get<int>();
        out.headers = j.at("headers").get<std::vector<std::string>>();
        out.indications = j.at("indications").get<std::vector<std::string>>();
        out.comparisons = j.at("comparisons").get<std::vector<std::string>>();
        out.context = j.at("context").get<std::vector<std::string>>();
        for (const auto& [name, words] : j.at("fillers").items()) {
            out.fillers.emplace(name, words.get<std::vector<std::string>>());
        }
        for (const auto& [name, sentences] : j.at("scenarios").items()) {
            out.scenarios[static_cast<std::size_t>(parse_scenario(name))] =
                sentences.get<std::vector<std::string>>();
        }
        return out;
    }();
    return t;
}

const std::string& pick(const std::vector<std::string>& options, SeqRng& rng) {
    return options[static_cast<std::size_t>(rng.below(options.size()))];
}

// Replaces {slot} markers with fillers and capitalises the first letter.
std::string instantiate(const std::string& pattern, SeqRng& rng) {
    const Templates& t = templates();
    std::string out;
    std::size_t pos = 0;
    while (pos < pattern.size()) {
        const auto open = pattern.find('{', pos);
        if (open == std::string::npos) {
            out.append(pattern, pos, std::string::npos);
            break;
        }
        const auto close = pattern.find('}', open);
        out.append(pattern, pos, open - pos);
        const std::string slot = pattern.substr(open + 1, close - open - 1);
        out += pick(t.fillers.at(slot), rng);
        pos = close + 1;
    }
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

TriLabel random_verdict(SeqRng& rng) {
    switch (rng.below(3)) {
        case 0: return TriLabel::Positive;
        case 1: return TriLabel::Negative;
        default: return TriLabel::Uncertain;
    }
}

} // namespace

int synthetic_template_version() { return templates().version; }

LabelledStudy generate_study(const SyntheticSpec& spec, std::size_t index) {
    const Templates& t = templates();
    SeqRng rng(derive_key({spec.seed, static_cast<std::uint64_t>(index)}));

    const Scenario scenario = spec.mix.pick(rng.uniform());
    const double split_draw = rng.uniform();

    LabelledStudy study;
    char id[32];
    std::snprintf(id, sizeof(id), "s%06zu", index);
    study.study_id = id;
    if (split_draw < spec.splits.train) {
        study.split = Split::Train;
    } else if (split_draw < spec.splits.train + spec.splits.validation) {
        study.split = Split::Validation;
    } else {
        study.split = Split::Test;
    }

    switch (scenario) {
        case Scenario::CertainPositive:
            study.chexpert = study.negbio = TriLabel::Positive;
            break;
        case Scenario::CertainNegative:
            study.chexpert = study.negbio = TriLabel::Negative;
            break;
        case Scenario::ExplicitUncertain:
            study.chexpert = study.negbio = TriLabel::Uncertain;
            break;
        case Scenario::BorderlineDisagreement:
            study.chexpert = TriLabel::Negative;
            study.negbio = TriLabel::Uncertain;
            break;
        case Scenario::RandomNoise:
            study.chexpert = random_verdict(rng);
            study.negbio = random_verdict(rng);
            break;
    }

    const auto& finding_templates = t.scenarios[static_cast<std::size_t>(scenario)];
    const std::string finding = instantiate(pick(finding_templates, rng), rng);
    const std::string impression = instantiate(pick(finding_templates, rng), rng);

    std::vector<std::string> findings;
    const auto context_count = rng.below(3);
    for (std::uint64_t i = 0; i < context_count; ++i) findings.push_back(pick(t.context, rng));
    findings.insert(findings.begin() + static_cast<std::ptrdiff_t>(rng.below(findings.size() + 1)), finding);

    std::string text = "FINAL REPORT\n";
    text += pick(t.headers, rng) + "\n\n";
    text += pick(t.indications, rng) + "\n";
    text += pick(t.comparisons, rng) + "\n\n";
    text += "FINDINGS:";
    for (const auto& sentence : findings) text += " " + sentence;
    text += "\n\nIMPRESSION: " + impression + "\n";
    study.text = std::move(text);
    return study;
}

std::vector<LabelledStudy> generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n < 1) throw ValidationError("synthetic corpus needs n >= 1");
    std::vector<LabelledStudy> studies;
    studies.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) studies.push_back(generate_study(spec, i));
    return studies;
}

} // namespace hesitant
