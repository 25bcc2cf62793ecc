#include "hesitant/labels.hpp"

#include <istream>
#include <ostream>

#include "hesitant/error.hpp"
#include "hesitant/io.hpp"
#include "hesitant/rng.hpp"

namespace hesitant {

using nlohmann::json;

std::string_view to_string(BinaryLabel label) {
    return label == BinaryLabel::Positive ? "positive" : "negative";
}

std::string_view to_string(Strategy::Kind kind) {
    switch (kind) {
        case Strategy::Kind::UOnes: return "u_ones";
        case Strategy::Kind::UZeros: return "u_zeros";
        case Strategy::Kind::URandom: return "u_random";
    }
    return "u_random";
}

Strategy strategy_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "u_ones") return Strategy::ones();
    if (kind == "u_zeros") return Strategy::zeros();
    if (kind == "u_random") return Strategy::random(j.at("seed").get<std::uint64_t>());
    throw ValidationError("unknown binarisation strategy '" + kind + "'");
}

json to_json(const Strategy& strategy) {
    json j = {{"kind", to_string(strategy.kind())}};
    if (strategy.kind() == Strategy::Kind::URandom) j["seed"] = strategy.seed();
    return j;
}

BinaryLabel binarise_one(TriLabel label, const Strategy& strategy, std::uint64_t stream_id, std::uint64_t index) {
    switch (label) {
        case TriLabel::Positive: return BinaryLabel::Positive;
        case TriLabel::Negative: return BinaryLabel::Negative;
        case TriLabel::Missing: throw ValidationError("cannot binarise a Missing label");
        case TriLabel::Uncertain: break;
    }
    switch (strategy.kind()) {
        case Strategy::Kind::UOnes: return BinaryLabel::Positive;
        case Strategy::Kind::UZeros: return BinaryLabel::Negative;
        case Strategy::Kind::URandom: {
            const double u = counter_uniform(derive_key({strategy.seed(), stream_id}), index);
            return u < 0.5 ? BinaryLabel::Positive : BinaryLabel::Negative;
        }
    }
    return BinaryLabel::Negative;
}

std::vector<BinaryLabel> binarise(std::span<const TriLabel> labels, const Strategy& strategy, std::uint64_t stream_id) {
    std::vector<BinaryLabel> out;
    out.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out.push_back(binarise_one(labels[i], strategy, stream_id, i));
    return out;
}

std::vector<UncertaintyIndicator> compute_indicators(std::span<const LabelledStudy> studies, const Strategy& strategy) {
    std::vector<UncertaintyIndicator> out;
    out.reserve(studies.size());
    for (std::size_t i = 0; i < studies.size(); ++i) {
        const auto& s = studies[i];
        const auto chex = binarise_one(s.chexpert, strategy, kChexpertStream, i);
        const auto neg = binarise_one(s.negbio, strategy, kNegbioStream, i);
        out.push_back({s.study_id, chex != neg ? 1 : 0, s.chexpert == TriLabel::Uncertain ? 1 : 0,
                       s.negbio == TriLabel::Uncertain ? 1 : 0});
    }
    return out;
}

void write_indicators(std::ostream& out, std::span<const UncertaintyIndicator> indicators) {
    out << "study_id,tld,chex_uncertain,neg_uncertain\n";
    for (const auto& ind : indicators) {
        out << io::csv_field(ind.study_id) << ',' << ind.tld << ',' << ind.chex_uncertain << ',' << ind.neg_uncertain
            << '\n';
    }
}

std::vector<UncertaintyIndicator> parse_indicators(std::istream& in) {
    std::vector<UncertaintyIndicator> out;
    std::string line;
    std::size_t line_no = 0;
    auto flag = [&](const std::string& cell) {
        const auto t = io::trim(cell);
        if (t == "0") return 0;
        if (t == "1") return 1;
        throw ParseError(line_no, "indicator must be 0 or 1, found '" + std::string(t) + "'");
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line != "study_id,tld,chex_uncertain,neg_uncertain") {
                throw ParseError(line_no, "expected header 'study_id,tld,chex_uncertain,neg_uncertain'");
            }
            continue;
        }
        if (io::trim(line).empty()) continue;
        const auto cells = io::split_csv_row(line);
        if (cells.size() != 4) throw ParseError(line_no, "expected 4 cells");
        out.push_back({std::string(io::trim(cells[0])), flag(cells[1]), flag(cells[2]), flag(cells[3])});
    }
    if (line_no == 0) throw ParseError(1, "empty indicators file");
    return out;
}

std::vector<UncertaintyIndicator> load_indicators(const std::filesystem::path& path) {
    auto in = io::open_input(path);
    return parse_indicators(in);
}

} // namespace hesitant
