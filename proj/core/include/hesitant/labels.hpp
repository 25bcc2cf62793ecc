#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hesitant/corpus.hpp"

namespace hesitant {

enum class BinaryLabel { Negative = 0, Positive = 1 };

constexpr double as_real(BinaryLabel label) noexcept { return label == BinaryLabel::Positive ? 1.0 : 0.0; }
std::string_view to_string(BinaryLabel label);

/// How an Uncertain verdict becomes binary.
class Strategy {
public:
    enum class Kind { UOnes, UZeros, URandom };

    static constexpr Strategy ones() { return Strategy(Kind::UOnes, 0); }
    static constexpr Strategy zeros() { return Strategy(Kind::UZeros, 0); }
    static constexpr Strategy random(std::uint64_t seed) { return Strategy(Kind::URandom, seed); }

    constexpr Kind kind() const { return m_kind; }
    constexpr std::uint64_t seed() const { return m_seed; }

    bool operator==(const Strategy&) const = default;

private:
    constexpr Strategy(Kind kind, std::uint64_t seed) : m_kind(kind), m_seed(seed) {}
    Kind m_kind;
    std::uint64_t m_seed;
};

std::string_view to_string(Strategy::Kind kind);
Strategy strategy_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Strategy& strategy);

/// Labeller column ids used as URandom stream ids.
inline constexpr std::uint64_t kChexpertStream = 0;
inline constexpr std::uint64_t kNegbioStream = 1;

/// Binarises one label at position `index` of stream `stream_id`. Throws
/// ValidationError on Missing.
BinaryLabel binarise_one(TriLabel label, const Strategy& strategy, std::uint64_t stream_id, std::uint64_t index);

std::vector<BinaryLabel> binarise(std::span<const TriLabel> labels, const Strategy& strategy, std::uint64_t stream_id);

struct UncertaintyIndicator {
    std::string study_id;
    int tld = 0;
    int chex_uncertain = 0;
    int neg_uncertain = 0;

    bool operator==(const UncertaintyIndicator&) const = default;
};

/// Study i uses URandom index i in both labeller streams.
std::vector<UncertaintyIndicator> compute_indicators(std::span<const LabelledStudy> studies, const Strategy& strategy);

// indicators.csv: study_id,tld,chex_uncertain,neg_uncertain
void write_indicators(std::ostream& out, std::span<const UncertaintyIndicator> indicators);
std::vector<UncertaintyIndicator> parse_indicators(std::istream& in);
std::vector<UncertaintyIndicator> load_indicators(const std::filesystem::path& path);

} // namespace hesitant
