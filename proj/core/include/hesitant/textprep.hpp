#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace hesitant {

struct PrepConfig {
    bool strip_headers = true;
    bool lowercase = true;
    bool remove_stopwords = true;
    bool stem = false;
    std::set<std::string, std::less<>> negation_keep_list{"no", "not", "without", "cannot", "nor"};
    /// Literal header lines. Empty means the embedded default list.
    std::vector<std::string> header_patterns;
};

PrepConfig prep_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PrepConfig& config);

/// Embedded English stopword list (before the keep-list is applied).
const std::set<std::string, std::less<>>& default_stopwords();
const std::vector<std::string>& default_header_patterns();

/// Header removal, lowercasing, alphanumeric tokenization, stopword removal
/// with negation exemptions, then optional stemming, in that order.
std::vector<std::string> preprocess(std::string_view text, const PrepConfig& config);

/// One pass of the original Porter (1980) suffix-stripping algorithm.
std::string porter_stem(std::string_view token);

/// Porter stemming iterated to a fixed point, so stem(stem(t)) == stem(t).
std::string stem(std::string_view token);

} // namespace hesitant
