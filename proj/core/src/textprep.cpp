#include "hesitant/textprep.hpp"

#include <cctype>
#include <sstream>

#include "hesitant/embedded_data.hpp"
#include "hesitant/io.hpp"

namespace hesitant {

using nlohmann::json;

namespace {

std::vector<std::string> data_lines(std::string_view content) {
    std::vector<std::string> out;
    std::istringstream in{std::string(content)};
    std::string line;
    while (std::getline(in, line)) {
        const auto trimmed = io::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        out.emplace_back(trimmed);
    }
    return out;
}

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

} // namespace

const std::set<std::string, std::less<>>& default_stopwords() {
    static const std::set<std::string, std::less<>> words = [] {
        auto lines = data_lines(embedded::kStopwordsEn);
        return std::set<std::string, std::less<>>(lines.begin(), lines.end());
    }();
    return words;
}

const std::vector<std::string>& default_header_patterns() {
    static const std::vector<std::string> patterns = data_lines(embedded::kHeaderPatterns);
    return patterns;
}

PrepConfig prep_config_from_json(const json& j) {
    PrepConfig c;
    c.strip_headers = j.value("strip_headers", c.strip_headers);
    c.lowercase = j.value("lowercase", c.lowercase);
    c.remove_stopwords = j.value("remove_stopwords", c.remove_stopwords);
    c.stem = j.value("stem", c.stem);
    if (auto it = j.find("negation_keep_list"); it != j.end()) {
        c.negation_keep_list.clear();
        for (const auto& token : *it) c.negation_keep_list.insert(token.get<std::string>());
    }
    if (auto it = j.find("header_patterns"); it != j.end()) {
        c.header_patterns = it->get<std::vector<std::string>>();
    }
    return c;
}

json to_json(const PrepConfig& c) {
    return {{"strip_headers", c.strip_headers},
            {"lowercase", c.lowercase},
            {"remove_stopwords", c.remove_stopwords},
            {"stem", c.stem},
            {"negation_keep_list", std::vector<std::string>(c.negation_keep_list.begin(), c.negation_keep_list.end())},
            {"header_patterns", c.header_patterns}};
}

std::vector<std::string> preprocess(std::string_view text, const PrepConfig& config) {
    const auto& patterns = config.header_patterns.empty() ? default_header_patterns() : config.header_patterns;

    std::string body;
    body.reserve(text.size());
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (config.strip_headers) {
            const auto trimmed = io::trim(line);
            bool drop = false;
            for (const auto& p : patterns) {
                if (trimmed == p) {
                    drop = true;
                    break;
                }
                if (!p.empty() && p.back() == ':' && trimmed.starts_with(p)) {
                    line = trimmed.substr(p.size());
                    break;
                }
            }
            if (drop) line = {};
        }
        body.append(line);
        body.push_back('\n');
        start = end + 1;
    }

    if (config.lowercase) {
        for (char& c : body) {
            if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }

    const auto& stopwords = default_stopwords();
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < body.size()) {
        while (i < body.size() && !is_word_byte(static_cast<unsigned char>(body[i]))) ++i;
        const std::size_t begin = i;
        while (i < body.size() && is_word_byte(static_cast<unsigned char>(body[i]))) ++i;
        if (begin == i) continue;
        std::string token = body.substr(begin, i - begin);
        if (config.remove_stopwords && !config.negation_keep_list.contains(token) && stopwords.contains(token)) {
            continue;
        }
        if (config.stem) token = stem(token);
        tokens.push_back(std::move(token));
    }
    return tokens;
}

// ---------------------------------------------------------------------------
// Porter stemmer, following the published 1980 rule tables.

namespace {

class PorterWord {
public:
    explicit PorterWord(std::string_view w) : b(w) {}

    std::string b;

    bool consonant(std::size_t i) const {
        switch (b[i]) {
            case 'a': case 'e': case 'i': case 'o': case 'u': return false;
            case 'y': return i == 0 ? true : !consonant(i - 1);
            default: return true;
        }
    }

    // m() of the prefix b[0, len): number of VC sequences.
    int measure(std::size_t len) const {
        int n = 0;
        std::size_t i = 0;
        while (i < len && consonant(i)) ++i;
        while (i < len) {
            while (i < len && !consonant(i)) ++i;
            if (i >= len) break;
            while (i < len && consonant(i)) ++i;
            ++n;
        }
        return n;
    }

    bool has_vowel(std::size_t len) const {
        for (std::size_t i = 0; i < len; ++i) {
            if (!consonant(i)) return true;
        }
        return false;
    }

    bool double_consonant(std::size_t len) const {
        return len >= 2 && b[len - 1] == b[len - 2] && consonant(len - 1);
    }

    // *o: stem ends cvc where the final c is not w, x or y.
    bool cvc(std::size_t len) const {
        if (len < 3 || !consonant(len - 1) || consonant(len - 2) || !consonant(len - 3)) return false;
        const char c = b[len - 1];
        return c != 'w' && c != 'x' && c != 'y';
    }

    bool ends(std::string_view suffix) const { return std::string_view(b).ends_with(suffix); }

    std::size_t stem_len(std::string_view suffix) const { return b.size() - suffix.size(); }

    void replace(std::string_view suffix, std::string_view with) {
        b.erase(b.size() - suffix.size());
        b.append(with);
    }

    // Replaces suffix when m(stem) > min_measure. Returns true if the suffix matched.
    bool rule(std::string_view suffix, std::string_view with, int min_measure) {
        if (!ends(suffix)) return false;
        if (measure(stem_len(suffix)) > min_measure) replace(suffix, with);
        return true;
    }
};

void step1a(PorterWord& w) {
    if (w.ends("sses")) w.replace("sses", "ss");
    else if (w.ends("ies")) w.replace("ies", "i");
    else if (w.ends("ss")) {}
    else if (w.ends("s")) w.replace("s", "");
}

void step1b(PorterWord& w) {
    if (w.ends("eed")) {
        if (w.measure(w.stem_len("eed")) > 0) w.replace("eed", "ee");
        return;
    }
    bool stripped = false;
    for (std::string_view suffix : {"ed", "ing"}) {
        if (w.ends(suffix) && w.has_vowel(w.stem_len(suffix))) {
            w.replace(suffix, "");
            stripped = true;
            break;
        }
    }
    if (!stripped) return;
    if (w.ends("at")) w.replace("at", "ate");
    else if (w.ends("bl")) w.replace("bl", "ble");
    else if (w.ends("iz")) w.replace("iz", "ize");
    else if (w.double_consonant(w.b.size())) {
        const char last = w.b.back();
        if (last != 'l' && last != 's' && last != 'z') w.b.pop_back();
    } else if (w.measure(w.b.size()) == 1 && w.cvc(w.b.size())) {
        w.b.push_back('e');
    }
}

void step1c(PorterWord& w) {
    if (w.ends("y") && w.has_vowel(w.b.size() - 1)) w.b.back() = 'i';
}

void step2(PorterWord& w) {
    static constexpr std::pair<std::string_view, std::string_view> rules[] = {
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"}, {"anci", "ance"},
        {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},   {"entli", "ent"},
        {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"}, {"biliti", "ble"},
    };
    for (const auto& [suffix, with] : rules) {
        if (w.rule(suffix, with, 0)) return;
    }
}

void step3(PorterWord& w) {
    static constexpr std::pair<std::string_view, std::string_view> rules[] = {
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""},
    };
    for (const auto& [suffix, with] : rules) {
        if (w.rule(suffix, with, 0)) return;
    }
}

void step4(PorterWord& w) {
    static constexpr std::string_view suffixes[] = {
        "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment",
        "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
    };
    // Longest match wins; "ement" must be tried before "ment" and "ent".
    std::string_view match;
    for (std::string_view s : suffixes) {
        if (w.ends(s) && s.size() > match.size()) match = s;
    }
    if (match.empty()) return;
    const std::size_t len = w.stem_len(match);
    if (w.measure(len) <= 1) return;
    if (match == "ion" && !(len > 0 && (w.b[len - 1] == 's' || w.b[len - 1] == 't'))) return;
    w.replace(match, "");
}

void step5(PorterWord& w) {
    if (w.ends("e")) {
        const std::size_t len = w.b.size() - 1;
        const int m = w.measure(len);
        if (m > 1 || (m == 1 && !w.cvc(len))) w.b.pop_back();
    }
    if (w.measure(w.b.size()) > 1 && w.double_consonant(w.b.size()) && w.b.back() == 'l') w.b.pop_back();
}

} // namespace

std::string porter_stem(std::string_view token) {
    if (token.size() <= 2) return std::string(token);
    PorterWord w(token);
    step1a(w);
    step1b(w);
    step1c(w);
    step2(w);
    step3(w);
    step4(w);
    step5(w);
    return w.b;
}

std::string stem(std::string_view token) {
    std::string current(token);
    // Each productive pass shortens the word or rewrites a suffix; 8 passes
    // is far beyond the longest observed chain.
    for (int pass = 0; pass < 8; ++pass) {
        std::string next = porter_stem(current);
        if (next == current) break;
        current = std::move(next);
    }
    return current;
}

} // namespace hesitant
