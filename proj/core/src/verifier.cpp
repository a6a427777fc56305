#include "deskrl/verifier.hpp"

#include <cctype>

#include <nlohmann/json.hpp>

#include "deskrl/errors.hpp"

namespace deskrl::verifier {

namespace {

constexpr std::string_view kMarker = "\\boxed{";

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Balanced-brace scan starting just past the marker's '{'. Returns the
// content span or nullopt when the braces never close.
std::optional<std::string> balanced_content(std::string_view text, std::size_t open) {
    int depth = 1;
    for (std::size_t i = open; i < text.size(); ++i) {
        if (text[i] == '{') ++depth;
        else if (text[i] == '}') {
            --depth;
            if (depth == 0) return std::string(text.substr(open, i - open));
        }
    }
    return std::nullopt;
}

// "-123", "4.50", ".5" are numerals; anything else passes through untouched.
bool is_plain_numeral(std::string_view s) {
    std::size_t i = 0;
    if (i < s.size() && s[i] == '-') ++i;
    bool any_digit = false;
    while (i < s.size() && is_digit(s[i])) { ++i; any_digit = true; }
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && is_digit(s[i])) { ++i; any_digit = true; }
    }
    return any_digit && i == s.size();
}

std::string canonicalize_numeral(std::string_view s) {
    bool negative = false;
    std::size_t i = 0;
    if (s[0] == '-') { negative = true; i = 1; }
    std::string int_part, frac_part;
    while (i < s.size() && is_digit(s[i])) int_part += s[i++];
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size()) frac_part += s[i++];
    }
    std::size_t first = int_part.find_first_not_of('0');
    int_part = (first == std::string::npos) ? "0" : int_part.substr(first);
    std::size_t last = frac_part.find_last_not_of('0');
    frac_part = (last == std::string::npos) ? "" : frac_part.substr(0, last + 1);

    std::string out = int_part;
    if (!frac_part.empty()) out += "." + frac_part;
    if (negative && out != "0") out.insert(out.begin(), '-');
    return out;
}

} // namespace

std::optional<std::string> extract_boxed(std::string_view text) {
    std::optional<std::string> result;
    std::size_t pos = 0;
    while (true) {
        const std::size_t at = text.find(kMarker, pos);
        if (at == std::string_view::npos) break;
        if (auto content = balanced_content(text, at + kMarker.size()))
            result = std::move(content);
        pos = at + kMarker.size();
    }
    return result;
}

namespace {

std::string normalize_once(std::string_view raw) {
    // Trim and collapse whitespace runs.
    std::string s;
    bool pending_space = false;
    for (char c : raw) {
        if (is_space(c)) {
            if (!s.empty()) pending_space = true;
            continue;
        }
        if (pending_space) { s += ' '; pending_space = false; }
        s += c;
    }
    std::size_t start = 0;
    while (start < s.size() && s[start] == '+') ++start;
    std::size_t end = s.size();
    while (end > start && s[end - 1] == '.') --end;
    s = s.substr(start, end - start);

    if (is_plain_numeral(s)) return canonicalize_numeral(s);
    return s;
}

} // namespace

std::string normalize_answer(std::string_view raw) {
    // Stripping can expose more strippable characters ("+ 42" -> " 42"),
    // so run the rule pass to a fixed point; that makes normalize an
    // idempotent map by construction.
    std::string cur(raw);
    for (std::size_t i = 0; i <= raw.size() + 1; ++i) {
        std::string next = normalize_once(cur);
        if (next == cur) break;
        cur = std::move(next);
    }
    return cur;
}

RewardVerdict grade(std::string_view response, std::string_view reference) {
    if (reference.empty()) throw config_error("grade: reference answer is empty");
    RewardVerdict v;
    v.extracted = extract_boxed(response);
    if (!v.extracted) return v;
    v.normalized = normalize_answer(*v.extracted);
    v.matched = (*v.normalized == normalize_answer(reference));
    v.reward = v.matched ? 1.0 : 0.0;
    return v;
}

std::string RewardVerdict::to_json_line() const {
    nlohmann::ordered_json j;
    j["extracted"] = extracted ? nlohmann::ordered_json(*extracted) : nlohmann::ordered_json(nullptr);
    j["normalized"] = normalized ? nlohmann::ordered_json(*normalized) : nlohmann::ordered_json(nullptr);
    j["matched"] = matched;
    j["reward"] = reward;
    return j.dump();
}

} // namespace deskrl::verifier
