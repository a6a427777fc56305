#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace deskrl::verifier {

struct RewardVerdict {
    std::optional<std::string> extracted;
    std::optional<std::string> normalized;
    bool matched = false;
    double reward = 0.0; // 1.0 iff matched

    std::string to_json_line() const;
};

// Contents of the last balanced \boxed{...} span; nested braces allowed,
// unbalanced spans skipped. Absent when no balanced span exists.
std::optional<std::string> extract_boxed(std::string_view text);

// Canonical answer form: trim, collapse internal whitespace, strip leading
// '+', strip trailing '.', and canonicalize plain decimal numerals
// (no leading zeros, no trailing fractional zeros, "-0" -> "0").
// Idempotent: normalize(normalize(x)) == normalize(x).
std::string normalize_answer(std::string_view raw);

// Binary rule-based reward: 1.0 iff the last boxed span of the response
// normalizes to the same string as the reference. Empty reference is a
// config_error.
RewardVerdict grade(std::string_view response, std::string_view reference);

} // namespace deskrl::verifier
