#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace deskrl {

// Index into a fixed Vocabulary.
struct Token {
    std::uint32_t id = 0;
    friend bool operator==(Token a, Token b) { return a.id == b.id; }
};

// Ordered list of distinct symbols with reserved control tokens. PAD and EOS
// render as empty text, BOX_OPEN/BOX_CLOSE render as the answer-box markers,
// so detokenizing a generated sequence yields exactly the text the grader
// sees.
class Vocabulary {
public:
    Vocabulary(std::vector<std::string> symbols,
               std::uint32_t pad, std::uint32_t eos,
               std::uint32_t box_open, std::uint32_t box_close,
               std::uint32_t query);

    // The fixed toy vocabulary: control tokens, digits, operators, keywords.
    static const Vocabulary& standard();

    std::uint32_t size() const { return static_cast<std::uint32_t>(symbols_.size()); }
    const std::string& symbol(Token t) const;
    std::optional<Token> find(std::string_view symbol) const;
    bool valid(Token t) const { return t.id < size(); }

    Token pad() const { return {pad_}; }
    Token eos() const { return {eos_}; }
    Token box_open() const { return {box_open_}; }
    Token box_close() const { return {box_close_}; }
    Token query() const { return {query_}; }

    Token digit(int d) const; // d in [0, 9]

    // Text a single token contributes to generated output.
    std::string_view render(Token t) const;

    // Concatenated render of a generated sequence (responses).
    std::string detokenize(std::span<const Token> tokens) const;

    // Space-joined render used for exporting prompts ("3 + 4 = ?").
    std::string prompt_text(std::span<const Token> tokens) const;

    // Inverse of prompt_text: whitespace-split words mapped to symbols;
    // words made of digits (optionally '-'-prefixed) expand per character.
    // Throws config_error on a word outside the vocabulary.
    std::vector<Token> tokenize_prompt(std::string_view text) const;

    // Digit/minus token sequence for a decimal answer string.
    std::vector<Token> tokenize_answer(std::string_view answer) const;

    // Stable content hash; checkpoints record it and refuse to load against
    // a different vocabulary.
    std::uint64_t content_hash() const { return content_hash_; }

private:
    std::vector<std::string> symbols_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::uint32_t pad_, eos_, box_open_, box_close_, query_;
    std::uint64_t content_hash_ = 0;
};

std::uint64_t hash_tokens(std::span<const Token> tokens);

} // namespace deskrl
