#include "deskrl/vocab.hpp"

#include <cctype>
#include <sstream>

#include "deskrl/errors.hpp"
#include "deskrl/rng.hpp"

namespace deskrl {

namespace {

bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

bool is_number_word(std::string_view w) {
    std::size_t i = (w.size() > 1 && w[0] == '-') ? 1 : 0;
    if (i >= w.size()) return false;
    for (; i < w.size(); ++i)
        if (!is_ascii_digit(w[i])) return false;
    return true;
}

} // namespace

Vocabulary::Vocabulary(std::vector<std::string> symbols,
                       std::uint32_t pad, std::uint32_t eos,
                       std::uint32_t box_open, std::uint32_t box_close,
                       std::uint32_t query)
    : symbols_(std::move(symbols)),
      pad_(pad), eos_(eos), box_open_(box_open), box_close_(box_close), query_(query) {
    for (std::uint32_t i = 0; i < symbols_.size(); ++i) {
        auto [it, inserted] = index_.emplace(symbols_[i], i);
        if (!inserted)
            throw contract_violation("Vocabulary: duplicate symbol '" + symbols_[i] + "'");
    }
    const std::uint32_t reserved[] = {pad_, eos_, box_open_, box_close_, query_};
    for (std::uint32_t r : reserved)
        if (r >= symbols_.size())
            throw contract_violation("Vocabulary: reserved id out of range");
    for (std::size_t a = 0; a < std::size(reserved); ++a)
        for (std::size_t b = a + 1; b < std::size(reserved); ++b)
            if (reserved[a] == reserved[b])
                throw contract_violation("Vocabulary: reserved ids must be distinct");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& s : symbols_) {
        h = fnv1a64(s, h);
        h = fnv1a64(std::string_view("\x1f", 1), h);
    }
    content_hash_ = h;
}

const Vocabulary& Vocabulary::standard() {
    static const Vocabulary vocab = [] {
        std::vector<std::string> syms = {
            "<pad>", "<eos>", "\\boxed{", "}", "?",
            "0", "1", "2", "3", "4", "5", "6", "7", "8", "9",
            "+", "-", "*", "=", ",", "echo", "max"};
        return Vocabulary(std::move(syms), 0, 1, 2, 3, 4);
    }();
    return vocab;
}

const std::string& Vocabulary::symbol(Token t) const {
    if (!valid(t)) throw contract_violation("Vocabulary: token id out of range");
    return symbols_[t.id];
}

std::optional<Token> Vocabulary::find(std::string_view symbol) const {
    auto it = index_.find(std::string(symbol));
    if (it == index_.end()) return std::nullopt;
    return Token{it->second};
}

Token Vocabulary::digit(int d) const {
    if (d < 0 || d > 9) throw contract_violation("Vocabulary: digit out of range");
    auto t = find(std::string(1, static_cast<char>('0' + d)));
    if (!t) throw contract_violation("Vocabulary: digit symbol missing");
    return *t;
}

std::string_view Vocabulary::render(Token t) const {
    if (t.id == pad_ || t.id == eos_) return {};
    return symbol(t);
}

std::string Vocabulary::detokenize(std::span<const Token> tokens) const {
    std::string out;
    for (Token t : tokens) out += render(t);
    return out;
}

std::string Vocabulary::prompt_text(std::span<const Token> tokens) const {
    std::string out;
    for (Token t : tokens) {
        auto piece = render(t);
        if (piece.empty()) continue;
        if (!out.empty()) out += ' ';
        out += piece;
    }
    return out;
}

std::vector<Token> Vocabulary::tokenize_prompt(std::string_view text) const {
    std::vector<Token> out;
    std::istringstream in{std::string(text)};
    std::string word;
    while (in >> word) {
        if (auto t = find(word)) {
            out.push_back(*t);
            continue;
        }
        if (is_number_word(word)) {
            for (Token t : tokenize_answer(word)) out.push_back(t);
            continue;
        }
        throw config_error("tokenize_prompt: word '" + word + "' is not in the vocabulary");
    }
    return out;
}

std::vector<Token> Vocabulary::tokenize_answer(std::string_view answer) const {
    std::vector<Token> out;
    for (char c : answer) {
        auto t = find(std::string_view(&c, 1));
        if (!t) throw config_error(std::string("tokenize_answer: character '") + c +
                                   "' is not in the vocabulary");
        out.push_back(*t);
    }
    return out;
}

std::uint64_t hash_tokens(std::span<const Token> tokens) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (Token t : tokens) {
        h ^= t.id;
        h *= 0x100000001b3ULL;
        h = mix64(h);
    }
    return h;
}

} // namespace deskrl
