#include "deskrl/behavior.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "deskrl/errors.hpp"

namespace deskrl::behavior {

std::string kind_name(BehaviorKind kind) {
    switch (kind) {
        case BehaviorKind::BACKTRACKING: return "BACKTRACKING";
        case BehaviorKind::VERIFICATION: return "VERIFICATION";
        case BehaviorKind::SUBGOAL_SETTING: return "SUBGOAL_SETTING";
        case BehaviorKind::BACKWARD_CHAINING: return "BACKWARD_CHAINING";
        case BehaviorKind::VISUAL_REFLECTION: return "VISUAL_REFLECTION";
        case BehaviorKind::DIVIDE_AND_CONQUER: return "DIVIDE_AND_CONQUER";
        case BehaviorKind::VISUAL_VERIFICATION: return "VISUAL_VERIFICATION";
        case BehaviorKind::GOAL_DRIVEN_TRACING: return "GOAL_DRIVEN_TRACING";
    }
    throw contract_violation("kind_name: bad enum value");
}

std::optional<BehaviorKind> parse_kind(std::string_view name) {
    for (BehaviorKind k : kAllKinds)
        if (kind_name(k) == name) return k;
    return std::nullopt;
}

bool is_visual(BehaviorKind kind) {
    return std::find(kVisualKinds.begin(), kVisualKinds.end(), kind) != kVisualKinds.end();
}

BehaviorKind linguistic_counterpart(BehaviorKind visual_kind) {
    switch (visual_kind) {
        case BehaviorKind::VISUAL_REFLECTION: return BehaviorKind::BACKTRACKING;
        case BehaviorKind::DIVIDE_AND_CONQUER: return BehaviorKind::SUBGOAL_SETTING;
        case BehaviorKind::VISUAL_VERIFICATION: return BehaviorKind::VERIFICATION;
        case BehaviorKind::GOAL_DRIVEN_TRACING: return BehaviorKind::BACKWARD_CHAINING;
        default:
            throw contract_violation("linguistic_counterpart: not a visual kind");
    }
}

Lexicon Lexicon::defaults() {
    Lexicon lex;
    lex.phrases = {
        {BehaviorKind::BACKTRACKING,
         {"this approach won't work", "let me try a different approach", "wait, that's not right"}},
        {BehaviorKind::VERIFICATION,
         {"let me verify", "let me double-check", "checking this result"}},
        {BehaviorKind::SUBGOAL_SETTING,
         {"first, we need to", "let's break this down", "the next step is to"}},
        {BehaviorKind::BACKWARD_CHAINING,
         {"working backwards", "to get this, we need", "starting from the answer"}},
        {BehaviorKind::VISUAL_REFLECTION,
         {"let me see the image", "let me visualize", "look at the image again"}},
        {BehaviorKind::DIVIDE_AND_CONQUER,
         {"let's first look at", "one region at a time", "examine each part"}},
        {BehaviorKind::VISUAL_VERIFICATION,
         {"verify this against the image", "confirm with the image", "check the image"}},
        {BehaviorKind::GOAL_DRIVEN_TRACING,
         {"to get this answer, i need", "find an object that", "trace back to the image"}},
    };
    return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("lexicon: cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("lexicon: parse error: " + std::string(e.what()));
    }
    if (!j.is_object()) throw config_error("lexicon: expected a JSON object");
    Lexicon lex;
    for (const auto& [key, val] : j.items()) {
        const auto kind = parse_kind(key);
        if (!kind) throw config_error("lexicon: unknown behavior kind '" + key + "'");
        if (!val.is_array()) throw config_error("lexicon: phrases for " + key + " must be an array");
        std::vector<std::string> phrases;
        for (const auto& p : val) {
            if (!p.is_string() || p.get<std::string>().empty())
                throw config_error("lexicon: phrases must be non-empty strings");
            phrases.push_back(p.get<std::string>());
        }
        lex.phrases[*kind] = std::move(phrases);
    }
    return lex;
}

namespace {

char ascii_lower(char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

std::string lowered(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = ascii_lower(c);
    return out;
}

bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Word-boundary anchored occurrences of `needle` in `hay` (both lowercase).
std::vector<std::pair<std::size_t, std::size_t>> find_anchored(const std::string& hay,
                                                               const std::string& needle) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t pos = 0;
    while (true) {
        const std::size_t at = hay.find(needle, pos);
        if (at == std::string::npos) break;
        const std::size_t end = at + needle.size();
        const bool left_ok = at == 0 || !word_char(hay[at - 1]) || !word_char(needle.front());
        const bool right_ok = end == hay.size() || !word_char(hay[end]) || !word_char(needle.back());
        if (left_ok && right_ok) spans.emplace_back(at, end);
        pos = at + 1;
    }
    return spans;
}

} // namespace

std::vector<Detection> detect(const Trace& trace, const Lexicon& lexicon) {
    if (trace.text.empty()) throw contract_violation("detect: trace text is empty");
    const std::string hay = lowered(trace.text);
    std::vector<Detection> out;
    for (const auto& [kind, phrases] : lexicon.phrases) {
        std::vector<std::pair<std::size_t, std::size_t>> spans;
        for (const auto& phrase : phrases) {
            const auto found = find_anchored(hay, lowered(phrase));
            spans.insert(spans.end(), found.begin(), found.end());
        }
        std::sort(spans.begin(), spans.end());
        std::size_t last_end = 0;
        bool first = true;
        for (auto [b, e] : spans) {
            if (!first && b < last_end) continue; // overlap within the kind
            out.push_back({kind, b, e});
            last_end = e;
            first = false;
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
        return a.begin < b.begin;
    });
    return out;
}

double emergence_rate(std::span<const Trace> traces, BehaviorKind kind,
                      const Lexicon& lexicon) {
    if (traces.empty()) throw contract_violation("emergence_rate: empty corpus");
    std::int64_t hits = 0;
    for (const auto& trace : traces) {
        const auto dets = detect(trace, lexicon);
        if (std::any_of(dets.begin(), dets.end(),
                        [&](const Detection& d) { return d.kind == kind; }))
            ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(traces.size());
}

double transfer_rate(double cbr_v, double cbr_l) {
    if (!(cbr_l > 0.0))
        throw std::domain_error("transfer_rate: undefined when the linguistic rate is 0");
    return cbr_v / cbr_l;
}

std::vector<JudgeLabel> ingest_judge_labels(const std::filesystem::path& path,
                                            std::span<const Trace> traces) {
    std::ifstream in(path);
    if (!in) throw config_error("ingest_judge_labels: cannot open " + path.string());

    std::set<std::string> known_ids;
    for (const auto& t : traces) known_ids.insert(t.trace_id);

    // Merge map preserves first-seen order; later records overwrite verdicts.
    std::vector<JudgeLabel> labels;
    std::map<std::pair<std::string, BehaviorKind>, std::size_t> index;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            spdlog::warn("judge labels: skipping malformed JSON at line {}", line_no);
            continue;
        }
        std::string trace_id, kind_str;
        bool verdict = false;
        try {
            trace_id = j.at("trace_id").get<std::string>();
            kind_str = j.at("kind").get<std::string>();
            verdict = j.at("verdict").get<bool>();
        } catch (const nlohmann::json::exception&) {
            spdlog::warn("judge labels: skipping incomplete record at line {}", line_no);
            continue;
        }
        const auto kind = parse_kind(kind_str);
        if (!kind) {
            spdlog::warn("judge labels: unknown kind '{}' at line {}", kind_str, line_no);
            continue;
        }
        if (!known_ids.count(trace_id)) {
            spdlog::warn("judge labels: unknown trace_id '{}' at line {}", trace_id, line_no);
            continue;
        }
        const auto key = std::make_pair(trace_id, *kind);
        if (auto it = index.find(key); it != index.end()) {
            spdlog::warn("judge labels: duplicate record for ({}, {}) at line {}; last wins",
                         trace_id, kind_str, line_no);
            labels[it->second].verdict = verdict;
        } else {
            index[key] = labels.size();
            labels.push_back({trace_id, *kind, verdict});
        }
    }
    return labels;
}

BehaviorReport report(std::span<const Trace> traces, const Lexicon& lexicon,
                      std::span<const JudgeLabel> labels) {
    if (traces.empty()) throw contract_violation("report: empty corpus");

    std::map<std::pair<std::string, BehaviorKind>, bool> judged;
    for (const auto& l : labels) judged[{l.trace_id, l.kind}] = l.verdict;

    BehaviorReport rep;
    rep.total_traces = static_cast<std::int64_t>(traces.size());
    for (BehaviorKind kind : kAllKinds) rep.kinds[kind] = {};

    for (const auto& trace : traces) {
        const auto dets = detect(trace, lexicon);
        for (BehaviorKind kind : kAllKinds) {
            bool hit;
            auto it = judged.find({trace.trace_id, kind});
            if (it != judged.end()) {
                hit = it->second;
                rep.kinds[kind].judge_overrides += 1;
            } else {
                hit = std::any_of(dets.begin(), dets.end(),
                                  [&](const Detection& d) { return d.kind == kind; });
            }
            if (hit) rep.kinds[kind].trace_count += 1;
        }
    }
    for (BehaviorKind kind : kAllKinds)
        rep.kinds[kind].cbr = static_cast<double>(rep.kinds[kind].trace_count) /
                              static_cast<double>(rep.total_traces);

    for (BehaviorKind v : kVisualKinds) {
        const double cbr_l = rep.kinds[linguistic_counterpart(v)].cbr;
        if (cbr_l > 0.0)
            rep.btr[v] = rep.kinds[v].cbr / cbr_l;
        else
            rep.btr[v] = std::nullopt;
    }
    return rep;
}

std::string BehaviorReport::to_json() const {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["total_traces"] = total_traces;
    nlohmann::ordered_json kinds_json;
    for (const auto& [kind, stats] : kinds) {
        nlohmann::ordered_json k;
        k["count"] = stats.trace_count;
        k["cbr"] = stats.cbr;
        k["judge_overrides"] = stats.judge_overrides;
        kinds_json[kind_name(kind)] = k;
    }
    j["kinds"] = kinds_json;
    nlohmann::ordered_json btr_json;
    for (const auto& [kind, rate] : btr)
        btr_json[kind_name(kind)] = rate ? nlohmann::ordered_json(*rate)
                                         : nlohmann::ordered_json(nullptr);
    j["btr"] = btr_json;
    return j.dump(2) + "\n";
}

std::string BehaviorReport::to_table() const {
    std::ostringstream out;
    out << "behavior              count    cbr      btr\n";
    for (BehaviorKind kind : kAllKinds) {
        const auto& stats = kinds.at(kind);
        out << kind_name(kind);
        for (std::size_t i = kind_name(kind).size(); i < 22; ++i) out << ' ';
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%-8lld %-8.4f",
                      static_cast<long long>(stats.trace_count), stats.cbr);
        out << buf;
        if (is_visual(kind)) {
            const auto& rate = btr.at(kind);
            if (rate) {
                std::snprintf(buf, sizeof(buf), " %.4f", *rate);
                out << buf;
            } else {
                out << " undefined";
            }
        }
        out << "\n";
    }
    return out.str();
}

std::vector<Trace> load_traces(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("load_traces: cannot open " + path.string());
    std::vector<Trace> traces;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw config_error("load_traces: line " + std::to_string(line_no) + ": " + e.what());
        }
        Trace t;
        try {
            t.trace_id = j.at("trace_id").get<std::string>();
            t.text = j.at("text").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw config_error("load_traces: line " + std::to_string(line_no) + ": " + e.what());
        }
        if (t.text.empty())
            throw config_error("load_traces: line " + std::to_string(line_no) + ": empty text");
        t.source_stage = j.value("source_stage", "");
        t.has_image = j.value("has_image", false);
        traces.push_back(std::move(t));
    }
    return traces;
}

} // namespace deskrl::behavior
