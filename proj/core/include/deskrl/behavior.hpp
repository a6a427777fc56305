#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deskrl::behavior {

// Four linguistic reasoning behaviors and their four visual counterparts.
enum class BehaviorKind {
    BACKTRACKING,
    VERIFICATION,
    SUBGOAL_SETTING,
    BACKWARD_CHAINING,
    VISUAL_REFLECTION,
    DIVIDE_AND_CONQUER,
    VISUAL_VERIFICATION,
    GOAL_DRIVEN_TRACING,
};

inline constexpr std::array<BehaviorKind, 8> kAllKinds = {
    BehaviorKind::BACKTRACKING, BehaviorKind::VERIFICATION,
    BehaviorKind::SUBGOAL_SETTING, BehaviorKind::BACKWARD_CHAINING,
    BehaviorKind::VISUAL_REFLECTION, BehaviorKind::DIVIDE_AND_CONQUER,
    BehaviorKind::VISUAL_VERIFICATION, BehaviorKind::GOAL_DRIVEN_TRACING};

inline constexpr std::array<BehaviorKind, 4> kVisualKinds = {
    BehaviorKind::VISUAL_REFLECTION, BehaviorKind::DIVIDE_AND_CONQUER,
    BehaviorKind::VISUAL_VERIFICATION, BehaviorKind::GOAL_DRIVEN_TRACING};

std::string kind_name(BehaviorKind kind);
std::optional<BehaviorKind> parse_kind(std::string_view name);
bool is_visual(BehaviorKind kind);

// Linguistic counterpart of a visual behavior: reflection <-> backtracking,
// divide-and-conquer <-> subgoal setting, visual verification <->
// verification, goal-driven tracing <-> backward chaining.
BehaviorKind linguistic_counterpart(BehaviorKind visual_kind);

struct Trace {
    std::string trace_id;
    std::string text;       // non-empty
    std::string source_stage;
    bool has_image = false;
};

// Case-insensitive phrase lexicon with word-boundary anchoring.
struct Lexicon {
    std::map<BehaviorKind, std::vector<std::string>> phrases;

    static Lexicon defaults();
    static Lexicon load(const std::filesystem::path& path); // JSON {KIND: [phrases]}
};

struct Detection {
    BehaviorKind kind;
    std::size_t begin = 0; // byte span in the trace text
    std::size_t end = 0;
};

// All non-overlapping matches per kind, sorted by span start.
std::vector<Detection> detect(const Trace& trace, const Lexicon& lexicon);

// Fraction of traces with at least one detection of the kind.
double emergence_rate(std::span<const Trace> traces, BehaviorKind kind,
                      const Lexicon& lexicon);

// Visual-to-linguistic emergence ratio; throws std::domain_error when the
// linguistic rate is zero (undefined, never reported as 0).
double transfer_rate(double cbr_v, double cbr_l);

struct JudgeLabel {
    std::string trace_id;
    BehaviorKind kind;
    bool verdict = false;
};

// JSONL records {trace_id, kind, verdict}. Malformed lines and records with
// unknown trace ids or kinds are skipped and logged; duplicate (trace, kind)
// records resolve last-wins with a warning.
std::vector<JudgeLabel> ingest_judge_labels(const std::filesystem::path& path,
                                            std::span<const Trace> traces);

enum class Provenance { LEXICON, JUDGE };

struct KindStats {
    std::int64_t trace_count = 0; // traces exhibiting the kind
    double cbr = 0.0;
    std::int64_t judge_overrides = 0; // verdicts supplied by judge labels
};

struct BehaviorReport {
    std::int64_t total_traces = 0;
    std::map<BehaviorKind, KindStats> kinds;
    // Keyed by visual kind; nullopt when the counterpart rate is zero.
    std::map<BehaviorKind, std::optional<double>> btr;

    std::string to_json() const;
    std::string to_table() const;
};

// Per-kind emergence rates plus transfer rates for each visual/linguistic
// pair. Judge labels, when given, override the lexicon verdict for their
// (trace, kind) cell.
BehaviorReport report(std::span<const Trace> traces, const Lexicon& lexicon,
                      std::span<const JudgeLabel> labels = {});

// Trace corpus JSONL: {trace_id, text, source_stage, has_image}.
std::vector<Trace> load_traces(const std::filesystem::path& path);

} // namespace deskrl::behavior
