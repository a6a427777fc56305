#pragma once

#include <cstdint>
#include <vector>

namespace deskrl::curriculum {

struct Stage {
    std::int64_t start_iteration = 0;
    std::int64_t max_length = 0;
    friend bool operator==(const Stage&, const Stage&) = default;
};

// Iteration-indexed maximum-response-length schedule. Stage boundaries are
// closed on the left: a stage applies from its start_iteration onward.
struct CurriculumSchedule {
    std::vector<Stage> stages;
    friend bool operator==(const CurriculumSchedule&, const CurriculumSchedule&) = default;
};

// Throws config_error unless start_iterations are strictly increasing with
// the first equal to 0, and max_lengths are positive and nondecreasing.
void validate(const CurriculumSchedule& schedule);

// Max length of the last stage whose start_iteration <= iteration.
// The schedule must already be valid; iteration must be >= 0.
std::int64_t max_length_at(const CurriculumSchedule& schedule, std::int64_t iteration);

} // namespace deskrl::curriculum
