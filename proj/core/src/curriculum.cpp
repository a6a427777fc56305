#include "deskrl/curriculum.hpp"

#include "deskrl/errors.hpp"

namespace deskrl::curriculum {

void validate(const CurriculumSchedule& schedule) {
    if (schedule.stages.empty())
        throw config_error("curriculum: schedule must have at least one stage");
    if (schedule.stages.front().start_iteration != 0)
        throw config_error("curriculum: first stage must start at iteration 0");
    for (std::size_t i = 0; i < schedule.stages.size(); ++i) {
        const auto& s = schedule.stages[i];
        if (s.max_length <= 0)
            throw config_error("curriculum: max_length must be positive");
        if (i > 0) {
            if (s.start_iteration <= schedule.stages[i - 1].start_iteration)
                throw config_error("curriculum: start_iterations must be strictly increasing");
            if (s.max_length < schedule.stages[i - 1].max_length)
                throw config_error("curriculum: max_lengths must be nondecreasing");
        }
    }
}

std::int64_t max_length_at(const CurriculumSchedule& schedule, std::int64_t iteration) {
    if (iteration < 0) throw contract_violation("max_length_at: negative iteration");
    std::int64_t result = schedule.stages.front().max_length;
    for (const auto& s : schedule.stages) {
        if (s.start_iteration <= iteration) result = s.max_length;
        else break;
    }
    return result;
}

} // namespace deskrl::curriculum
