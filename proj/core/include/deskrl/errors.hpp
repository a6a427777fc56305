#pragma once

#include <stdexcept>
#include <string>

namespace deskrl {

// Violation of an API precondition (length mismatch, bad range, ...).
struct contract_violation : std::logic_error {
    explicit contract_violation(const std::string& what) : std::logic_error(what) {}
};

// Bad configuration: unparsable file, invalid key, out-of-range value.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// A batch sampled under a stale policy snapshot was handed to the trainer.
struct on_policy_violation : std::runtime_error {
    explicit on_policy_violation(const std::string& what) : std::runtime_error(what) {}
};

} // namespace deskrl
