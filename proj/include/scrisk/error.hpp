#pragma once

#include <stdexcept>
#include <string>

namespace scrisk {

// Missing or unreadable input artifact (file not found, etc).
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input that parsed but violates a documented data invariant.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Broken internal contract; a bug, not bad data.
struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}

inline void require_internal(bool cond, const std::string& msg) {
    if (!cond) throw InternalError(msg);
}

}  // namespace scrisk
