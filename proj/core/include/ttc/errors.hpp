#pragma once

#include <stdexcept>

namespace ttc {

// File missing/unreadable or a write failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input document or data violates its schema or an invariant.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Artifacts that must belong together do not (e.g. checkpoint vs taxonomy).
struct MismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ttc
