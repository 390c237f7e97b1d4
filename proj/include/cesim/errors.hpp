#pragma once

#include <stdexcept>
#include <string>

namespace cesim {

// Invalid argument / domain violation detected at a module boundary.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Exact enumeration refused because m^L exceeds the configured cap.
struct EnumerationCapExceeded : std::runtime_error {
    explicit EnumerationCapExceeded(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file; message carries offending line numbers.
struct IngestError : std::runtime_error {
    explicit IngestError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace cesim
