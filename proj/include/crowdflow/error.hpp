#pragma once

#include <stdexcept>
#include <string>

namespace crowdflow {

enum class ErrorKind {
    validation,         // record or config invariant violated
    schema,             // CSV header mismatch
    alignment,          // window not aligned to the series step
    configuration,      // incompatible options (e.g. family/kind mismatch)
    degenerate_mask,    // polygon rasterizes to nothing
    geometry,           // mask or heatmap does not match the frame geometry
    insufficient_data,  // not enough points for the requested stage
    io,
};

const char* to_string(ErrorKind kind);

/// Process exit code for a given error kind: 2 validation-like, 3 insufficient data, 4 I/O.
int exit_code(ErrorKind kind);

/// Single exception type for the library. `stage` and `context` are optional
/// annotations (pipeline stage name, offending file or field) added on the way up.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::string context = {});

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& context() const noexcept { return context_; }
    const std::string& stage() const noexcept { return stage_; }

    /// Copy of this error tagged with a pipeline stage (and optionally a file).
    Error with_stage(std::string stage, std::string file = {}) const;

private:
    ErrorKind kind_;
    std::string context_;
    std::string stage_;
};

}  // namespace crowdflow
