#include "crowdflow/error.hpp"

namespace crowdflow {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::validation: return "validation";
        case ErrorKind::schema: return "schema";
        case ErrorKind::alignment: return "alignment";
        case ErrorKind::configuration: return "configuration";
        case ErrorKind::degenerate_mask: return "degenerate-mask";
        case ErrorKind::geometry: return "geometry";
        case ErrorKind::insufficient_data: return "insufficient-data";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::insufficient_data: return 3;
        case ErrorKind::io: return 4;
        default: return 2;
    }
}

Error::Error(ErrorKind kind, const std::string& message, std::string context)
    : std::runtime_error(message), kind_(kind), context_(std::move(context)) {}

Error Error::with_stage(std::string stage, std::string file) const {
    std::string msg = "[" + stage + "] " + what();
    if (!file.empty()) msg += " (" + file + ")";
    Error tagged(kind_, msg, file.empty() ? context_ : file);
    tagged.stage_ = std::move(stage);
    return tagged;
}

}  // namespace crowdflow
