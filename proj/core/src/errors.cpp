#include "sake/errors.hpp"

namespace sake {

std::string_view error_kind_name(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::EmptySampleSet: return "EmptySampleSet";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::InsufficientSamples: return "InsufficientSamples";
        case ErrorKind::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
        case ErrorKind::SingularMatrix: return "SingularMatrix";
        case ErrorKind::DuplicateEditId: return "DuplicateEditId";
        case ErrorKind::UnknownEditId: return "UnknownEditId";
        case ErrorKind::InvalidEdit: return "InvalidEdit";
        case ErrorKind::SchemaViolation: return "SchemaViolation";
        case ErrorKind::VersionMismatch: return "VersionMismatch";
        case ErrorKind::VocabTooLarge: return "VocabTooLarge";
        case ErrorKind::UnknownObject: return "UnknownObject";
        case ErrorKind::DecodabilityFailure: return "DecodabilityFailure";
        case ErrorKind::GenerationRetryExhausted: return "GenerationRetryExhausted";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

bool is_numerical(ErrorKind kind) noexcept {
    return kind == ErrorKind::NotPositiveSemidefinite || kind == ErrorKind::SingularMatrix;
}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace sake
