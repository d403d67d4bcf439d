#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sake {

// Error kinds. The CLI maps DataError to exit code 2 and NumericalError to 3.
enum class ErrorKind {
    EmptySampleSet,
    DimensionMismatch,
    InsufficientSamples,
    NotPositiveSemidefinite,
    SingularMatrix,
    DuplicateEditId,
    UnknownEditId,
    InvalidEdit,
    SchemaViolation,
    VersionMismatch,
    VocabTooLarge,
    UnknownObject,
    DecodabilityFailure,
    GenerationRetryExhausted,
    InvalidArgument,
    IoError,
};

std::string_view error_kind_name(ErrorKind kind) noexcept;

// True for failures that come from the numerics rather than from the input data.
bool is_numerical(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::string_view name() const noexcept { return error_kind_name(kind_); }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace sake
