// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace progbench {

enum class ErrorCode {
    DeltaOutOfRange,
    NonMonotoneSegment,
    KTooSmall,
    EpsilonOutOfRange,
    MissingFrame,
    InsufficientViewpoints,
    InvalidTrajectory,
    InvalidConfig,
    MarkerLost,
    StepCountMismatch,
    UnknownStrategy,
    NotAnswerable,
    WrongModality,
    LengthMismatch,
    TooFewSamples,
    EmptyInput,
    InsufficientSamples,
    ConfigInvalid,
    ParseError,
    EmptyDataset,
    OrphanResponse,
    IoError,
    UnknownTemplate,
    PreconditionFailed,
};

std::string_view to_string(ErrorCode code);

// All recoverable failures in the library surface as this exception; `code()`
// is stable and machine-readable, `what()` carries the human detail.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace progbench
