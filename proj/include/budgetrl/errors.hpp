// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace budgetrl {

// Every failure carries a stable machine-readable code plus a category that
// maps 1:1 onto CLI exit codes (validation=2, runtime=3, io=4).
enum class ErrorCategory { Validation, Runtime, Io };

class Error : public std::runtime_error {
public:
    Error(std::string code, ErrorCategory category, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)), category_(category) {}

    const std::string& code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return category_; }

private:
    std::string code_;
    ErrorCategory category_;
};

#define BUDGETRL_DEFINE_ERROR(NAME, CATEGORY)                                  \
    class NAME : public Error {                                               \
    public:                                                                    \
        explicit NAME(const std::string& message)                              \
            : Error(#NAME, ErrorCategory::CATEGORY, message) {}                \
    }

// Input/data validation failures.
BUDGETRL_DEFINE_ERROR(MalformedTrace, Validation);
BUDGETRL_DEFINE_ERROR(EmptyCorpus, Validation);
BUDGETRL_DEFINE_ERROR(UnknownToken, Validation);
BUDGETRL_DEFINE_ERROR(OutOfGroupRange, Validation);
BUDGETRL_DEFINE_ERROR(LengthMismatch, Validation);
BUDGETRL_DEFINE_ERROR(InvalidBaseline, Validation);
BUDGETRL_DEFINE_ERROR(RaggedOutcomes, Validation);
BUDGETRL_DEFINE_ERROR(ValidationError, Validation);
BUDGETRL_DEFINE_ERROR(ParseError, Validation);

// Failures that occur while a run is in flight.
BUDGETRL_DEFINE_ERROR(GeneratorFailure, Runtime);
BUDGETRL_DEFINE_ERROR(RolloutOverflow, Runtime);
BUDGETRL_DEFINE_ERROR(RuntimeFailure, Runtime);

// Filesystem and stream failures.
BUDGETRL_DEFINE_ERROR(IoError, Io);

#undef BUDGETRL_DEFINE_ERROR

}  // namespace budgetrl
