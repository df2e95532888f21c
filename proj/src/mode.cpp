// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#include "budgetrl/mode.hpp"

#include "budgetrl/errors.hpp"

namespace budgetrl {

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::Low: return "low";
        case Mode::Medium: return "medium";
        case Mode::High: return "high";
    }
    return "high";
}

Mode mode_from_string(std::string_view text) {
    if (text == "low") return Mode::Low;
    if (text == "medium") return Mode::Medium;
    if (text == "high") return Mode::High;
    throw ParseError("unknown mode '" + std::string(text) + "' (expected low|medium|high)");
}

}  // namespace budgetrl
