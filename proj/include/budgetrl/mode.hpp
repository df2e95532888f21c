// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <string_view>

namespace budgetrl {

// Reasoning-effort modes. Order matters: it is the serialization order used
// in manifests and the row-block order of toy-policy parameters.
enum class Mode { Low = 0, Medium = 1, High = 2 };

inline constexpr std::array<Mode, 3> kAllModes = {Mode::Low, Mode::Medium, Mode::High};

std::string to_string(Mode mode);

// Accepts "low" / "medium" / "high" (exact, lowercase). Throws ParseError otherwise.
Mode mode_from_string(std::string_view text);

}  // namespace budgetrl
