// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "budgetrl/mode.hpp"
#include "budgetrl/trace.hpp"

namespace budgetrl {

// Mode-dependent reward weights plus the transition-keyword detector config.
// alpha scales the length reward: High ignores length entirely, Low applies
// full pressure. Keyword matching is case-insensitive and whole-word; a
// multi-word keyword must appear as a contiguous word sequence.
struct ModeRewardConfig {
    double alpha_high = 0.0;
    double alpha_med = 0.5;
    double alpha_low = 1.0;
    std::vector<std::string> leak_keywords = default_leak_keywords();
    double leak_reward = 0.5;    // answer section free of keywords
    double leak_penalty = -0.5;  // keyword detected in the answer section

    double alpha(Mode mode) const;
    static std::vector<std::string> default_leak_keywords();
};

void validate(const ModeRewardConfig& config);

struct RewardBreakdown {
    double task = 0.0;    // 0 or 1
    double lambda = 0.0;  // raw interpolation value, before the task gate
    double length = 0.0;  // task-gated length reward
    double leak = 0.0;
    double total = 0.0;
};

// --- final-answer extraction ------------------------------------------------
// Extraction takes the last balanced \boxed{...} in the answer section; when
// no boxed form exists the whole trimmed answer is the candidate.
// Normalization trims whitespace and strips $...$ / \(...\) / \boxed{...}
// wrappers; comparison is case-sensitive.
std::string extract_final_answer(const std::string& answer_section);
std::string normalize_answer(const std::string& text);

// 1.0 iff the extracted final answer matches the reference after
// normalization on both sides, else 0.0.
double task_reward(const ReasoningTrace& trace, const std::string& reference_answer);

// --- length reward ------------------------------------------------------
// lambda = 0.5 - (len - len_min) / (len_max - len_min), linear from +0.5 at
// the group's shortest response to -0.5 at its longest. A degenerate group
// (len_max == len_min) defines lambda = 0. len outside the group range
// throws OutOfGroupRange.
double length_lambda(double len, double len_min, double len_max);

// Correct responses take lambda as-is; incorrect ones only ever get the
// non-positive part, so a wrong answer is never rewarded for brevity.
double length_reward(double lambda, double task);

// --- leak penalty -------------------------------------------------------
bool detect_leak(const std::string& answer_section, const ModeRewardConfig& config);
double leak_reward(const std::string& answer_section, const ModeRewardConfig& config);

// --- composite ------------------------------------------------------------
// total = task + alpha(mode) * length_reward + leak_reward. The group length
// bounds must come from the same (query, mode) rollout group as the trace.
struct GroupLengthBounds {
    double len_min = 0.0;
    double len_max = 0.0;
};

RewardBreakdown composite_reward(const ReasoningTrace& trace, const std::string& reference_answer,
                                 const GroupLengthBounds& group, const ModeRewardConfig& config);

// Keyword list file: one keyword per line, '#' starts a comment, blank lines
// ignored. Throws IoError when unreadable, ValidationError when empty.
std::vector<std::string> load_keywords(const std::string& path);

}  // namespace budgetrl
