// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "budgetrl/dapo.hpp"
#include "budgetrl/reward.hpp"
#include "budgetrl/toy_env.hpp"

namespace budgetrl {

// One evaluation row of the training log. Step 0 is the initial evaluation
// before any update; phases are 1 (warmup) and 2 (budget-aware). Per-mode
// arrays are indexed by the Mode enum value (Low, Medium, High).
struct TrainStepRecord {
    int step = 0;
    int phase = 0;  // 0 for the initial evaluation row
    double objective = 0.0;
    int groups_total = 0;
    int groups_kept = 0;  // after dynamic sampling
    long long tokens_processed = 0;
    std::array<double, 3> accuracy{};
    std::array<double, 3> thinking_tokens{};
    std::array<double, 3> answer_tokens{};
    std::array<double, 3> total_tokens{};
    std::array<double, 3> train_reward{};  // mean rollout reward; 0 for untrained modes
};

struct TrainingLog {
    std::vector<TrainStepRecord> steps;
    int phase_boundary = 0;  // configured warmup step count
    // Recorded run choices (group aggregation, seed, learning rate, ...).
    std::vector<std::pair<std::string, std::string>> metadata;
};

// Two-phase schedule over the toy environment:
//  * phase 1 (warmup_steps): High mode only, task reward only, dynamic
//    sampling per config; after every step the High rows are mirrored into
//    Medium/Low, the tabular stand-in for training shared weights.
//  * phase 2 (budget_steps): all three modes, composite budget-aware reward
//    scored within each (task, mode) rollout group.
// Every step appends an all-mode evaluation row. Fully deterministic given
// config.seed.
TrainingLog run_two_phase(const ToyEnvironment& env, ToyPolicy& policy, const DapoConfig& config,
                          const ModeRewardConfig& reward_config);

// One record per row; metadata goes first as a {"meta": ...} line.
void write_training_log_jsonl(const TrainingLog& log, std::ostream& out);
// Flat CSV of the same rows for plotting.
void write_training_log_csv(const TrainingLog& log, std::ostream& out);

}  // namespace budgetrl
