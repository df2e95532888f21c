// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "budgetrl/mode.hpp"
#include "budgetrl/reward.hpp"
#include "budgetrl/toy_policy.hpp"

namespace budgetrl {

struct DapoConfig {
    int group_size = 16;
    double eps_low = 0.2;    // lower clip: ratio floor 1 - eps_low
    double eps_high = 0.28;  // upper clip decoupled from the lower one
    // Plain gradient ascent. Tabular-softmax logits tolerate large steps, and
    // the two-phase schedule is short, so the default is sized for visible
    // length migration within the budget phase.
    double learning_rate = 8.0;
    int warmup_steps = 95;        // phase 1: High mode, task reward only
    int budget_steps = 40;        // phase 2: all modes, budget-aware reward
    bool dynamic_sampling_warmup = true;
    bool dynamic_sampling_budget = false;
    double advantage_std_floor = 1e-8;
    std::uint64_t seed = 0;
};

// Requires 0 < eps_low <= eps_high < 1 and group_size >= 2.
void validate(const DapoConfig& config);

// One sampled response inside a group: policy token ids, the log-probs
// recorded when it was sampled, and its scored reward.
struct GroupRollout {
    std::vector<int> tokens;
    Eigen::VectorXd old_log_probs;  // aligned with tokens
    RewardBreakdown reward;
};

// All rollouts for one (query, mode) pair plus their normalized advantages.
struct RolloutGroup {
    std::string query_id;
    Mode mode = Mode::High;
    std::vector<GroupRollout> rollouts;
    Eigen::VectorXd advantages;  // one per rollout, broadcast to its tokens
};

// Group-standardized advantages: (r - mean) / max(population_std, floor).
// An all-equal group returns exact zeros.
Eigen::VectorXd group_advantages(const Eigen::Ref<const Eigen::VectorXd>& rewards,
                                 double std_floor = 1e-8);

// Fills group.advantages from the rollouts' total rewards.
void compute_group_advantages(RolloutGroup& group, double std_floor = 1e-8);

// exp(new - old), elementwise. Sizes must match (LengthMismatch).
Eigen::ArrayXd importance_ratios(const Eigen::Ref<const Eigen::ArrayXd>& new_log_probs,
                                 const Eigen::Ref<const Eigen::ArrayXd>& old_log_probs);

// min(ratio * adv, clip(ratio, 1-eps_low, 1+eps_high) * adv).
double clipped_token_term(double ratio, double advantage, const DapoConfig& config);

// True when the clipped branch is strictly smaller; ties select the unclipped
// branch, whose subgradient is the score-function term. A token whose clipped
// branch is selected contributes zero gradient.
bool clipped_branch_selected(double ratio, double advantage, const DapoConfig& config);

// Token-level clipped objective: per group, sum of token terms divided by the
// group's total token count; groups are then averaged uniformly.
// new_log_probs[g][i] must align with groups[g].rollouts[i].tokens.
double clipped_surrogate(const std::vector<RolloutGroup>& groups,
                         const std::vector<std::vector<Eigen::VectorXd>>& new_log_probs,
                         const DapoConfig& config);

struct PolicyStep {
    double objective = 0.0;
    Eigen::MatrixXd gradient;  // exactly the policy's parameter shape
    long long token_count = 0;
};

// Analytic ascent gradient of clipped_surrogate with the policy providing
// fresh log-probs (old ones stay frozen in the rollouts).
PolicyStep surrogate_gradient(const std::vector<RolloutGroup>& groups, const ToyPolicy& policy,
                              const DapoConfig& config);

// Phase 1 drops groups whose task rewards are all-0 or all-1 (no gradient
// signal); phase 2 keeps everything, per the phase's dynamic-sampling flag.
std::vector<RolloutGroup> dynamic_sampling_filter(std::vector<RolloutGroup> groups, int phase,
                                                  const DapoConfig& config);

}  // namespace budgetrl
