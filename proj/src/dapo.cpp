// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#include "budgetrl/dapo.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "budgetrl/errors.hpp"

namespace budgetrl {

void validate(const DapoConfig& config) {
    if (!(config.eps_low > 0.0 && config.eps_low <= config.eps_high && config.eps_high < 1.0))
        throw ValidationError("clip range must satisfy 0 < eps_low <= eps_high < 1");
    if (config.group_size < 2) throw ValidationError("group_size must be >= 2");
    if (config.learning_rate <= 0.0) throw ValidationError("learning_rate must be positive");
    if (config.warmup_steps < 0 || config.budget_steps < 0)
        throw ValidationError("step counts must be nonnegative");
    if (config.advantage_std_floor <= 0.0)
        throw ValidationError("advantage_std_floor must be positive");
}

Eigen::VectorXd group_advantages(const Eigen::Ref<const Eigen::VectorXd>& rewards,
                                 double std_floor) {
    if (rewards.size() == 0) throw ValidationError("group_advantages: empty group");
    if (rewards.maxCoeff() == rewards.minCoeff())
        return Eigen::VectorXd::Zero(rewards.size());  // exact zeros, no rounding residue
    const double mean = rewards.mean();
    const Eigen::ArrayXd centered = rewards.array() - mean;
    const double std = std::sqrt(centered.square().mean());  // population std
    return centered / std::max(std, std_floor);
}

void compute_group_advantages(RolloutGroup& group, double std_floor) {
    Eigen::VectorXd totals(static_cast<Eigen::Index>(group.rollouts.size()));
    for (std::size_t i = 0; i < group.rollouts.size(); ++i)
        totals[static_cast<Eigen::Index>(i)] = group.rollouts[i].reward.total;
    group.advantages = group_advantages(totals, std_floor);
}

Eigen::ArrayXd importance_ratios(const Eigen::Ref<const Eigen::ArrayXd>& new_log_probs,
                                 const Eigen::Ref<const Eigen::ArrayXd>& old_log_probs) {
    if (new_log_probs.size() != old_log_probs.size())
        throw LengthMismatch("importance_ratios: log-prob vectors differ in length");
    return (new_log_probs - old_log_probs).exp();
}

double clipped_token_term(double ratio, double advantage, const DapoConfig& config) {
    const double clipped = std::clamp(ratio, 1.0 - config.eps_low, 1.0 + config.eps_high);
    return std::min(ratio * advantage, clipped * advantage);
}

bool clipped_branch_selected(double ratio, double advantage, const DapoConfig& config) {
    const double clipped = std::clamp(ratio, 1.0 - config.eps_low, 1.0 + config.eps_high);
    return clipped * advantage < ratio * advantage;
}

namespace {

long long group_token_count(const RolloutGroup& group) {
    long long count = 0;
    for (const GroupRollout& r : group.rollouts) count += static_cast<long long>(r.tokens.size());
    return count;
}

void check_group(const RolloutGroup& group) {
    if (group.rollouts.empty()) throw ValidationError("rollout group is empty");
    if (group.advantages.size() != static_cast<Eigen::Index>(group.rollouts.size()))
        throw LengthMismatch("group advantages not aligned with rollouts");
    for (const GroupRollout& r : group.rollouts) {
        if (r.old_log_probs.size() != static_cast<Eigen::Index>(r.tokens.size()))
            throw LengthMismatch("old log-probs not aligned with tokens");
    }
}

}  // namespace

double clipped_surrogate(const std::vector<RolloutGroup>& groups,
                         const std::vector<std::vector<Eigen::VectorXd>>& new_log_probs,
                         const DapoConfig& config) {
    if (groups.size() != new_log_probs.size())
        throw LengthMismatch("clipped_surrogate: one log-prob set per group required");
    if (groups.empty()) return 0.0;

    double objective = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const RolloutGroup& group = groups[g];
        check_group(group);
        if (new_log_probs[g].size() != group.rollouts.size())
            throw LengthMismatch("clipped_surrogate: one log-prob vector per rollout required");

        const long long tokens = group_token_count(group);
        if (tokens == 0) throw ValidationError("rollout group has no tokens");

        double group_sum = 0.0;
        for (std::size_t i = 0; i < group.rollouts.size(); ++i) {
            const GroupRollout& rollout = group.rollouts[i];
            if (new_log_probs[g][i].size() != rollout.old_log_probs.size())
                throw LengthMismatch("clipped_surrogate: log-prob vector length mismatch");
            const double advantage = group.advantages[static_cast<Eigen::Index>(i)];
            for (Eigen::Index t = 0; t < rollout.old_log_probs.size(); ++t) {
                const double ratio =
                    std::exp(new_log_probs[g][i][t] - rollout.old_log_probs[t]);
                group_sum += clipped_token_term(ratio, advantage, config);
            }
        }
        objective += group_sum / static_cast<double>(tokens);
    }
    return objective / static_cast<double>(groups.size());  // uniform mean over groups
}

PolicyStep surrogate_gradient(const std::vector<RolloutGroup>& groups, const ToyPolicy& policy,
                              const DapoConfig& config) {
    PolicyStep step;
    step.gradient = Eigen::MatrixXd::Zero(policy.logits().rows(), policy.logits().cols());
    if (groups.empty()) return step;

    // Softmax rows are reused across every token that lands in a state.
    std::unordered_map<int, Eigen::VectorXd> probs_cache;
    auto probs_for = [&](int state) -> const Eigen::VectorXd& {
        auto it = probs_cache.find(state);
        if (it == probs_cache.end()) it = probs_cache.emplace(state, policy.probs(state)).first;
        return it->second;
    };

    double objective = 0.0;
    for (const RolloutGroup& group : groups) {
        check_group(group);
        const long long tokens = group_token_count(group);
        if (tokens == 0) throw ValidationError("rollout group has no tokens");
        const double group_scale = 1.0 / (static_cast<double>(tokens) *
                                          static_cast<double>(groups.size()));

        double group_sum = 0.0;
        for (std::size_t i = 0; i < group.rollouts.size(); ++i) {
            const GroupRollout& rollout = group.rollouts[i];
            const double advantage = group.advantages[static_cast<Eigen::Index>(i)];
            const Eigen::VectorXd new_lp =
                policy.sequence_log_probs(group.mode, rollout.tokens);

            ToyPolicy::Walker walker;
            for (std::size_t t = 0; t < rollout.tokens.size(); ++t) {
                const int token = rollout.tokens[t];
                const int state = walker.state(policy, group.mode);
                const double ratio = std::exp(new_lp[static_cast<Eigen::Index>(t)] -
                                              rollout.old_log_probs[static_cast<Eigen::Index>(t)]);
                group_sum += clipped_token_term(ratio, advantage, config);
                if (!clipped_branch_selected(ratio, advantage, config)) {
                    // d/dtheta [ratio * adv] = ratio * adv * dlogpi; for the
                    // softmax row, dlogpi(v|s) = e_v - p(s).
                    const double weight = ratio * advantage * group_scale;
                    const Eigen::VectorXd& p = probs_for(state);
                    step.gradient(state, token) += weight;
                    step.gradient.row(state).noalias() -= weight * p.transpose();
                }
                walker.advance(policy, token);
            }
            step.token_count += static_cast<long long>(rollout.tokens.size());
        }
        objective += group_sum / static_cast<double>(tokens);
    }
    step.objective = objective / static_cast<double>(groups.size());
    return step;
}

std::vector<RolloutGroup> dynamic_sampling_filter(std::vector<RolloutGroup> groups, int phase,
                                                  const DapoConfig& config) {
    const bool active =
        (phase == 1) ? config.dynamic_sampling_warmup : config.dynamic_sampling_budget;
    if (!active) return groups;

    std::vector<RolloutGroup> kept;
    kept.reserve(groups.size());
    for (auto& group : groups) {
        bool any_correct = false, any_wrong = false;
        for (const GroupRollout& r : group.rollouts) {
            (r.reward.task == 1.0 ? any_correct : any_wrong) = true;
        }
        if (any_correct && any_wrong) kept.push_back(std::move(group));
    }
    return kept;
}

}  // namespace budgetrl
