// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#include "budgetrl/train.hpp"

#include <algorithm>
#include <array>
#include <nlohmann/json.hpp>
#include <ostream>
#include <span>

#include "budgetrl/errors.hpp"

namespace budgetrl {

namespace {

// Builds the 16-rollout group for one (task, mode) and scores it. Phase 1
// keeps the task term only; phase 2 scores the full composite against the
// group's own length bounds.
RolloutGroup sample_group(const ToyEnvironment& env, const ToyTask& task, const ToyPolicy& policy,
                          Mode mode, int phase, const DapoConfig& config,
                          const ModeRewardConfig& reward_config, Rng& rng) {
    RolloutGroup group;
    group.query_id = task.id;
    group.mode = mode;
    group.rollouts.reserve(static_cast<std::size_t>(config.group_size));

    std::vector<RolloutResult> raw;
    raw.reserve(static_cast<std::size_t>(config.group_size));
    for (int i = 0; i < config.group_size; ++i) {
        raw.push_back(env.rollout(task, policy, mode, rng));
    }

    GroupLengthBounds bounds;
    bounds.len_min = raw.front().trace.total_tokens;
    bounds.len_max = raw.front().trace.total_tokens;
    for (const RolloutResult& r : raw) {
        const double len = static_cast<double>(r.trace.total_tokens);
        bounds.len_min = std::min(bounds.len_min, len);
        bounds.len_max = std::max(bounds.len_max, len);
    }

    for (RolloutResult& r : raw) {
        GroupRollout rollout;
        rollout.tokens = std::move(r.tokens);
        rollout.old_log_probs = Eigen::Map<const Eigen::VectorXd>(
            r.log_probs.data(), static_cast<Eigen::Index>(r.log_probs.size()));
        if (phase == 1) {
            rollout.reward.task = r.correct ? 1.0 : 0.0;
            rollout.reward.total = rollout.reward.task;
        } else {
            rollout.reward = composite_reward(r.trace, task.reference_answer, bounds, reward_config);
        }
        group.rollouts.push_back(std::move(rollout));
    }
    return group;
}

TrainStepRecord evaluate_step(const ToyEnvironment& env, const ToyPolicy& policy,
                              std::uint64_t root_seed, int step, int phase) {
    TrainStepRecord record;
    record.step = step;
    record.phase = phase;
    const std::uint64_t eval_seed = derive_seed(root_seed, "step-eval", static_cast<std::uint64_t>(step));
    for (Mode mode : kAllModes) {
        const auto summary = env.evaluate(policy, mode, eval_seed);
        const auto m = static_cast<std::size_t>(mode);
        record.accuracy[m] = summary.accuracy;
        record.thinking_tokens[m] = summary.mean_thinking_tokens;
        record.answer_tokens[m] = summary.mean_answer_tokens;
        record.total_tokens[m] = summary.mean_total_tokens;
    }
    return record;
}

}  // namespace

TrainingLog run_two_phase(const ToyEnvironment& env, ToyPolicy& policy, const DapoConfig& config,
                          const ModeRewardConfig& reward_config) {
    validate(config);
    validate(reward_config);
    if (!policy.stop_think_id() || !policy.eos_id()) {
        throw ValidationError("run_two_phase requires a rollout-capable policy");
    }

    TrainingLog log;
    log.phase_boundary = config.warmup_steps;
    log.metadata.emplace_back("group_aggregation", "uniform-mean-over-groups");
    log.metadata.emplace_back("seed", std::to_string(config.seed));
    log.metadata.emplace_back("learning_rate", std::to_string(config.learning_rate));
    log.metadata.emplace_back("warmup_steps", std::to_string(config.warmup_steps));
    log.metadata.emplace_back("budget_steps", std::to_string(config.budget_steps));
    log.metadata.emplace_back("group_size", std::to_string(config.group_size));
    log.metadata.emplace_back("inner_epochs", "1");

    log.steps.push_back(evaluate_step(env, policy, config.seed, 0, 0));

    const int total_steps = config.warmup_steps + config.budget_steps;
    static constexpr std::array<Mode, 1> kWarmupModes = {Mode::High};

    for (int step = 1; step <= total_steps; ++step) {
        const int phase = step <= config.warmup_steps ? 1 : 2;
        const std::span<const Mode> modes =
            phase == 1 ? std::span<const Mode>(kWarmupModes) : std::span<const Mode>(kAllModes);

        std::vector<RolloutGroup> groups;
        std::array<double, 3> reward_sum{};
        std::array<int, 3> reward_count{};
        for (std::size_t t = 0; t < env.tasks().size(); ++t) {
            for (Mode mode : modes) {
                const auto group_index =
                    static_cast<std::uint64_t>(t) * 3 + static_cast<std::uint64_t>(mode);
                Rng rng = make_rng(config.seed, "rollout", static_cast<std::uint64_t>(step),
                                   group_index);
                RolloutGroup group = sample_group(env, env.tasks()[t], policy, mode, phase, config,
                                                  reward_config, rng);
                const auto m = static_cast<std::size_t>(mode);
                for (const GroupRollout& r : group.rollouts) {
                    reward_sum[m] += r.reward.total;
                    reward_count[m] += 1;
                }
                groups.push_back(std::move(group));
            }
        }

        const int groups_total = static_cast<int>(groups.size());
        groups = dynamic_sampling_filter(std::move(groups), phase, config);
        for (RolloutGroup& group : groups) {
            compute_group_advantages(group, config.advantage_std_floor);
        }

        const PolicyStep update = surrogate_gradient(groups, policy, config);
        policy.logits() += config.learning_rate * update.gradient;
        if (phase == 1) {
            policy.broadcast_mode(Mode::High);
        }

        TrainStepRecord record = evaluate_step(env, policy, config.seed, step, phase);
        record.objective = update.objective;
        record.groups_total = groups_total;
        record.groups_kept = static_cast<int>(groups.size());
        record.tokens_processed = update.token_count;
        for (std::size_t m = 0; m < 3; ++m) {
            record.train_reward[m] =
                reward_count[m] > 0 ? reward_sum[m] / static_cast<double>(reward_count[m]) : 0.0;
        }
        log.steps.push_back(std::move(record));
    }
    return log;
}

namespace {

nlohmann::ordered_json mode_block(const TrainStepRecord& record, Mode mode) {
    const auto m = static_cast<std::size_t>(mode);
    return nlohmann::ordered_json{{"accuracy", record.accuracy[m]},
                                  {"thinking_tokens", record.thinking_tokens[m]},
                                  {"answer_tokens", record.answer_tokens[m]},
                                  {"total_tokens", record.total_tokens[m]},
                                  {"train_reward", record.train_reward[m]}};
}

}  // namespace

void write_training_log_jsonl(const TrainingLog& log, std::ostream& out) {
    nlohmann::ordered_json meta;
    meta["phase_boundary"] = log.phase_boundary;
    for (const auto& [key, value] : log.metadata) meta[key] = value;
    out << nlohmann::ordered_json{{"meta", meta}}.dump() << '\n';
    for (const TrainStepRecord& record : log.steps) {
        nlohmann::ordered_json row{{"step", record.step},
                                   {"phase", record.phase},
                                   {"objective", record.objective},
                                   {"groups_total", record.groups_total},
                                   {"groups_kept", record.groups_kept},
                                   {"tokens_processed", record.tokens_processed}};
        for (Mode mode : kAllModes) row[to_string(mode)] = mode_block(record, mode);
        out << row.dump() << '\n';
    }
}

void write_training_log_csv(const TrainingLog& log, std::ostream& out) {
    out << "step,phase,objective,groups_total,groups_kept,tokens_processed";
    for (Mode mode : kAllModes) {
        const std::string m = to_string(mode);
        out << ',' << m << "_accuracy," << m << "_thinking_tokens," << m << "_answer_tokens,"
            << m << "_total_tokens," << m << "_train_reward";
    }
    out << '\n';
    nlohmann::json num;  // reuse the JSON float formatter so CSV and JSONL agree
    for (const TrainStepRecord& record : log.steps) {
        out << record.step << ',' << record.phase << ',';
        num = record.objective;
        out << num.dump() << ',' << record.groups_total << ',' << record.groups_kept << ','
            << record.tokens_processed;
        for (Mode mode : kAllModes) {
            const auto m = static_cast<std::size_t>(mode);
            for (double value : {record.accuracy[m], record.thinking_tokens[m],
                                 record.answer_tokens[m], record.total_tokens[m],
                                 record.train_reward[m]}) {
                num = value;
                out << ',' << num.dump();
            }
        }
        out << '\n';
    }
}

}  // namespace budgetrl
