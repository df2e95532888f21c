// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "budgetrl/mode.hpp"
#include "budgetrl/rng.hpp"
#include "budgetrl/toy_policy.hpp"
#include "budgetrl/trace.hpp"

namespace budgetrl {

// Synthetic arithmetic-style environment. Each task is a query with a known
// reference answer; a rollout is correct with probability given by a
// difficulty-dependent curve of the reasoning length, otherwise the final
// answer is corrupted. Everything is driven by explicit seeds.

enum class CurveKind { Exp, Step };

CurveKind curve_from_string(const std::string& name);
std::string to_string(CurveKind kind);

struct ToyEnvConfig {
  int num_tasks = 2;
  // Cycled across tasks when shorter than num_tasks.
  std::vector<int> difficulties = {2, 2};
  CurveKind curve = CurveKind::Exp;
  // Lower bound of the success probability; the curve interpolates from the
  // floor to 1 as the reasoning length grows.
  double curve_floor = 0.5;
  // Reasoning filler tokens that land in the answer section still count
  // toward the effective reasoning length, scaled by this weight. At the
  // default 0 answer rambling is pure overhead, so only the leak penalty and
  // the length reward push back on it.
  double answer_reasoning_weight = 0.0;
  int token_cap = 256;
  // Vocabulary word used as the reasoning step; deliberately also a default
  // leak keyword so the leak penalty can see answer-section reasoning.
  std::string filler_token = "wait";
  // Policy shape for make_policy.
  int think_buckets = 12;
  int answer_buckets = 4;
  int bucket_size = 4;
  double init_noise = 0.0;
  // Evaluation sample count per task; sized so logged per-mode curves are
  // smooth enough to compare phase ends against phase peaks.
  int eval_samples = 192;
};

void validate_env(const ToyEnvConfig& config);

// Parses a key-value file ("key = value", '#' comments, blank lines ok).
// Unknown keys are rejected. Difficulties are comma-separated.
ToyEnvConfig load_env_config(const std::string& path);

struct ToyTask {
  std::string id;
  std::string query;
  std::string reference_answer;
  int difficulty = 1;
};

struct RolloutResult {
  std::vector<int> tokens;           // policy-emitted ids, incl. structural
  std::vector<double> log_probs;     // one per emitted token
  ReasoningTrace trace;              // rendered text, parsed back
  double effective_length = 0.0;
  bool correct = false;
  int answer_filler_tokens = 0;
};

class ToyEnvironment {
 public:
  ToyEnvironment(const ToyEnvConfig& config, std::uint64_t seed);

  const ToyEnvConfig& config() const { return config_; }
  const std::vector<ToyTask>& tasks() const { return tasks_; }
  const ToyTask& task(std::size_t index) const;

  // P(correct | effective reasoning length, difficulty).
  double success_probability(double effective_length, int difficulty) const;

  // Samples one trajectory for `task` under `policy` in `mode`. The policy
  // walks until <eos>; the environment then appends the boxed final answer,
  // corrupted with probability 1 - success_probability. Throws
  // RolloutOverflow if the policy emits token_cap tokens without stopping.
  RolloutResult rollout(const ToyTask& task, const ToyPolicy& policy,
                        Mode mode, Rng& rng) const;

  // Task-major sample grid: n_samples rollouts per task, each drawn from its
  // own (task, sample) seed substream, so sample k is identical no matter how
  // many samples follow it and parallel generation stays reproducible.
  std::vector<RolloutResult> sample_rollouts(const ToyPolicy& policy, Mode mode,
                                             std::uint64_t seed, int n_samples) const;

  // Mean accuracy / thinking tokens / answer tokens over the sample grid.
  struct EvalSummary {
    double accuracy = 0.0;
    double mean_thinking_tokens = 0.0;
    double mean_answer_tokens = 0.0;
    double mean_total_tokens = 0.0;
    int samples = 0;
  };
  EvalSummary evaluate(const ToyPolicy& policy, Mode mode, std::uint64_t seed,
                       int n_samples) const;
  // Same, with n_samples = config().eval_samples.
  EvalSummary evaluate(const ToyPolicy& policy, Mode mode,
                       std::uint64_t seed) const;

  // Fresh policy shaped for this environment: vocabulary {filler, <stop>,
  // <eos>} with structural ids wired. Thinking logits start at zero (plus
  // init_noise jitter); answer rows start with the filler logit raised by
  // kAnswerFillerBias so an untrained policy rambles past the boxed value.
  // Training has to actively learn to close the answer, which keeps the
  // answer-leak channel alive instead of vanishing at initialization.
  ToyPolicy make_policy(std::uint64_t seed) const;

  static constexpr int kContinueId = 0;
  static constexpr int kStopThinkId = 1;
  static constexpr int kEosId = 2;
  static constexpr double kAnswerFillerBias = 1.5;

 private:
  ToyEnvConfig config_;
  std::uint64_t seed_ = 0;
  std::vector<ToyTask> tasks_;
};

}  // namespace budgetrl
