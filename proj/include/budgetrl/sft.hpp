// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "budgetrl/mode.hpp"
#include "budgetrl/reward.hpp"
#include "budgetrl/tokenizer.hpp"
#include "budgetrl/toy_policy.hpp"
#include "budgetrl/trace.hpp"

namespace budgetrl {

// Per-mode system prompts attached to constructed samples.
struct ModePrompts {
    std::string low = default_low();
    std::string medium = default_medium();
    std::string high = default_high();

    const std::string& get(Mode mode) const;

    static std::string default_low();
    static std::string default_medium();
    static std::string default_high();
};

// Thinking-retention ratios and the connective sentences appended after the
// cut. High keeps the full trace; Medium/Low retain floor(r * tokens) tokens.
struct TruncationConfig {
    double r_high = 1.0;  // pinned: validate() rejects anything else
    double r_med = 0.5;
    double r_low = 0.25;
    std::string connective_med =
        "I should balance depth of reasoning with efficiency, so now I'll stop thinking and "
        "deliver a well-considered response.";
    std::string connective_low =
        "I need to prioritize speed, so I should stop thinking now and provide the most direct "
        "answer possible.";
    double balance_tolerance = 1.05;  // max/min mode-count ratio for the balance check

    double ratio(Mode mode) const;
};

// Requires 0 <= r_low < r_med <= r_high == 1.0 and nonempty connectives.
void validate(const TruncationConfig& config);

struct SftSample {
    std::string id;
    std::string query;
    Mode mode = Mode::High;
    std::string system_prompt;
    ReasoningTrace target;
    bool retained = true;
};

// Arrays are indexed by Mode (low=0, medium=1, high=2).
struct DatasetManifest {
    std::array<int, 3> counts = {0, 0, 0};
    std::array<double, 3> mean_thinking_tokens = {0.0, 0.0, 0.0};
    std::array<double, 3> balance_ratio = {0.0, 0.0, 0.0};  // count / min count
    bool balanced = false;
    double tolerance = 1.05;
};

// Produces the answer section for a truncated trace. The built-in stub copies
// the source answer verbatim, which keeps desk-scale runs deterministic; a
// real deployment would plug in a model-backed generator here.
class AnswerGenerator {
public:
    virtual ~AnswerGenerator() = default;
    // May throw GeneratorFailure; any other exception is wrapped into one.
    virtual std::string generate(const ReasoningTrace& truncated,
                                 const ReasoningTrace& original) = 0;
};

class CopyAnswerGenerator final : public AnswerGenerator {
public:
    std::string generate(const ReasoningTrace&, const ReasoningTrace& original) override {
        return original.answer;
    }
};

// High returns the trace unchanged. Medium/Low keep the first
// floor(r * thinking_tokens) thinking tokens, append the mode connective as
// the final thinking text, and empty the answer pending regeneration.
ReasoningTrace truncate_thinking(const ReasoningTrace& trace, Mode mode,
                                 const TruncationConfig& config,
                                 const Tokenizer& tokenizer = Tokenizer::whitespace(),
                                 const TraceMarkers& markers = {});

// Fills the emptied answer section via the generator (answer may legitimately
// come back empty; the retention filter drops such samples later).
ReasoningTrace regenerate_answer(const ReasoningTrace& truncated, const ReasoningTrace& original,
                                 AnswerGenerator& generator,
                                 const Tokenizer& tokenizer = Tokenizer::whitespace(),
                                 const TraceMarkers& markers = {});

// Retained iff the extracted final answer matches the reference (normalized,
// case-sensitive) and the answer section is free of transition keywords.
bool filter_sample(const SftSample& sample, const std::string& reference_answer,
                   const ModeRewardConfig& reward_config = {});

struct BuildDatasetResult {
    std::vector<SftSample> samples;  // retained, balanced, ordered by (id, mode)
    DatasetManifest manifest;
};

// Full construction pass: every input trace yields up to three samples (one
// per mode; the record's own mode tag is ignored since the raw text is the
// complete source chain), filtered for answer fidelity and leak-free answers,
// then balanced 1:1:1 by seeded uniform down-sampling.
// references maps record id -> reference answer; a missing reference is a
// ValidationError, an empty corpus is EmptyCorpus.
// threads bounds the per-record fan-out; output is byte-identical for any
// thread count (the generator must be thread-safe when threads > 1).
BuildDatasetResult build_dataset(const std::vector<TraceRecord>& records,
                                 const std::map<std::string, std::string>& references,
                                 const TruncationConfig& config, const ModePrompts& prompts,
                                 AnswerGenerator& generator, std::uint64_t seed,
                                 const ModeRewardConfig& reward_config = {},
                                 const Tokenizer& tokenizer = Tokenizer::whitespace(),
                                 const TraceMarkers& markers = {}, int threads = 1);

// Mean over samples of the summed token negative log-likelihood of each
// sample's target under the policy, conditioned on the sample's mode.
double sft_loss(const std::vector<SftSample>& samples, const ToyPolicy& policy,
                const Tokenizer& tokenizer = Tokenizer::whitespace());

}  // namespace budgetrl
