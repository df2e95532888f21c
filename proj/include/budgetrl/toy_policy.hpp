// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "budgetrl/mode.hpp"
#include "budgetrl/rng.hpp"
#include "budgetrl/tokenizer.hpp"
#include "budgetrl/trace.hpp"

namespace budgetrl {

// Tabular softmax policy over a small vocabulary.
//
// A state is (mode, segment, position bucket): the thinking and answer
// segments have separate bucket rows, positions are bucketed by bucket_size
// with the last bucket absorbing everything beyond. Parameters are one logit
// row per state (rows = 3 * (think_buckets + answer_buckets)), so the whole
// policy is a dense Eigen matrix and a gradient has exactly the same shape.
//
// Two structural token ids are optional:
//  * stop_think_id ends the thinking segment (the textual think-close marker)
//  * eos_id ends the sequence
// A policy without them is a flat sequence model, which is what the SFT loss
// tests exercise; rollout-capable policies set both.
class ToyPolicy {
public:
    struct Layout {
        int think_buckets = 12;
        int answer_buckets = 4;
        int bucket_size = 4;
    };

    ToyPolicy(std::vector<std::string> vocabulary, Layout layout,
              std::optional<int> stop_think_id = std::nullopt,
              std::optional<int> eos_id = std::nullopt);

    int vocab_size() const noexcept { return static_cast<int>(vocabulary_.size()); }
    int state_count() const noexcept { return static_cast<int>(logits_.rows()); }
    const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }
    const Layout& layout() const noexcept { return layout_; }
    std::optional<int> stop_think_id() const noexcept { return stop_think_id_; }
    std::optional<int> eos_id() const noexcept { return eos_id_; }

    Eigen::MatrixXd& logits() noexcept { return logits_; }
    const Eigen::MatrixXd& logits() const noexcept { return logits_; }

    int state_index(Mode mode, bool answer_segment, int pos_in_segment) const;

    // Softmax row for a state; probabilities sum to 1 within 1e-12.
    Eigen::VectorXd probs(int state) const;
    // Log-softmax row (finite for all tokens).
    Eigen::VectorXd log_probs(int state) const;

    // Position-tracking cursor shared by sampling, scoring, and gradient
    // accumulation so all three walk the exact same state sequence.
    struct Walker {
        bool answer_segment = false;
        int pos = 0;

        int state(const ToyPolicy& policy, Mode mode) const {
            return policy.state_index(mode, answer_segment, pos);
        }
        void advance(const ToyPolicy& policy, int token) {
            if (!answer_segment && policy.stop_think_id_ && token == *policy.stop_think_id_) {
                answer_segment = true;
                pos = 0;
            } else {
                ++pos;
            }
        }
    };

    // Sum of -log pi(token | state) along the walk. Tokens after eos are
    // rejected (ValidationError); unknown ids are rejected too.
    double sequence_nll(Mode mode, std::span<const int> token_ids) const;

    // Per-token log-probs along the walk, same order as token_ids.
    Eigen::VectorXd sequence_log_probs(Mode mode, std::span<const int> token_ids) const;

    // Maps a trace to the policy's id sequence: thinking words, then (when
    // structural ids exist) stop_think, answer words, eos. Words not in the
    // vocabulary throw UnknownToken.
    std::vector<int> encode_trace(const ReasoningTrace& trace, const Tokenizer& tokenizer) const;

    int token_id(const std::string& token) const;  // UnknownToken when missing

    // Copies every (segment, bucket) logit row of `source` into the other two
    // modes. Used at the warmup/budget phase boundary so all modes inherit
    // the warmup-trained behavior, mirroring shared-weight training.
    void broadcast_mode(Mode source);

    // Adds iid N(0, sigma) noise to every logit (seeded; sigma 0 is a no-op).
    void perturb(double sigma, Rng& rng);

private:
    std::vector<std::string> vocabulary_;
    std::unordered_map<std::string, int> token_ids_;
    Layout layout_;
    std::optional<int> stop_think_id_;
    std::optional<int> eos_id_;
    Eigen::MatrixXd logits_;  // state_count x vocab_size, zero-initialized
};

}  // namespace budgetrl
