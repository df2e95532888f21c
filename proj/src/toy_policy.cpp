// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#include "budgetrl/toy_policy.hpp"

#include <algorithm>

#include "budgetrl/errors.hpp"

namespace budgetrl {

ToyPolicy::ToyPolicy(std::vector<std::string> vocabulary, Layout layout,
                     std::optional<int> stop_think_id, std::optional<int> eos_id)
    : vocabulary_(std::move(vocabulary)),
      layout_(layout),
      stop_think_id_(stop_think_id),
      eos_id_(eos_id) {
    if (vocabulary_.empty()) throw ValidationError("policy vocabulary must be nonempty");
    if (layout_.think_buckets < 1 || layout_.answer_buckets < 1 || layout_.bucket_size < 1)
        throw ValidationError("policy layout buckets and bucket_size must be >= 1");
    for (int i = 0; i < static_cast<int>(vocabulary_.size()); ++i) {
        if (!token_ids_.emplace(vocabulary_[i], i).second)
            throw ValidationError("duplicate vocabulary token: " + vocabulary_[i]);
    }
    auto check_id = [this](const std::optional<int>& id, const char* name) {
        if (id && (*id < 0 || *id >= vocab_size()))
            throw ValidationError(std::string(name) + " outside vocabulary");
    };
    check_id(stop_think_id_, "stop_think_id");
    check_id(eos_id_, "eos_id");
    const int rows = 3 * (layout_.think_buckets + layout_.answer_buckets);
    logits_ = Eigen::MatrixXd::Zero(rows, vocab_size());
}

int ToyPolicy::state_index(Mode mode, bool answer_segment, int pos_in_segment) const {
    const int buckets = answer_segment ? layout_.answer_buckets : layout_.think_buckets;
    const int bucket = std::min(pos_in_segment / layout_.bucket_size, buckets - 1);
    const int per_mode = layout_.think_buckets + layout_.answer_buckets;
    const int base = static_cast<int>(mode) * per_mode;
    return base + (answer_segment ? layout_.think_buckets + bucket : bucket);
}

Eigen::VectorXd ToyPolicy::log_probs(int state) const {
    const Eigen::VectorXd row = logits_.row(state).transpose();
    const double m = row.maxCoeff();
    const double lse = m + std::log((row.array() - m).exp().sum());
    return row.array() - lse;
}

Eigen::VectorXd ToyPolicy::probs(int state) const {
    Eigen::VectorXd p = log_probs(state).array().exp();
    p /= p.sum();  // renormalize away the exp rounding
    return p;
}

Eigen::VectorXd ToyPolicy::sequence_log_probs(Mode mode, std::span<const int> token_ids) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(token_ids.size()));
    Walker walker;
    for (std::size_t t = 0; t < token_ids.size(); ++t) {
        const int token = token_ids[t];
        if (token < 0 || token >= vocab_size())
            throw UnknownToken("token id " + std::to_string(token) + " outside vocabulary");
        if (eos_id_ && t > 0 && token_ids[t - 1] == *eos_id_)
            throw ValidationError("tokens after eos in sequence");
        out[static_cast<Eigen::Index>(t)] = log_probs(walker.state(*this, mode))[token];
        walker.advance(*this, token);
    }
    return out;
}

double ToyPolicy::sequence_nll(Mode mode, std::span<const int> token_ids) const {
    return -sequence_log_probs(mode, token_ids).sum();
}

std::vector<int> ToyPolicy::encode_trace(const ReasoningTrace& trace,
                                         const Tokenizer& tokenizer) const {
    std::vector<int> ids;
    for (const std::string& word : tokenizer.split(trace.thinking)) ids.push_back(token_id(word));
    if (stop_think_id_) ids.push_back(*stop_think_id_);
    for (const std::string& word : tokenizer.split(trace.answer)) ids.push_back(token_id(word));
    if (eos_id_) ids.push_back(*eos_id_);
    return ids;
}

int ToyPolicy::token_id(const std::string& token) const {
    auto it = token_ids_.find(token);
    if (it == token_ids_.end()) throw UnknownToken("token not in policy vocabulary: " + token);
    return it->second;
}

void ToyPolicy::broadcast_mode(Mode source) {
    const int per_mode = layout_.think_buckets + layout_.answer_buckets;
    const int src_base = static_cast<int>(source) * per_mode;
    for (Mode mode : kAllModes) {
        if (mode == source) continue;
        const int dst_base = static_cast<int>(mode) * per_mode;
        logits_.middleRows(dst_base, per_mode) = logits_.middleRows(src_base, per_mode);
    }
}

void ToyPolicy::perturb(double sigma, Rng& rng) {
    if (sigma == 0.0) return;
    for (Eigen::Index r = 0; r < logits_.rows(); ++r)
        for (Eigen::Index c = 0; c < logits_.cols(); ++c)
            logits_(r, c) += sigma * sample_normal(rng);
}

}  // namespace budgetrl
