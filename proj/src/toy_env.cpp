// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#include "budgetrl/toy_env.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "budgetrl/errors.hpp"

namespace budgetrl {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

int parse_int(const std::string& value, const std::string& where) {
    try {
        std::size_t used = 0;
        const int parsed = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing junk");
        return parsed;
    } catch (const std::exception&) {
        throw ValidationError("expected an integer for " + where + ", got '" + value + "'");
    }
}

double parse_double(const std::string& value, const std::string& where) {
    try {
        std::size_t used = 0;
        const double parsed = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing junk");
        return parsed;
    } catch (const std::exception&) {
        throw ValidationError("expected a number for " + where + ", got '" + value + "'");
    }
}

std::vector<int> parse_int_list(const std::string& value, const std::string& where) {
    std::vector<int> out;
    std::stringstream ss(value);
    std::string part;
    while (std::getline(ss, part, ',')) {
        out.push_back(parse_int(trim(part), where));
    }
    return out;
}

}  // namespace

CurveKind curve_from_string(const std::string& name) {
    if (name == "exp") return CurveKind::Exp;
    if (name == "step") return CurveKind::Step;
    throw ParseError("unknown curve kind '" + name + "' (expected exp or step)");
}

std::string to_string(CurveKind kind) {
    return kind == CurveKind::Exp ? "exp" : "step";
}

void validate_env(const ToyEnvConfig& config) {
    if (config.num_tasks < 1) throw ValidationError("num_tasks must be at least 1");
    if (config.difficulties.empty()) throw ValidationError("difficulties must not be empty");
    for (int d : config.difficulties) {
        if (d < 1) throw ValidationError("difficulties must be positive, got " + std::to_string(d));
    }
    if (config.curve_floor < 0.0 || config.curve_floor > 1.0) {
        throw ValidationError("curve_floor must lie in [0, 1]");
    }
    if (config.answer_reasoning_weight < 0.0) {
        throw ValidationError("answer_reasoning_weight must be non-negative");
    }
    if (config.token_cap < 4) throw ValidationError("token_cap must be at least 4");
    if (config.filler_token.empty()) throw ValidationError("filler_token must not be empty");
    for (char c : config.filler_token) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            throw ValidationError("filler_token must not contain whitespace");
        }
    }
    if (config.filler_token == "<stop>" || config.filler_token == "<eos>") {
        throw ValidationError("filler_token collides with a structural token");
    }
    if (config.think_buckets < 1 || config.answer_buckets < 1 || config.bucket_size < 1) {
        throw ValidationError("policy bucket shape must be positive");
    }
    if (config.init_noise < 0.0) throw ValidationError("init_noise must be non-negative");
    if (config.eval_samples < 1) throw ValidationError("eval_samples must be at least 1");
}

ToyEnvConfig load_env_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open environment config '" + path + "'");
    ToyEnvConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        const std::string where = path + ":" + std::to_string(line_no);
        if (eq == std::string::npos) {
            throw ValidationError("expected 'key = value' at " + where);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ValidationError("empty key or value at " + where);
        }
        if (key == "num_tasks") {
            config.num_tasks = parse_int(value, where);
        } else if (key == "difficulties") {
            config.difficulties = parse_int_list(value, where);
        } else if (key == "curve") {
            config.curve = curve_from_string(value);
        } else if (key == "curve_floor") {
            config.curve_floor = parse_double(value, where);
        } else if (key == "answer_reasoning_weight") {
            config.answer_reasoning_weight = parse_double(value, where);
        } else if (key == "token_cap") {
            config.token_cap = parse_int(value, where);
        } else if (key == "filler_token") {
            config.filler_token = value;
        } else if (key == "think_buckets") {
            config.think_buckets = parse_int(value, where);
        } else if (key == "answer_buckets") {
            config.answer_buckets = parse_int(value, where);
        } else if (key == "bucket_size") {
            config.bucket_size = parse_int(value, where);
        } else if (key == "init_noise") {
            config.init_noise = parse_double(value, where);
        } else if (key == "eval_samples") {
            config.eval_samples = parse_int(value, where);
        } else {
            throw ValidationError("unknown environment key '" + key + "' at " + where);
        }
    }
    validate_env(config);
    return config;
}

ToyEnvironment::ToyEnvironment(const ToyEnvConfig& config, std::uint64_t seed)
    : config_(config), seed_(seed) {
    validate_env(config_);
    tasks_.reserve(static_cast<std::size_t>(config_.num_tasks));
    for (int i = 0; i < config_.num_tasks; ++i) {
        Rng rng = make_rng(seed_, "task-answer", static_cast<std::uint64_t>(i));
        const int value = 100 + static_cast<int>(uniform_below(rng, 900));
        char id[16];
        std::snprintf(id, sizeof(id), "task-%04d", i + 1);
        ToyTask task;
        task.id = id;
        task.difficulty = config_.difficulties[static_cast<std::size_t>(i) % config_.difficulties.size()];
        task.query = "Apply the update rule " + std::to_string(task.difficulty) +
                     " times to the seed of " + task.id + " and report the final register value.";
        task.reference_answer = std::to_string(value);
        tasks_.push_back(std::move(task));
    }
}

const ToyTask& ToyEnvironment::task(std::size_t index) const {
    if (index >= tasks_.size()) {
        throw ValidationError("task index " + std::to_string(index) + " out of range (have " +
                              std::to_string(tasks_.size()) + ")");
    }
    return tasks_[index];
}

double ToyEnvironment::success_probability(double effective_length, int difficulty) const {
    const double len = std::max(0.0, effective_length);
    const double d = static_cast<double>(std::max(1, difficulty));
    switch (config_.curve) {
        case CurveKind::Step:
            return len >= d ? 1.0 : config_.curve_floor;
        case CurveKind::Exp:
        default:
            return config_.curve_floor + (1.0 - config_.curve_floor) * (1.0 - std::exp(-len / d));
    }
}

RolloutResult ToyEnvironment::rollout(const ToyTask& task, const ToyPolicy& policy,
                                      Mode mode, Rng& rng) const {
    if (!policy.stop_think_id() || !policy.eos_id()) {
        throw ValidationError("rollout requires a policy with stop_think and eos ids");
    }
    const int stop_id = *policy.stop_think_id();
    const int eos_id = *policy.eos_id();

    RolloutResult out;
    ToyPolicy::Walker walker;
    std::vector<std::string> think_words;
    std::vector<std::string> answer_words;
    int think_tokens = 0;
    int answer_fillers = 0;

    for (;;) {
        if (static_cast<int>(out.tokens.size()) >= config_.token_cap) {
            throw RolloutOverflow("rollout for " + task.id + " exceeded the token cap of " +
                                  std::to_string(config_.token_cap));
        }
        const int state = walker.state(policy, mode);
        const Eigen::VectorXd lp = policy.log_probs(state);
        const int token = sample_categorical(rng, policy.probs(state));
        out.tokens.push_back(token);
        out.log_probs.push_back(lp(token));
        const bool in_answer = walker.answer_segment;
        walker.advance(policy, token);
        if (token == eos_id) break;
        if (token == stop_id && !in_answer) continue;  // structural, not text
        const std::string& word = policy.vocabulary()[static_cast<std::size_t>(token)];
        if (in_answer) {
            answer_words.push_back(word);
            if (word == config_.filler_token) ++answer_fillers;
        } else {
            think_words.push_back(word);
            ++think_tokens;
        }
    }

    out.effective_length = static_cast<double>(think_tokens) +
                           config_.answer_reasoning_weight * static_cast<double>(answer_fillers);
    out.answer_filler_tokens = answer_fillers;

    // Correctness is decided by one uniform draw after the walk completes.
    const double p = success_probability(out.effective_length, task.difficulty);
    out.correct = uniform01(rng) < p;
    long long value = std::stoll(task.reference_answer);
    if (!out.correct) value += 1;
    answer_words.push_back("\\boxed{" + std::to_string(value) + "}");

    out.trace = make_trace(join_tokens(think_words), join_tokens(answer_words), mode);
    return out;
}

std::vector<RolloutResult> ToyEnvironment::sample_rollouts(const ToyPolicy& policy, Mode mode,
                                                           std::uint64_t seed,
                                                           int n_samples) const {
    if (n_samples < 1) throw ValidationError("n_samples must be at least 1");
    const std::string stream = "eval-" + to_string(mode);
    std::vector<RolloutResult> out;
    out.reserve(tasks_.size() * static_cast<std::size_t>(n_samples));
    for (std::size_t t = 0; t < tasks_.size(); ++t) {
        for (int s = 0; s < n_samples; ++s) {
            Rng rng = make_rng(seed, stream, static_cast<std::uint64_t>(t),
                               static_cast<std::uint64_t>(s));
            out.push_back(rollout(tasks_[t], policy, mode, rng));
        }
    }
    return out;
}

ToyEnvironment::EvalSummary ToyEnvironment::evaluate(const ToyPolicy& policy, Mode mode,
                                                     std::uint64_t seed, int n_samples) const {
    const std::vector<RolloutResult> rollouts = sample_rollouts(policy, mode, seed, n_samples);
    EvalSummary summary;
    double correct = 0.0;
    double thinking = 0.0;
    double answer = 0.0;
    double total = 0.0;
    for (const RolloutResult& r : rollouts) {
        correct += r.correct ? 1.0 : 0.0;
        thinking += static_cast<double>(r.trace.thinking_tokens);
        answer += static_cast<double>(r.trace.answer_tokens);
        total += static_cast<double>(r.trace.total_tokens);
    }
    summary.samples = static_cast<int>(rollouts.size());
    const double n = static_cast<double>(summary.samples);
    summary.accuracy = correct / n;
    summary.mean_thinking_tokens = thinking / n;
    summary.mean_answer_tokens = answer / n;
    summary.mean_total_tokens = total / n;
    return summary;
}

ToyEnvironment::EvalSummary ToyEnvironment::evaluate(const ToyPolicy& policy, Mode mode,
                                                     std::uint64_t seed) const {
    return evaluate(policy, mode, seed, config_.eval_samples);
}

ToyPolicy ToyEnvironment::make_policy(std::uint64_t seed) const {
    ToyPolicy::Layout layout;
    layout.think_buckets = config_.think_buckets;
    layout.answer_buckets = config_.answer_buckets;
    layout.bucket_size = config_.bucket_size;
    ToyPolicy policy({config_.filler_token, "<stop>", "<eos>"}, layout, kStopThinkId, kEosId);
    // Answer rows start filler-biased: an untrained policy rambles past the
    // boxed value, so closing the answer promptly is learned behavior (the
    // leak penalty drives it quickly, the length reward slowly). Without the
    // bias the answer-leak channel would be nearly extinct at initialization.
    for (Mode mode : kAllModes) {
        for (int bucket = 0; bucket < layout.answer_buckets; ++bucket) {
            const int state = policy.state_index(mode, true, bucket * layout.bucket_size);
            policy.logits()(state, kContinueId) += kAnswerFillerBias;
        }
    }
    if (config_.init_noise > 0.0) {
        Rng rng = make_rng(seed, "policy-init");
        policy.perturb(config_.init_noise, rng);
    }
    return policy;
}

}  // namespace budgetrl
