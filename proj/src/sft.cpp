// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#include "budgetrl/sft.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>

#include "budgetrl/errors.hpp"
#include "budgetrl/rng.hpp"

namespace budgetrl {

std::string ModePrompts::default_low() {
    return "You have extremely limited time to think and respond to the users query. Every "
           "additional second of processing and reasoning incurs a significant resource cost, "
           "which could affect efficiency and effectiveness. Your task is to prioritize speed "
           "without sacrificing essential clarity or accuracy. Provide the most direct and "
           "concise answer possible. Avoid unnecessary steps, reflections, verification, or "
           "refinements UNLESS ABSOLUTELY NECESSARY. Your primary goal is to deliver a quick, "
           "clear and correct response.";
}

std::string ModePrompts::default_medium() {
    return "You have sufficient time to think and respond to the user's query, allowing for a "
           "more thoughtful and in-depth answer. However, be aware that the longer you take to "
           "reason and process, the greater the associated resource costs and potential "
           "consequences. While you should not rush, aim to balance the depth of your reasoning "
           "with efficiency. Prioritize providing a well-thought-out response, but do not "
           "overextend your thinking if the answer can be provided with a reasonable level of "
           "analysis. Use your reasoning time wisely, focusing on what is essential for "
           "delivering an accurate response without unnecessary delays and overthinking.";
}

std::string ModePrompts::default_high() {
    return "You have unlimited time to think and respond to the user's question. There is no "
           "need to worry about reasoning time or associated costs. Your only goal is to arrive "
           "at a reliable, correct final answer. Feel free to explore the problem from multiple "
           "angles, and try various methods in your reasoning. This includes reflecting on "
           "reasoning by trying different approaches, verifying steps from different aspects, "
           "and rethinking your conclusions as needed. You are encouraged to take the time to "
           "analyze the problem thoroughly, reflect on your reasoning promptly and test all "
           "possible solutions. Only after a deep, comprehensive thought process should you "
           "provide the final answer, ensuring it is correct and well-supported by your "
           "reasoning.";
}

const std::string& ModePrompts::get(Mode mode) const {
    switch (mode) {
        case Mode::Low: return low;
        case Mode::Medium: return medium;
        case Mode::High: return high;
    }
    return high;
}

double TruncationConfig::ratio(Mode mode) const {
    switch (mode) {
        case Mode::Low: return r_low;
        case Mode::Medium: return r_med;
        case Mode::High: return r_high;
    }
    return r_high;
}

void validate(const TruncationConfig& config) {
    if (config.r_high != 1.0)
        throw ValidationError("r_high is pinned to 1.0");
    if (!(config.r_low >= 0.0 && config.r_low < config.r_med && config.r_med <= config.r_high))
        throw ValidationError("truncation ratios must satisfy 0 <= r_low < r_med <= 1.0");
    if (config.connective_med.empty() || config.connective_low.empty())
        throw ValidationError("mode connectives must be nonempty");
    if (config.balance_tolerance < 1.0)
        throw ValidationError("balance tolerance must be >= 1.0");
}

ReasoningTrace truncate_thinking(const ReasoningTrace& trace, Mode mode,
                                 const TruncationConfig& config, const Tokenizer& tokenizer,
                                 const TraceMarkers& markers) {
    validate(config);
    if (mode == Mode::High) return trace;

    const std::vector<std::string> tokens = tokenizer.split(trace.thinking);
    // The 1e-9 nudge counters binary representation of decimal ratios
    // (0.3 * 10 must floor to 3, not 2); it cannot overshoot a true floor.
    const int keep = static_cast<int>(
        std::floor(config.ratio(mode) * static_cast<double>(tokens.size()) + 1e-9));

    std::vector<std::string> kept(tokens.begin(), tokens.begin() + keep);
    std::string thinking = join_tokens(kept);
    const std::string& connective =
        (mode == Mode::Medium) ? config.connective_med : config.connective_low;
    if (!thinking.empty()) thinking += ' ';
    thinking += connective;

    ReasoningTrace out = make_trace(thinking, "", mode, markers, tokenizer);
    return out;
}

ReasoningTrace regenerate_answer(const ReasoningTrace& truncated, const ReasoningTrace& original,
                                 AnswerGenerator& generator, const Tokenizer& tokenizer,
                                 const TraceMarkers& markers) {
    if (!truncated.answer.empty())
        throw ValidationError("regenerate_answer expects an emptied answer section");
    std::string answer;
    try {
        answer = generator.generate(truncated, original);
    } catch (const GeneratorFailure&) {
        throw;
    } catch (const std::exception& e) {
        throw GeneratorFailure(std::string("answer generator failed: ") + e.what());
    }
    return make_trace(truncated.thinking, answer, truncated.mode, markers, tokenizer);
}

bool filter_sample(const SftSample& sample, const std::string& reference_answer,
                   const ModeRewardConfig& reward_config) {
    if (task_reward(sample.target, reference_answer) != 1.0) return false;
    return !detect_leak(sample.target.answer, reward_config);
}

BuildDatasetResult build_dataset(const std::vector<TraceRecord>& records,
                                 const std::map<std::string, std::string>& references,
                                 const TruncationConfig& config, const ModePrompts& prompts,
                                 AnswerGenerator& generator, std::uint64_t seed,
                                 const ModeRewardConfig& reward_config, const Tokenizer& tokenizer,
                                 const TraceMarkers& markers, int threads) {
    if (records.empty()) throw EmptyCorpus("no input traces");
    validate(config);
    if (threads < 1) throw ValidationError("threads must be at least 1");

    // Records are expanded independently; the flatten below runs in input
    // order, so the thread count never shows up in the output.
    std::vector<std::array<std::optional<SftSample>, 3>> expanded(records.size());
    std::mutex failure_mutex;
    std::size_t failed_index = records.size();
    std::exception_ptr failure;

    auto expand_record = [&](std::size_t index) {
        const TraceRecord& record = records[index];
        auto ref = references.find(record.id);
        if (ref == references.end())
            throw ValidationError("no reference answer for trace id '" + record.id + "'");

        const ReasoningTrace source = parse_trace(record.raw_text, Mode::High, markers, tokenizer);
        std::string query = record.id;
        for (const auto& [key, value] : record.extra)
            if (key == "query") query = value;

        for (Mode mode : {Mode::High, Mode::Medium, Mode::Low}) {
            ReasoningTrace target = truncate_thinking(source, mode, config, tokenizer, markers);
            if (mode != Mode::High)
                target = regenerate_answer(target, source, generator, tokenizer, markers);

            SftSample sample;
            sample.id = record.id;
            sample.query = query;
            sample.mode = mode;
            sample.system_prompt = prompts.get(mode);
            sample.target = std::move(target);
            sample.retained = filter_sample(sample, ref->second, reward_config);
            if (sample.retained)
                expanded[index][static_cast<int>(mode)] = std::move(sample);
        }
    };

    const int workers = std::min<int>(threads, static_cast<int>(records.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < records.size(); ++i) expand_record(i);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = static_cast<std::size_t>(w); i < records.size();
                     i += static_cast<std::size_t>(workers)) {
                    try {
                        expand_record(i);
                    } catch (...) {
                        // Keep the failure from the earliest record so the
                        // reported error does not depend on scheduling.
                        std::lock_guard<std::mutex> lock(failure_mutex);
                        if (i < failed_index) {
                            failed_index = i;
                            failure = std::current_exception();
                        }
                        return;
                    }
                }
            });
        }
        for (std::thread& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    std::vector<SftSample> retained;
    for (auto& per_record : expanded) {
        for (Mode mode : {Mode::High, Mode::Medium, Mode::Low}) {
            auto& slot = per_record[static_cast<int>(mode)];
            if (slot) retained.push_back(std::move(*slot));
        }
    }

    // Balance to 1:1:1 by uniform down-sampling of over-represented modes.
    std::array<std::vector<std::size_t>, 3> by_mode;
    for (std::size_t i = 0; i < retained.size(); ++i)
        by_mode[static_cast<int>(retained[i].mode)].push_back(i);
    const std::size_t min_count =
        std::min({by_mode[0].size(), by_mode[1].size(), by_mode[2].size()});

    Rng balance_rng = make_rng(seed, "data-balance");
    std::vector<SftSample> balanced;
    for (auto& indices : by_mode) {
        // Partial Fisher-Yates: pick min_count survivors uniformly, then
        // restore input order so the draw never affects output ordering.
        for (std::size_t i = 0; i < min_count; ++i) {
            const std::size_t j = i + uniform_below(balance_rng, indices.size() - i);
            std::swap(indices[i], indices[j]);
        }
        indices.resize(min_count);
        std::sort(indices.begin(), indices.end());
        for (std::size_t idx : indices) balanced.push_back(retained[idx]);
    }

    std::sort(balanced.begin(), balanced.end(), [](const SftSample& a, const SftSample& b) {
        if (a.id != b.id) return a.id < b.id;
        return static_cast<int>(a.mode) < static_cast<int>(b.mode);
    });

    BuildDatasetResult result;
    result.samples = std::move(balanced);
    result.manifest.tolerance = config.balance_tolerance;
    std::array<double, 3> thinking_sums = {0.0, 0.0, 0.0};
    for (const SftSample& s : result.samples) {
        const int m = static_cast<int>(s.mode);
        result.manifest.counts[m] += 1;
        thinking_sums[m] += s.target.thinking_tokens;
    }
    const int min_c = *std::min_element(result.manifest.counts.begin(),
                                        result.manifest.counts.end());
    const int max_c = *std::max_element(result.manifest.counts.begin(),
                                        result.manifest.counts.end());
    for (int m = 0; m < 3; ++m) {
        if (result.manifest.counts[m] > 0)
            result.manifest.mean_thinking_tokens[m] =
                thinking_sums[m] / result.manifest.counts[m];
        result.manifest.balance_ratio[m] =
            min_c > 0 ? static_cast<double>(result.manifest.counts[m]) / min_c : 0.0;
    }
    result.manifest.balanced =
        min_c > 0 && static_cast<double>(max_c) / min_c <= config.balance_tolerance;
    return result;
}

double sft_loss(const std::vector<SftSample>& samples, const ToyPolicy& policy,
                const Tokenizer& tokenizer) {
    if (samples.empty()) throw EmptyCorpus("sft_loss over an empty sample set");
    double total = 0.0;
    for (const SftSample& sample : samples) {
        const std::vector<int> ids = policy.encode_trace(sample.target, tokenizer);
        total += policy.sequence_nll(sample.mode, ids);
    }
    return total / static_cast<double>(samples.size());
}

}  // namespace budgetrl
