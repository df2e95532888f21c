// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#include "budgetrl/reward.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>

#include "budgetrl/errors.hpp"

namespace budgetrl {
namespace {

bool is_word_char(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
           c == '\'' || c >= 0x80;
}

char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

// Lowercased word sequence; punctuation splits, apostrophes bind ("let's").
std::vector<std::string> leak_words(const std::string& text) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_word_char(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && is_word_char(text[i])) ++i;
        if (i > start) {
            std::string w = text.substr(start, i - start);
            std::transform(w.begin(), w.end(), w.begin(), ascii_lower);
            words.push_back(std::move(w));
        }
    }
    return words;
}

std::string trim(const std::string& s) {
    std::size_t begin = 0, end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

// Content of the \boxed{...} starting at `pos` (pos points at the backslash),
// or nullopt when braces never balance.
std::optional<std::string> boxed_content_at(const std::string& s, std::size_t pos) {
    static const std::string kPrefix = "\\boxed{";
    std::size_t i = pos + kPrefix.size();
    int depth = 1;
    std::string content;
    while (i < s.size()) {
        char c = s[i];
        if (c == '{') ++depth;
        if (c == '}') {
            --depth;
            if (depth == 0) return content;
        }
        content += c;
        ++i;
    }
    return std::nullopt;
}

}  // namespace

std::vector<std::string> ModeRewardConfig::default_leak_keywords() {
    return {"Wait", "Let me think", "Actually", "Alternatively",
            "However", "Hold on", "Let me reconsider"};
}

double ModeRewardConfig::alpha(Mode mode) const {
    switch (mode) {
        case Mode::Low: return alpha_low;
        case Mode::Medium: return alpha_med;
        case Mode::High: return alpha_high;
    }
    return alpha_high;
}

void validate(const ModeRewardConfig& config) {
    if (config.alpha_high < 0.0 || config.alpha_med < 0.0 || config.alpha_low < 0.0)
        throw ValidationError("reward alphas must be nonnegative");
    if (config.leak_keywords.empty())
        throw ValidationError("leak keyword list must be nonempty");
}

std::string extract_final_answer(const std::string& answer_section) {
    static const std::string kPrefix = "\\boxed{";
    std::optional<std::string> last;
    for (std::size_t pos = answer_section.find(kPrefix); pos != std::string::npos;
         pos = answer_section.find(kPrefix, pos + 1)) {
        if (auto content = boxed_content_at(answer_section, pos)) last = std::move(content);
    }
    if (last) return *last;
    return trim(answer_section);
}

std::string normalize_answer(const std::string& text) {
    std::string s = trim(text);
    bool changed = true;
    while (changed && !s.empty()) {
        changed = false;
        if (s.size() >= 2 && s.front() == '$' && s.back() == '$') {
            s = trim(s.substr(1, s.size() - 2));
            changed = true;
            continue;
        }
        if (s.size() >= 4 && s.rfind("\\(", 0) == 0 && s.compare(s.size() - 2, 2, "\\)") == 0) {
            s = trim(s.substr(2, s.size() - 4));
            changed = true;
            continue;
        }
        static const std::string kPrefix = "\\boxed{";
        if (s.rfind(kPrefix, 0) == 0 && s.back() == '}') {
            if (auto content = boxed_content_at(s, 0);
                content && kPrefix.size() + content->size() + 1 == s.size()) {
                s = trim(*content);
                changed = true;
            }
        }
    }
    return s;
}

double task_reward(const ReasoningTrace& trace, const std::string& reference_answer) {
    const std::string extracted = normalize_answer(extract_final_answer(trace.answer));
    const std::string reference = normalize_answer(reference_answer);
    if (extracted.empty()) return 0.0;
    return extracted == reference ? 1.0 : 0.0;
}

double length_lambda(double len, double len_min, double len_max) {
    if (len_max < len_min)
        throw OutOfGroupRange("group length bounds inverted");
    if (len < len_min || len > len_max)
        throw OutOfGroupRange("length " + std::to_string(len) + " outside group range [" +
                              std::to_string(len_min) + ", " + std::to_string(len_max) + "]");
    if (len_max == len_min) return 0.0;  // degenerate group: no length signal
    return 0.5 - (len - len_min) / (len_max - len_min);
}

double length_reward(double lambda, double task) {
    return task == 1.0 ? lambda : std::min(0.0, lambda);
}

bool detect_leak(const std::string& answer_section, const ModeRewardConfig& config) {
    validate(config);
    const std::vector<std::string> words = leak_words(answer_section);
    for (const std::string& keyword : config.leak_keywords) {
        const std::vector<std::string> pattern = leak_words(keyword);
        if (pattern.empty() || pattern.size() > words.size()) continue;
        for (std::size_t start = 0; start + pattern.size() <= words.size(); ++start) {
            if (std::equal(pattern.begin(), pattern.end(), words.begin() + start)) return true;
        }
    }
    return false;
}

double leak_reward(const std::string& answer_section, const ModeRewardConfig& config) {
    return detect_leak(answer_section, config) ? config.leak_penalty : config.leak_reward;
}

RewardBreakdown composite_reward(const ReasoningTrace& trace, const std::string& reference_answer,
                                 const GroupLengthBounds& group, const ModeRewardConfig& config) {
    RewardBreakdown b;
    b.task = task_reward(trace, reference_answer);
    b.lambda = length_lambda(static_cast<double>(trace.total_tokens), group.len_min, group.len_max);
    b.length = length_reward(b.lambda, b.task);
    b.leak = leak_reward(trace.answer, config);
    b.total = b.task + config.alpha(trace.mode) * b.length + b.leak;
    return b;
}

std::vector<std::string> load_keywords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open keyword file: " + path);
    std::vector<std::string> keywords;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (!line.empty()) keywords.push_back(line);
    }
    if (keywords.empty()) throw ValidationError("keyword file has no keywords: " + path);
    return keywords;
}

}  // namespace budgetrl
