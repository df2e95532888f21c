// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "budgetrl/errors.hpp"
#include "budgetrl/reward.hpp"
#include "budgetrl/rng.hpp"
#include "budgetrl/trace.hpp"

using namespace budgetrl;

namespace {

// Trace with an exact total token count, correctness, and leak status.
ReasoningTrace controlled_trace(int total_tokens, bool correct, bool leaked, Mode mode) {
    std::string answer = correct ? "\\boxed{7}" : "\\boxed{8}";
    int answer_tokens = 1;
    if (leaked) {
        answer += " wait";
        answer_tokens = 2;
    }
    std::string thinking;
    for (int i = 0; i < total_tokens - answer_tokens; ++i) {
        if (i > 0) thinking += ' ';
        thinking += "t";
    }
    ReasoningTrace t = make_trace(thinking, answer, mode);
    REQUIRE(t.total_tokens == total_tokens);
    return t;
}

const std::string kReference = "7";

}  // namespace

TEST_CASE("task reward exact answer matching") {
    CHECK(task_reward(make_trace("", "\\boxed{601}", Mode::High), "601") == 1.0);
    CHECK(task_reward(make_trace("", "\\boxed{600}", Mode::High), "601") == 0.0);
    CHECK(task_reward(make_trace("", "", Mode::High), "601") == 0.0);
    // reference side is normalized too
    CHECK(task_reward(make_trace("", "\\boxed{601}", Mode::High), "$601$") == 1.0);
    // comparison is case-sensitive post-normalization
    CHECK(task_reward(make_trace("", "\\boxed{Abc}", Mode::High), "abc") == 0.0);
}

TEST_CASE("final answer extraction") {
    CHECK(extract_final_answer("so \\boxed{1} then \\boxed{2}") == "2");
    CHECK(extract_final_answer("\\boxed{\\frac{1}{2}}") == "\\frac{1}{2}");
    CHECK(extract_final_answer("\\boxed{1} \\boxed{2") == "1");  // unbalanced tail ignored
    CHECK(extract_final_answer("  42  ") == "42");               // no boxed form: trimmed text
    CHECK(extract_final_answer("") == "");
}

TEST_CASE("answer normalization strips wrappers") {
    CHECK(normalize_answer("$x$") == "x");
    CHECK(normalize_answer("\\(y\\)") == "y");
    CHECK(normalize_answer("\\boxed{ 5 }") == "5");
    CHECK(normalize_answer("$\\boxed{601}$") == "601");
    CHECK(normalize_answer("  plain  ") == "plain");
    CHECK(normalize_answer("$") == "$");  // lone dollar is not a wrapper
}

TEST_CASE("length lambda boundary values") {
    CHECK(length_lambda(100, 100, 500) == 0.5);
    CHECK(length_lambda(500, 100, 500) == -0.5);
    CHECK(length_lambda(300, 100, 500) == 0.0);
    CHECK(length_lambda(200, 100, 500) == 0.25);  // 100/400 is exact in binary
    CHECK(length_lambda(250, 250, 250) == 0.0);  // degenerate group
    CHECK_THROWS_AS(length_lambda(99, 100, 500), OutOfGroupRange);
    CHECK_THROWS_AS(length_lambda(501, 100, 500), OutOfGroupRange);
    CHECK_THROWS_AS(length_lambda(300, 500, 100), OutOfGroupRange);
}

TEST_CASE("length reward gates on correctness") {
    CHECK(length_reward(0.5, 1.0) == 0.5);
    CHECK(length_reward(0.5, 0.0) == 0.0);
    CHECK(length_reward(-0.3, 0.0) == -0.3);
    CHECK(length_reward(-0.3, 1.0) == -0.3);
    CHECK(length_reward(0.0, 0.0) == 0.0);
}

TEST_CASE("leak detector whole-word matching") {
    const ModeRewardConfig cfg;
    CHECK(detect_leak("But wait, let's check $d=0$ separately.", cfg));
    CHECK_FALSE(detect_leak("The solutions are all triples where x divides y.", cfg));
    CHECK_FALSE(detect_leak("The waiter served dinner.", cfg));  // no partial-word match
    CHECK(detect_leak("ACTUALLY, no.", cfg));                    // case-insensitive
    CHECK(detect_leak("Hold on, this needs a second pass.", cfg));
    CHECK_FALSE(detect_leak("the call is on hold.", cfg));  // word order matters
    CHECK(detect_leak("let me think about it", cfg));
    CHECK_FALSE(detect_leak("let me first think about it", cfg));  // must be contiguous
    CHECK_FALSE(detect_leak("", cfg));
}

TEST_CASE("leak detector binds apostrophes into words") {
    ModeRewardConfig cfg;
    cfg.leak_keywords = {"let's"};
    CHECK(detect_leak("ok, let's go", cfg));
    CHECK_FALSE(detect_leak("ok, lets go", cfg));
}

TEST_CASE("leak reward values") {
    const ModeRewardConfig cfg;
    CHECK(leak_reward("wait, no", cfg) == -0.5);
    CHECK(leak_reward("a clean final statement", cfg) == 0.5);
    CHECK(leak_reward("", cfg) == 0.5);
}

TEST_CASE("composite reward assembles the three components") {
    const ModeRewardConfig cfg;

    // correct, lambda=0.5, Low (alpha 1.0), clean
    {
        const ReasoningTrace t = controlled_trace(10, true, false, Mode::Low);
        const RewardBreakdown b = composite_reward(t, kReference, {10, 20}, cfg);
        CHECK(b.task == 1.0);
        CHECK(b.lambda == 0.5);
        CHECK(b.leak == 0.5);
        CHECK(b.total == 2.0);
    }
    // correct, lambda=0.5, High (alpha 0.0), leaked
    {
        const ReasoningTrace t = controlled_trace(10, true, true, Mode::High);
        const RewardBreakdown b = composite_reward(t, kReference, {10, 20}, cfg);
        CHECK(b.task == 1.0);
        CHECK(b.leak == -0.5);
        CHECK(b.total == 0.5);
    }
    // incorrect, lambda=-0.5, Medium (alpha 0.5), clean
    {
        const ReasoningTrace t = controlled_trace(20, false, false, Mode::Medium);
        const RewardBreakdown b = composite_reward(t, kReference, {10, 20}, cfg);
        CHECK(b.task == 0.0);
        CHECK(b.lambda == -0.5);
        CHECK(b.length == -0.5);
        CHECK(b.total == 0.25);
    }
}

TEST_CASE("composite reward: all task/leak/mode combinations at pinned lambdas") {
    const ModeRewardConfig cfg;
    const double alphas[3] = {cfg.alpha_low, cfg.alpha_med, cfg.alpha_high};
    const Mode modes[3] = {Mode::Low, Mode::Medium, Mode::High};
    // group [10, 20]: totals 10/15/20 hit lambda +0.5 / 0 / -0.5 exactly
    const int totals[3] = {10, 15, 20};
    const double lambdas[3] = {0.5, 0.0, -0.5};

    for (int m = 0; m < 3; ++m) {
        for (int c = 0; c <= 1; ++c) {
            for (int l = 0; l <= 1; ++l) {
                for (int k = 0; k < 3; ++k) {
                    const ReasoningTrace t = controlled_trace(totals[k], c == 1, l == 1, modes[m]);
                    const RewardBreakdown b = composite_reward(t, kReference, {10, 20}, cfg);
                    const double expect_task = c;
                    const double expect_length =
                        c == 1 ? lambdas[k] : std::min(0.0, lambdas[k]);
                    const double expect_leak = l == 1 ? -0.5 : 0.5;
                    // exact equality: every term is a small dyadic rational
                    CHECK(b.total == expect_task + alphas[m] * expect_length + expect_leak);
                    CHECK(b.lambda == lambdas[k]);
                }
            }
        }
    }
}

TEST_CASE("composite reward ignores keywords inside the thinking section") {
    const ModeRewardConfig cfg;
    const ReasoningTrace t =
        make_trace("wait actually however", "\\boxed{7}", Mode::Low);
    const RewardBreakdown b = composite_reward(t, kReference, {0, 10}, cfg);
    CHECK(b.leak == 0.5);
}

TEST_CASE("lambda properties over random groups") {
    Rng rng = make_rng(23, "reward-prop");
    for (int g = 0; g < 200; ++g) {
        const std::size_t n = 2 + uniform_below(rng, 15);
        std::vector<double> lens;
        for (std::size_t i = 0; i < n; ++i)
            lens.push_back(static_cast<double>(1 + uniform_below(rng, 400)));
        const auto [mn_it, mx_it] = std::minmax_element(lens.begin(), lens.end());
        const double mn = *mn_it, mx = *mx_it;

        const double scale = 0.25 + 4.0 * uniform01(rng);
        const double shift = 1000.0 * uniform01(rng);
        for (double len : lens) {
            const double lam = length_lambda(len, mn, mx);
            CHECK(lam >= -0.5);
            CHECK(lam <= 0.5);
            if (mn != mx) {
                if (len == mn) CHECK(lam == 0.5);
                if (len == mx) CHECK(lam == -0.5);
            }
            // invariant under affine rescaling of the whole group
            const double lam2 =
                length_lambda(scale * len + shift, scale * mn + shift, scale * mx + shift);
            CHECK(std::abs(lam2 - lam) <= 1e-12);
        }
        // strict monotonicity on sorted distinct lengths
        std::sort(lens.begin(), lens.end());
        lens.erase(std::unique(lens.begin(), lens.end()), lens.end());
        for (std::size_t i = 1; i < lens.size(); ++i) {
            CHECK(length_lambda(lens[i], mn, mx) < length_lambda(lens[i - 1], mn, mx));
        }
    }
}

TEST_CASE("high mode totals are independent of lambda") {
    const ModeRewardConfig cfg;
    const RewardBreakdown shortest =
        composite_reward(controlled_trace(10, true, false, Mode::High), kReference, {10, 20}, cfg);
    const RewardBreakdown longest =
        composite_reward(controlled_trace(20, true, false, Mode::High), kReference, {10, 20}, cfg);
    CHECK(shortest.lambda != longest.lambda);
    CHECK(shortest.total == longest.total);
}

TEST_CASE("config validation") {
    ModeRewardConfig cfg;
    cfg.alpha_med = -0.1;
    CHECK_THROWS_AS(validate(cfg), ValidationError);
    cfg = ModeRewardConfig{};
    cfg.leak_keywords.clear();
    CHECK_THROWS_AS(validate(cfg), ValidationError);
    CHECK_NOTHROW(validate(ModeRewardConfig{}));
}

TEST_CASE("keyword file loading") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "budgetrl-test-reward";
    fs::create_directories(dir);

    const fs::path good = dir / "keywords.txt";
    {
        std::ofstream out(good);
        out << "# transition cues\n"
            << "Wait\n"
            << "\n"
            << "Let me think   # multi-word entry\n";
    }
    const std::vector<std::string> kws = load_keywords(good.string());
    REQUIRE(kws.size() == 2);
    CHECK(kws[0] == "Wait");
    CHECK(kws[1] == "Let me think");

    const fs::path empty = dir / "empty.txt";
    { std::ofstream out(empty); out << "# nothing but comments\n\n"; }
    CHECK_THROWS_AS(load_keywords(empty.string()), ValidationError);
    CHECK_THROWS_AS(load_keywords((dir / "missing.txt").string()), IoError);

    fs::remove_all(dir);
}
