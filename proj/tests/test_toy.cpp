// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "budgetrl/dapo.hpp"
#include "budgetrl/errors.hpp"
#include "budgetrl/reward.hpp"
#include "budgetrl/rng.hpp"
#include "budgetrl/toy_env.hpp"

using namespace budgetrl;

namespace {

// Forces one token at a (mode, segment, position) state. Logit 50 leaves the
// alternatives ~e^-50, far below anything the test draws could ever hit.
void pin_row(ToyPolicy& policy, Mode mode, bool answer_segment, int pos, int token) {
    const int state = policy.state_index(mode, answer_segment, pos);
    policy.logits().row(state).setZero();
    policy.logits()(state, token) = 50.0;
}

// Policy that thinks exactly `think_len` filler tokens then stops, and closes
// the answer immediately after `answer_fillers` filler tokens. Requires
// bucket_size == 1 and enough buckets to give every position its own row.
ToyPolicy fixed_length_policy(const ToyEnvironment& env, int think_len, int answer_fillers) {
    ToyPolicy policy = env.make_policy(0);
    REQUIRE(env.config().bucket_size == 1);
    REQUIRE(think_len < env.config().think_buckets);
    REQUIRE(answer_fillers < env.config().answer_buckets);
    for (Mode mode : kAllModes) {
        for (int pos = 0; pos < env.config().think_buckets; ++pos) {
            pin_row(policy, mode, false, pos,
                    pos < think_len ? ToyEnvironment::kContinueId : ToyEnvironment::kStopThinkId);
        }
        for (int pos = 0; pos < env.config().answer_buckets; ++pos) {
            pin_row(policy, mode, true, pos,
                    pos < answer_fillers ? ToyEnvironment::kContinueId : ToyEnvironment::kEosId);
        }
    }
    return policy;
}

ToyEnvConfig small_env_config() {
    ToyEnvConfig ec;
    ec.num_tasks = 2;
    ec.difficulties = {2, 5};
    ec.think_buckets = 8;
    ec.answer_buckets = 4;
    ec.bucket_size = 1;
    ec.token_cap = 64;
    ec.eval_samples = 8;
    return ec;
}

}  // namespace

TEST_CASE("environment config validation") {
    ToyEnvConfig ec;
    CHECK_NOTHROW(validate_env(ec));
    ec.num_tasks = 0;
    CHECK_THROWS_AS(validate_env(ec), ValidationError);
    ec = ToyEnvConfig{};
    ec.difficulties = {};
    CHECK_THROWS_AS(validate_env(ec), ValidationError);
    ec = ToyEnvConfig{};
    ec.difficulties = {2, 0};
    CHECK_THROWS_AS(validate_env(ec), ValidationError);
    ec = ToyEnvConfig{};
    ec.curve_floor = 1.5;
    CHECK_THROWS_AS(validate_env(ec), ValidationError);
    ec = ToyEnvConfig{};
    ec.answer_reasoning_weight = -1.0;
    CHECK_THROWS_AS(validate_env(ec), ValidationError);
    ec = ToyEnvConfig{};
    ec.token_cap = 3;
    CHECK_THROWS_AS(validate_env(ec), ValidationError);
    ec = ToyEnvConfig{};
    ec.filler_token = "two words";
    CHECK_THROWS_AS(validate_env(ec), ValidationError);
    ec = ToyEnvConfig{};
    ec.filler_token = "<eos>";
    CHECK_THROWS_AS(validate_env(ec), ValidationError);
    ec = ToyEnvConfig{};
    ec.eval_samples = 0;
    CHECK_THROWS_AS(validate_env(ec), ValidationError);
}

TEST_CASE("environment config file parsing") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "budgetrl-test-toy";
    fs::create_directories(dir);

    const fs::path good = dir / "env.cfg";
    {
        std::ofstream out(good);
        out << "# toy environment\n"
            << "num_tasks = 3\n"
            << "difficulties = 2, 3, 4   # cycled\n"
            << "curve = step\n"
            << "curve_floor = 0.25\n"
            << "answer_reasoning_weight = 2\n"
            << "token_cap = 128\n"
            << "filler_token = hmm\n"
            << "think_buckets = 6\n"
            << "answer_buckets = 3\n"
            << "bucket_size = 2\n"
            << "init_noise = 0.1\n"
            << "eval_samples = 16\n";
    }
    const ToyEnvConfig ec = load_env_config(good.string());
    CHECK(ec.num_tasks == 3);
    CHECK(ec.difficulties == std::vector<int>{2, 3, 4});
    CHECK(ec.curve == CurveKind::Step);
    CHECK(ec.curve_floor == 0.25);
    CHECK(ec.answer_reasoning_weight == 2.0);
    CHECK(ec.token_cap == 128);
    CHECK(ec.filler_token == "hmm");
    CHECK(ec.think_buckets == 6);
    CHECK(ec.answer_buckets == 3);
    CHECK(ec.bucket_size == 2);
    CHECK(ec.init_noise == 0.1);
    CHECK(ec.eval_samples == 16);

    auto write_and_load = [&](const std::string& text) {
        const fs::path p = dir / "bad.cfg";
        std::ofstream out(p);
        out << text;
        out.close();
        return load_env_config(p.string());
    };
    CHECK_THROWS_AS(write_and_load("mystery_key = 1\n"), ValidationError);
    CHECK_THROWS_AS(write_and_load("num_tasks\n"), ValidationError);
    CHECK_THROWS_AS(write_and_load("num_tasks = abc\n"), ValidationError);
    CHECK_THROWS_AS(write_and_load("curve = linear\n"), ParseError);
    CHECK_THROWS_AS(write_and_load("curve_floor = 2.0\n"), ValidationError);
    CHECK_THROWS_AS(load_env_config((dir / "absent.cfg").string()), IoError);

    fs::remove_all(dir);
}

TEST_CASE("task table is seeded and cycles difficulties") {
    ToyEnvConfig ec;
    ec.num_tasks = 5;
    ec.difficulties = {2, 3};
    const ToyEnvironment env(ec, 11);
    REQUIRE(env.tasks().size() == 5);
    CHECK(env.task(0).id == "task-0001");
    CHECK(env.task(4).id == "task-0005");
    const int expected_d[] = {2, 3, 2, 3, 2};
    for (int i = 0; i < 5; ++i) {
        CHECK(env.task(i).difficulty == expected_d[i]);
        const int answer = std::stoi(env.task(i).reference_answer);
        CHECK(answer >= 100);
        CHECK(answer <= 999);
        CHECK(env.task(i).query.find(env.task(i).id) != std::string::npos);
    }
    // equal seeds reproduce the same answers; the index is range-checked
    const ToyEnvironment env2(ec, 11);
    for (int i = 0; i < 5; ++i)
        CHECK(env2.task(i).reference_answer == env.task(i).reference_answer);
    CHECK_THROWS_AS(env.task(5), ValidationError);
}

TEST_CASE("success probability curves") {
    ToyEnvConfig ec;
    ec.curve = CurveKind::Exp;
    ec.curve_floor = 0.2;
    const ToyEnvironment exp_env(ec, 1);
    CHECK(exp_env.success_probability(0.0, 4) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(exp_env.success_probability(1000.0, 4) == doctest::Approx(1.0).epsilon(1e-9));
    double prev = -1.0;
    for (int len = 0; len <= 40; ++len) {
        const double p = exp_env.success_probability(len, 4);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(p >= prev);  // monotone nondecreasing
        prev = p;
    }
    // exact closed form at one interior point
    CHECK(exp_env.success_probability(4.0, 4) ==
          doctest::Approx(0.2 + 0.8 * (1.0 - std::exp(-1.0))).epsilon(1e-15));

    ec.curve = CurveKind::Step;
    ec.curve_floor = 0.1;
    const ToyEnvironment step_env(ec, 1);
    CHECK(step_env.success_probability(5.0, 5) == 1.0);
    CHECK(step_env.success_probability(4.999, 5) == 0.1);
    CHECK(step_env.success_probability(0.0, 1) == 0.1);
}

TEST_CASE("deterministic-length rollouts expose the full anatomy") {
    ToyEnvConfig ec = small_env_config();
    ec.curve = CurveKind::Step;
    ec.curve_floor = 0.0;
    ec.answer_reasoning_weight = 2.0;
    const ToyEnvironment env(ec, 3);

    // 3 thinking fillers, 2 answer fillers: effective length 3 + 2*2 = 7
    const ToyPolicy policy = fixed_length_policy(env, 3, 2);
    Rng rng = make_rng(9, "toy-anatomy");
    const RolloutResult r = env.rollout(env.task(0), policy, Mode::Medium, rng);

    const std::vector<int> expected_tokens = {0, 0, 0, 1, 0, 0, 2};
    CHECK(r.tokens == expected_tokens);
    CHECK(r.trace.thinking_tokens == 3);
    CHECK(r.trace.thinking == "wait wait wait");
    CHECK(r.answer_filler_tokens == 2);
    CHECK(r.effective_length == 7.0);
    // task difficulty 2, step curve: 7 >= 2, always correct
    CHECK(r.correct);
    CHECK(r.trace.answer == "wait wait \\boxed{" + env.task(0).reference_answer + "}");
    CHECK(r.trace.answer_tokens == 3);
    CHECK(task_reward(r.trace, env.task(0).reference_answer) == 1.0);

    // per-token log-probs recorded at sampling time match a fresh rescoring walk
    const Eigen::VectorXd rescored = policy.sequence_log_probs(Mode::Medium, r.tokens);
    REQUIRE(rescored.size() == static_cast<Eigen::Index>(r.log_probs.size()));
    for (Eigen::Index t = 0; t < rescored.size(); ++t)
        CHECK(rescored[t] == r.log_probs[static_cast<std::size_t>(t)]);

    // the serialized trace is a valid corpus line
    const ReasoningTrace reparsed = parse_trace(serialize_trace(r.trace), r.trace.mode);
    CHECK(reparsed.thinking == r.trace.thinking);
    CHECK(reparsed.answer == r.trace.answer);
}

TEST_CASE("rollouts below the step threshold are never correct") {
    ToyEnvConfig ec = small_env_config();
    ec.curve = CurveKind::Step;
    ec.curve_floor = 0.0;
    const ToyEnvironment env(ec, 3);
    const ToyPolicy policy = fixed_length_policy(env, 1, 0);  // length 1 < difficulty 2

    Rng rng = make_rng(10, "toy-wrong");
    for (int i = 0; i < 20; ++i) {
        const RolloutResult r = env.rollout(env.task(0), policy, Mode::High, rng);
        CHECK_FALSE(r.correct);
        // corrupted boxed answer is reference + 1
        const long long expect = std::stoll(env.task(0).reference_answer) + 1;
        CHECK(r.trace.answer == "\\boxed{" + std::to_string(expect) + "}");
        CHECK(task_reward(r.trace, env.task(0).reference_answer) == 0.0);
    }
}

TEST_CASE("saturated curve means every rollout is correct") {
    ToyEnvConfig ec = small_env_config();
    ec.curve_floor = 1.0;  // success probability identically 1
    const ToyEnvironment env(ec, 21);
    const ToyPolicy policy = env.make_policy(4);  // uniform
    const ToyEnvironment::EvalSummary s = env.evaluate(policy, Mode::Low, 77, 16);
    CHECK(s.accuracy == 1.0);
    CHECK(s.samples == 2 * 16);
}

TEST_CASE("empty thinking when the policy stops immediately") {
    ToyEnvConfig ec = small_env_config();
    const ToyEnvironment env(ec, 5);
    const ToyPolicy policy = fixed_length_policy(env, 0, 0);
    Rng rng = make_rng(2, "toy-empty");
    const RolloutResult r = env.rollout(env.task(1), policy, Mode::Low, rng);
    CHECK(r.tokens == std::vector<int>{1, 2});
    CHECK(r.trace.thinking.empty());
    CHECK(r.effective_length == 0.0);
    CHECK(r.trace.answer_tokens == 1);  // just the boxed value
}

TEST_CASE("mode conditioning selects different logit rows") {
    ToyEnvConfig ec = small_env_config();
    const ToyEnvironment env(ec, 6);
    ToyPolicy policy = env.make_policy(0);
    for (int pos = 0; pos < ec.think_buckets; ++pos) {
        pin_row(policy, Mode::Low, false, pos, pos < 1 ? 0 : 1);
        pin_row(policy, Mode::High, false, pos, pos < 5 ? 0 : 1);
        pin_row(policy, Mode::Medium, false, pos, pos < 3 ? 0 : 1);
    }
    for (Mode mode : kAllModes)
        for (int pos = 0; pos < ec.answer_buckets; ++pos) pin_row(policy, mode, true, pos, 2);

    Rng rng = make_rng(8, "toy-modes");
    CHECK(env.rollout(env.task(0), policy, Mode::Low, rng).trace.thinking_tokens == 1);
    CHECK(env.rollout(env.task(0), policy, Mode::Medium, rng).trace.thinking_tokens == 3);
    CHECK(env.rollout(env.task(0), policy, Mode::High, rng).trace.thinking_tokens == 5);
}

TEST_CASE("a policy that never stops overflows the token cap") {
    ToyEnvConfig ec = small_env_config();
    ec.token_cap = 16;
    const ToyEnvironment env(ec, 7);
    ToyPolicy policy = env.make_policy(0);
    for (Mode mode : kAllModes)
        for (int pos = 0; pos < ec.think_buckets; ++pos) pin_row(policy, mode, false, pos, 0);
    Rng rng = make_rng(3, "toy-overflow");
    CHECK_THROWS_AS(env.rollout(env.task(0), policy, Mode::High, rng), RolloutOverflow);
}

TEST_CASE("rollout demands a structurally complete policy") {
    const ToyEnvironment env(small_env_config(), 1);
    ToyPolicy flat({"wait", "<stop>", "<eos>"}, {4, 2, 1});  // no structural ids
    Rng rng = make_rng(1, "toy-flat");
    CHECK_THROWS_AS(env.rollout(env.task(0), flat, Mode::High, rng), ValidationError);
}

TEST_CASE("sample grid is deterministic and prefix-stable") {
    ToyEnvConfig ec = small_env_config();
    ec.init_noise = 0.4;
    const ToyEnvironment env(ec, 13);
    const ToyPolicy policy = env.make_policy(13);

    const auto once = env.sample_rollouts(policy, Mode::Medium, 55, 3);
    const auto again = env.sample_rollouts(policy, Mode::Medium, 55, 3);
    REQUIRE(once.size() == 2 * 3);
    for (std::size_t i = 0; i < once.size(); ++i) {
        CHECK(once[i].tokens == again[i].tokens);
        CHECK(once[i].trace.raw_text == again[i].trace.raw_text);
        CHECK(once[i].correct == again[i].correct);
    }

    // sample k of task t does not depend on how many samples follow it
    const auto small = env.sample_rollouts(policy, Mode::Medium, 55, 1);
    REQUIRE(small.size() == 2);
    CHECK(small[0].trace.raw_text == once[0].trace.raw_text);
    CHECK(small[1].trace.raw_text == once[3].trace.raw_text);

    // different modes draw from distinct streams
    const auto high = env.sample_rollouts(policy, Mode::High, 55, 3);
    bool any_difference = false;
    for (std::size_t i = 0; i < once.size(); ++i)
        any_difference |= once[i].tokens != high[i].tokens;
    CHECK(any_difference);
}

TEST_CASE("evaluate aggregates the sample grid") {
    ToyEnvConfig ec = small_env_config();
    ec.init_noise = 0.3;
    const ToyEnvironment env(ec, 19);
    const ToyPolicy policy = env.make_policy(19);

    const auto rollouts = env.sample_rollouts(policy, Mode::Low, 91, 4);
    double acc = 0.0, think = 0.0, ans = 0.0, total = 0.0;
    for (const RolloutResult& r : rollouts) {
        acc += r.correct ? 1.0 : 0.0;
        think += r.trace.thinking_tokens;
        ans += r.trace.answer_tokens;
        total += r.trace.total_tokens;
    }
    const double n = static_cast<double>(rollouts.size());

    const ToyEnvironment::EvalSummary s = env.evaluate(policy, Mode::Low, 91, 4);
    CHECK(s.samples == static_cast<int>(rollouts.size()));
    CHECK(s.accuracy == acc / n);
    CHECK(s.mean_thinking_tokens == think / n);
    CHECK(s.mean_answer_tokens == ans / n);
    CHECK(s.mean_total_tokens == total / n);

    // default-sample overload uses config().eval_samples
    const ToyEnvironment::EvalSummary d = env.evaluate(policy, Mode::Low, 91);
    CHECK(d.samples == ec.eval_samples * 2);
}

TEST_CASE("make_policy wires the structural tokens") {
    const ToyEnvironment env(small_env_config(), 23);
    const ToyPolicy policy = env.make_policy(23);
    CHECK(policy.vocabulary() == std::vector<std::string>{"wait", "<stop>", "<eos>"});
    REQUIRE(policy.stop_think_id().has_value());
    REQUIRE(policy.eos_id().has_value());
    CHECK(*policy.stop_think_id() == ToyEnvironment::kStopThinkId);
    CHECK(*policy.eos_id() == ToyEnvironment::kEosId);
    // init_noise 0: thinking rows start flat; answer rows start filler-biased
    // (untrained answers ramble, training learns to close them).
    const ToyEnvConfig& ec = env.config();
    for (Mode mode : kAllModes) {
        for (int pos = 0; pos < ec.think_buckets * ec.bucket_size; ++pos) {
            const int state = policy.state_index(mode, false, pos);
            CHECK(policy.logits().row(state).cwiseAbs().maxCoeff() == 0.0);
        }
        for (int pos = 0; pos < ec.answer_buckets * ec.bucket_size; ++pos) {
            const int state = policy.state_index(mode, true, pos);
            CHECK(policy.logits()(state, ToyEnvironment::kContinueId) ==
                  ToyEnvironment::kAnswerFillerBias);
            CHECK(policy.logits()(state, ToyEnvironment::kStopThinkId) == 0.0);
            CHECK(policy.logits()(state, ToyEnvironment::kEosId) == 0.0);
        }
    }

    ToyEnvConfig noisy = small_env_config();
    noisy.init_noise = 0.5;
    const ToyEnvironment nenv(noisy, 23);
    const ToyPolicy a = nenv.make_policy(23);
    const ToyPolicy b = nenv.make_policy(23);
    const ToyPolicy c = nenv.make_policy(24);
    CHECK((a.logits() - b.logits()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.logits() - c.logits()).cwiseAbs().maxCoeff() > 0.0);
}

// ---------------------------------------------------------------------------
// Convergence oracle. The policy is pinned everywhere except the very first
// thinking decision, so it can only choose between two reasoning lengths:
// stop at once (length 0) or run the forced corridor to length 6. Expected
// composite rewards for both arms are computable in closed form, and DAPO
// ascent on the one free row must push the policy toward the better arm.
// ---------------------------------------------------------------------------

namespace {

struct TwoLengthSetup {
    ToyEnvConfig ec;
    double lr = 1.5;
    int steps = 120;
    int group = 8;
};

// Returns P(CONT | first thinking state) after training.
double train_two_length(double curve_floor, int difficulty, Mode mode, bool task_only,
                        const TwoLengthSetup& setup, std::uint64_t seed) {
    ToyEnvConfig ec = setup.ec;
    ec.num_tasks = 1;
    ec.difficulties = {difficulty};
    ec.curve = CurveKind::Exp;
    ec.curve_floor = curve_floor;
    ec.think_buckets = 8;
    ec.answer_buckets = 2;
    ec.bucket_size = 1;
    ec.token_cap = 32;
    const ToyEnvironment env(ec, seed);
    ToyPolicy policy = env.make_policy(seed);

    // Pin the corridor: positions 1..5 continue, 6+ stop, answers close at
    // once. Position 0 stays free (zero logits, uniform start).
    auto repin = [&](ToyPolicy& p) {
        for (Mode m : kAllModes) {
            for (int pos = 1; pos < ec.think_buckets; ++pos)
                pin_row(p, m, false, pos,
                        pos <= 5 ? ToyEnvironment::kContinueId : ToyEnvironment::kStopThinkId);
            for (int pos = 0; pos < ec.answer_buckets; ++pos)
                pin_row(p, m, true, pos, ToyEnvironment::kEosId);
        }
    };
    repin(policy);

    const ModeRewardConfig reward_cfg;
    DapoConfig dapo;
    dapo.group_size = setup.group;

    for (int step = 1; step <= setup.steps; ++step) {
        Rng rng = make_rng(seed, "oracle-rollout", static_cast<std::uint64_t>(step));
        std::vector<RolloutResult> rollouts;
        for (int i = 0; i < setup.group; ++i)
            rollouts.push_back(env.rollout(env.task(0), policy, mode, rng));

        GroupLengthBounds bounds{1e300, -1e300};
        for (const RolloutResult& r : rollouts) {
            bounds.len_min = std::min(bounds.len_min, static_cast<double>(r.trace.total_tokens));
            bounds.len_max = std::max(bounds.len_max, static_cast<double>(r.trace.total_tokens));
        }

        RolloutGroup group;
        group.mode = mode;
        for (const RolloutResult& r : rollouts) {
            GroupRollout gr;
            gr.tokens = r.tokens;
            gr.old_log_probs = Eigen::Map<const Eigen::VectorXd>(
                r.log_probs.data(), static_cast<Eigen::Index>(r.log_probs.size()));
            if (task_only) {
                gr.reward.task = r.correct ? 1.0 : 0.0;
                gr.reward.total = gr.reward.task;
            } else {
                gr.reward = composite_reward(r.trace, env.task(0).reference_answer, bounds,
                                             reward_cfg);
            }
            group.rollouts.push_back(std::move(gr));
        }
        compute_group_advantages(group);

        const PolicyStep update = surrogate_gradient({group}, policy, dapo);
        policy.logits() += setup.lr * update.gradient;
        repin(policy);
    }

    const int free_state = policy.state_index(mode, false, 0);
    return policy.probs(free_state)[ToyEnvironment::kContinueId];
}

}  // namespace

TEST_CASE("dapo ascent prefers the short arm when thinking barely helps") {
    // floor 0.7, difficulty 3: long adds ~0.26 accuracy but costs the whole
    // length reward in Low mode; expected totals are 1.55 (short) vs 0.96.
    const double p_cont = train_two_length(0.7, 3, Mode::Low, /*task_only=*/false,
                                           TwoLengthSetup{}, 12345);
    CHECK(p_cont < 0.1);
}

TEST_CASE("dapo ascent prefers the long arm when accuracy needs it") {
    // floor 0.05, difficulty 2, task-only reward: short is right 5% of the
    // time, the forced corridor 95%; ascent must commit to continuing.
    const double p_cont = train_two_length(0.05, 2, Mode::High, /*task_only=*/true,
                                           TwoLengthSetup{}, 54321);
    CHECK(p_cont > 0.9);
}
