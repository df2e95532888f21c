// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#include "budgetrl/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "budgetrl/errors.hpp"

namespace budgetrl {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Tracks which keys a section consumed so anything left over can be rejected
// with its full field path.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(path_ + " must be a JSON object");
    }

    bool has(const char* key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    const json& at(const char* key) { return j_.at(key); }

    std::string field(const char* key) const {
        return path_.empty() ? std::string(key) : path_ + "." + key;
    }

    void read_double(const char* key, double& out) {
        if (!has(key)) return;
        const json& v = at(key);
        if (!v.is_number()) throw ValidationError(field(key) + " must be a number");
        out = v.get<double>();
    }

    void read_int(const char* key, int& out) {
        if (!has(key)) return;
        const json& v = at(key);
        if (!v.is_number_integer()) throw ValidationError(field(key) + " must be an integer");
        out = v.get<int>();
    }

    void read_uint64(const char* key, std::uint64_t& out) {
        if (!has(key)) return;
        const json& v = at(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                       v.get<std::int64_t>() < 0)) {
            throw ValidationError(field(key) + " must be a non-negative integer");
        }
        out = v.get<std::uint64_t>();
    }

    void read_bool(const char* key, bool& out) {
        if (!has(key)) return;
        const json& v = at(key);
        if (!v.is_boolean()) throw ValidationError(field(key) + " must be a boolean");
        out = v.get<bool>();
    }

    void read_string(const char* key, std::string& out) {
        if (!has(key)) return;
        const json& v = at(key);
        if (!v.is_string()) throw ValidationError(field(key) + " must be a string");
        out = v.get<std::string>();
    }

    void read_string_list(const char* key, std::vector<std::string>& out) {
        if (!has(key)) return;
        const json& v = at(key);
        if (!v.is_array()) throw ValidationError(field(key) + " must be an array of strings");
        std::vector<std::string> parsed;
        for (const json& item : v) {
            if (!item.is_string())
                throw ValidationError(field(key) + " must contain only strings");
            parsed.push_back(item.get<std::string>());
        }
        out = std::move(parsed);
    }

    void read_int_list(const char* key, std::vector<int>& out) {
        if (!has(key)) return;
        const json& v = at(key);
        if (!v.is_array()) throw ValidationError(field(key) + " must be an array of integers");
        std::vector<int> parsed;
        for (const json& item : v) {
            if (!item.is_number_integer())
                throw ValidationError(field(key) + " must contain only integers");
            parsed.push_back(item.get<int>());
        }
        out = std::move(parsed);
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) throw ValidationError("unknown key '" + field(key.c_str()) + "'");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void load_truncation(const json& j, TruncationConfig& out) {
    Section s(j, "truncation");
    s.read_double("r_high", out.r_high);
    s.read_double("r_med", out.r_med);
    s.read_double("r_low", out.r_low);
    s.read_string("connective_med", out.connective_med);
    s.read_string("connective_low", out.connective_low);
    s.read_double("balance_tolerance", out.balance_tolerance);
    s.finish();
}

void load_prompts(const json& j, ModePrompts& out) {
    Section s(j, "prompts");
    s.read_string("low", out.low);
    s.read_string("medium", out.medium);
    s.read_string("high", out.high);
    s.finish();
}

void load_reward(const json& j, ModeRewardConfig& out) {
    Section s(j, "reward");
    s.read_double("alpha_high", out.alpha_high);
    s.read_double("alpha_med", out.alpha_med);
    s.read_double("alpha_low", out.alpha_low);
    s.read_double("leak_reward", out.leak_reward);
    s.read_double("leak_penalty", out.leak_penalty);
    std::string keywords_file;
    s.read_string("keywords_file", keywords_file);
    const bool inline_keywords = s.has("leak_keywords");
    if (inline_keywords && !keywords_file.empty()) {
        throw ValidationError("set one of reward.leak_keywords or reward.keywords_file, not both");
    }
    if (inline_keywords) s.read_string_list("leak_keywords", out.leak_keywords);
    if (!keywords_file.empty()) out.leak_keywords = load_keywords(keywords_file);
    s.finish();
}

void load_dapo(const json& j, DapoConfig& out) {
    Section s(j, "dapo");
    s.read_int("group_size", out.group_size);
    s.read_double("eps_low", out.eps_low);
    s.read_double("eps_high", out.eps_high);
    s.read_double("learning_rate", out.learning_rate);
    s.read_int("warmup_steps", out.warmup_steps);
    s.read_int("budget_steps", out.budget_steps);
    s.read_bool("dynamic_sampling_warmup", out.dynamic_sampling_warmup);
    s.read_bool("dynamic_sampling_budget", out.dynamic_sampling_budget);
    s.read_double("advantage_std_floor", out.advantage_std_floor);
    s.finish();
}

void load_environment(const json& j, ToyEnvConfig& out) {
    Section s(j, "environment");
    std::string file;
    s.read_string("file", file);
    if (!file.empty()) out = load_env_config(file);
    s.read_int("num_tasks", out.num_tasks);
    s.read_int_list("difficulties", out.difficulties);
    if (s.has("curve")) {
        std::string curve;
        s.read_string("curve", curve);
        out.curve = curve_from_string(curve);
    }
    s.read_double("curve_floor", out.curve_floor);
    s.read_double("answer_reasoning_weight", out.answer_reasoning_weight);
    s.read_int("token_cap", out.token_cap);
    s.read_string("filler_token", out.filler_token);
    s.read_int("think_buckets", out.think_buckets);
    s.read_int("answer_buckets", out.answer_buckets);
    s.read_int("bucket_size", out.bucket_size);
    s.read_double("init_noise", out.init_noise);
    s.read_int("eval_samples", out.eval_samples);
    s.finish();
}

void load_metrics(const json& j, RunConfig& out) {
    Section s(j, "metrics");
    if (s.has("accuracy_unit")) {
        std::string unit;
        s.read_string("accuracy_unit", unit);
        out.accuracy_unit = accuracy_unit_from_string(unit);
    }
    s.read_string("benchmark", out.benchmark);
    s.finish();
}

}  // namespace

std::string to_string(AccuracyUnit unit) {
    switch (unit) {
        case AccuracyUnit::Fraction: return "fraction";
        case AccuracyUnit::Percent: return "percent";
        case AccuracyUnit::Auto: break;
    }
    return "auto";
}

void validate(const RunConfig& config) {
    validate(config.truncation);
    validate(config.reward);
    validate(config.dapo);
    validate_env(config.environment);
    if (config.benchmark.empty()) throw ValidationError("metrics.benchmark must be nonempty");
    if (config.prompts.low.empty() || config.prompts.medium.empty() ||
        config.prompts.high.empty()) {
        throw ValidationError("prompts must be nonempty");
    }
}

RunConfig config_from_json_text(const std::string& text, const std::string& source) {
    std::string body = text;
    const std::size_t first = body.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) body = "{}";  // empty file means all defaults

    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        throw ParseError("config " + source + ": " + e.what());
    }

    RunConfig config;
    Section root(j, "");
    root.read_uint64("seed", config.seed);
    root.read_string("out_dir", config.out_dir);
    if (root.has("truncation")) load_truncation(root.at("truncation"), config.truncation);
    if (root.has("prompts")) load_prompts(root.at("prompts"), config.prompts);
    if (root.has("reward")) load_reward(root.at("reward"), config.reward);
    if (root.has("dapo")) load_dapo(root.at("dapo"), config.dapo);
    if (root.has("environment")) load_environment(root.at("environment"), config.environment);
    if (root.has("metrics")) load_metrics(root.at("metrics"), config);
    root.finish();

    config.dapo.seed = config.seed;
    validate(config);
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return config_from_json_text(buffer.str(), path);
}

std::string serialize_config(const RunConfig& config) {
    ordered_json j;
    j["seed"] = config.seed;
    j["out_dir"] = config.out_dir;
    j["truncation"] = ordered_json{{"r_high", config.truncation.r_high},
                                   {"r_med", config.truncation.r_med},
                                   {"r_low", config.truncation.r_low},
                                   {"connective_med", config.truncation.connective_med},
                                   {"connective_low", config.truncation.connective_low},
                                   {"balance_tolerance", config.truncation.balance_tolerance}};
    j["prompts"] = ordered_json{{"low", config.prompts.low},
                                {"medium", config.prompts.medium},
                                {"high", config.prompts.high}};
    j["reward"] = ordered_json{{"alpha_high", config.reward.alpha_high},
                               {"alpha_med", config.reward.alpha_med},
                               {"alpha_low", config.reward.alpha_low},
                               {"leak_keywords", config.reward.leak_keywords},
                               {"leak_reward", config.reward.leak_reward},
                               {"leak_penalty", config.reward.leak_penalty}};
    j["dapo"] = ordered_json{{"group_size", config.dapo.group_size},
                             {"eps_low", config.dapo.eps_low},
                             {"eps_high", config.dapo.eps_high},
                             {"learning_rate", config.dapo.learning_rate},
                             {"warmup_steps", config.dapo.warmup_steps},
                             {"budget_steps", config.dapo.budget_steps},
                             {"dynamic_sampling_warmup", config.dapo.dynamic_sampling_warmup},
                             {"dynamic_sampling_budget", config.dapo.dynamic_sampling_budget},
                             {"advantage_std_floor", config.dapo.advantage_std_floor}};
    j["environment"] = ordered_json{
        {"num_tasks", config.environment.num_tasks},
        {"difficulties", config.environment.difficulties},
        {"curve", to_string(config.environment.curve)},
        {"curve_floor", config.environment.curve_floor},
        {"answer_reasoning_weight", config.environment.answer_reasoning_weight},
        {"token_cap", config.environment.token_cap},
        {"filler_token", config.environment.filler_token},
        {"think_buckets", config.environment.think_buckets},
        {"answer_buckets", config.environment.answer_buckets},
        {"bucket_size", config.environment.bucket_size},
        {"init_noise", config.environment.init_noise},
        {"eval_samples", config.environment.eval_samples}};
    j["metrics"] = ordered_json{{"accuracy_unit", to_string(config.accuracy_unit)},
                                {"benchmark", config.benchmark}};
    return j.dump(2) + "\n";
}

bool operator==(const RunConfig& a, const RunConfig& b) {
    return serialize_config(a) == serialize_config(b);
}

std::uint64_t config_hash(const RunConfig& config) {
    const std::string text = serialize_config(config);
    std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a 64
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

}  // namespace budgetrl
