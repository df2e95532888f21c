// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "budgetrl/act.hpp"
#include "budgetrl/dapo.hpp"
#include "budgetrl/reward.hpp"
#include "budgetrl/sft.hpp"
#include "budgetrl/toy_env.hpp"

namespace budgetrl {

// One JSON file configures every subcommand. Each section maps 1:1 onto a
// module config; unknown keys anywhere are rejected with their field path.
// An empty file (or {}) yields all defaults.
//
// Load-time indirections (resolved into the struct, not stored):
//   reward.keywords_file   -> reward.leak_keywords (exclusive with an inline list)
//   environment.file       -> key-value environment file, inline keys override
struct RunConfig {
    std::uint64_t seed = 0;
    std::string out_dir;
    TruncationConfig truncation;
    ModePrompts prompts;
    ModeRewardConfig reward;
    DapoConfig dapo;  // dapo.seed mirrors the root seed
    ToyEnvConfig environment;
    AccuracyUnit accuracy_unit = AccuracyUnit::Auto;
    std::string benchmark = "toy";
};

void validate(const RunConfig& config);

// ParseError on bad JSON, ValidationError on unknown keys or invariant
// violations (with field paths), IoError when unreadable.
RunConfig load_config(const std::string& path);
RunConfig config_from_json_text(const std::string& text, const std::string& source);

// Full explicit JSON; serialize_config(load_config(p)) reloads to an equal
// config.
std::string serialize_config(const RunConfig& config);

bool operator==(const RunConfig& a, const RunConfig& b);

// FNV-1a over the serialized form; stamped into run manifests.
std::uint64_t config_hash(const RunConfig& config);

std::string to_string(AccuracyUnit unit);

}  // namespace budgetrl
