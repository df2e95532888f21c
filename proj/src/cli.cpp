// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#include "budgetrl/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "budgetrl/act.hpp"
#include "budgetrl/config.hpp"
#include "budgetrl/errors.hpp"
#include "budgetrl/sft.hpp"
#include "budgetrl/train.hpp"

#ifndef BUDGETRL_VERSION
#define BUDGETRL_VERSION "0.0.0"
#endif

namespace budgetrl {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kConfigEnvVar = "BUDGETRL_CONFIG";

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
};

RunConfig resolve_config(const CommonOpts& opts) {
    RunConfig config;
    if (!opts.config_path.empty()) {
        config = load_config(opts.config_path);
    } else if (const char* env = std::getenv(kConfigEnvVar); env != nullptr && *env != '\0') {
        config = load_config(env);
    }
    if (opts.seed) {
        config.seed = *opts.seed;
        config.dapo.seed = *opts.seed;
    }
    return config;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        lines.push_back(line);
    }
    return lines;
}

std::vector<TraceRecord> read_trace_records(const std::string& path) {
    std::vector<TraceRecord> records;
    std::size_t line_no = 0;
    for (const std::string& line : read_lines(path)) {
        ++line_no;
        try {
            records.push_back(trace_record_from_json_line(line));
        } catch (const Error& e) {
            throw ValidationError(path + " record " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

std::map<std::string, std::string> read_answers(const std::string& path) {
    std::map<std::string, std::string> answers;
    std::size_t line_no = 0;
    for (const std::string& line : read_lines(path)) {
        ++line_no;
        const std::string where = path + " line " + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(where + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("id") || !j.contains("answer") || !j["id"].is_string() ||
            !j["answer"].is_string()) {
            throw ValidationError(where + ": expected {\"id\": string, \"answer\": string}");
        }
        for (const auto& [key, value] : j.items()) {
            if (key != "id" && key != "answer")
                throw ValidationError(where + ": unknown key '" + key + "'");
        }
        const std::string id = j["id"].get<std::string>();
        if (!answers.emplace(id, j["answer"].get<std::string>()).second) {
            throw ValidationError(where + ": duplicate answer id '" + id + "'");
        }
    }
    return answers;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw IoError("short write to '" + path.string() + "'");
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Every output file a subcommand writes is declared here; the timestamp is
// the only non-deterministic field, which is why determinism checks compare
// the JSONL payloads, not this manifest.
void write_run_manifest(const fs::path& dir, const RunConfig& config,
                        std::vector<std::string> outputs) {
    char hash[32];
    std::snprintf(hash, sizeof(hash), "0x%016llx",
                  static_cast<unsigned long long>(config_hash(config)));
    std::sort(outputs.begin(), outputs.end());
    ordered_json j;
    j["version"] = BUDGETRL_VERSION;
    j["config_hash"] = hash;
    j["seed"] = config.seed;
    j["created_utc"] = utc_timestamp();
    j["outputs"] = outputs;
    write_text_file(dir / "run_manifest.json", j.dump(2) + "\n");
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

// --- construct ---------------------------------------------------------

struct ConstructOpts {
    CommonOpts common;
    std::string input;
    std::string answers;
    std::string out_dir;
    std::optional<double> r_med;
    std::optional<double> r_low;
    int threads = 1;
};

std::string mode_file_name(Mode mode) { return to_string(mode) + ".jsonl"; }

int cmd_construct(const ConstructOpts& opts) {
    RunConfig config = resolve_config(opts.common);
    if (opts.r_med) config.truncation.r_med = *opts.r_med;
    if (opts.r_low) config.truncation.r_low = *opts.r_low;
    validate(config.truncation);

    const std::vector<TraceRecord> records = read_trace_records(opts.input);
    const std::map<std::string, std::string> answers = read_answers(opts.answers);

    CopyAnswerGenerator generator;
    const BuildDatasetResult result =
        build_dataset(records, answers, config.truncation, config.prompts, generator, config.seed,
                      config.reward, Tokenizer::whitespace(), TraceMarkers{}, opts.threads);

    ensure_dir(opts.out_dir);
    const fs::path dir(opts.out_dir);
    std::array<std::ostringstream, 3> streams;
    for (const SftSample& sample : result.samples) {
        const ordered_json row{{"id", sample.id},
                               {"mode", to_string(sample.mode)},
                               {"system_prompt", sample.system_prompt},
                               {"query", sample.query},
                               {"target_raw_text", sample.target.raw_text}};
        streams[static_cast<std::size_t>(sample.mode)] << row.dump() << '\n';
    }
    std::vector<std::string> outputs;
    for (Mode mode : kAllModes) {
        const std::string name = mode_file_name(mode);
        write_text_file(dir / name, streams[static_cast<std::size_t>(mode)].str());
        outputs.push_back(name);
    }

    ordered_json manifest;
    for (Mode mode : kAllModes) {
        const auto m = static_cast<std::size_t>(mode);
        manifest["counts"][to_string(mode)] = result.manifest.counts[m];
        manifest["mean_thinking_tokens"][to_string(mode)] = result.manifest.mean_thinking_tokens[m];
        manifest["balance_ratio"][to_string(mode)] = result.manifest.balance_ratio[m];
    }
    manifest["balanced"] = result.manifest.balanced;
    manifest["tolerance"] = result.manifest.tolerance;
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    outputs.push_back("manifest.json");

    write_run_manifest(dir, config, outputs);
    std::cout << "constructed " << result.manifest.counts[0] << " samples per mode into "
              << dir.string() << "\n";
    return 0;
}

// --- score -------------------------------------------------------------

struct ScoreOpts {
    CommonOpts common;
    std::string traces;
    std::string answers;
    std::string group_by = "query_id";
    std::string out_dir;  // empty: stdout
};

int cmd_score(const ScoreOpts& opts) {
    const RunConfig config = resolve_config(opts.common);
    const std::vector<TraceRecord> records = read_trace_records(opts.traces);
    const std::map<std::string, std::string> answers = read_answers(opts.answers);

    struct Scored {
        ReasoningTrace trace;
        std::string group;
        const std::string* reference = nullptr;
    };
    std::vector<Scored> items;
    items.reserve(records.size());
    std::map<std::pair<std::string, Mode>, GroupLengthBounds> bounds;
    for (const TraceRecord& record : records) {
        Scored item;
        item.trace = parse_trace(record.raw_text, record.mode);
        item.group = record.id;
        for (const auto& [key, value] : record.extra)
            if (key == opts.group_by) item.group = value;
        auto ref = answers.find(record.id);
        if (ref == answers.end()) ref = answers.find(item.group);
        if (ref == answers.end()) {
            throw ValidationError("no reference answer for trace id '" + record.id +
                                  "' or group '" + item.group + "'");
        }
        item.reference = &ref->second;

        const double len = static_cast<double>(item.trace.total_tokens);
        auto [it, inserted] = bounds.try_emplace({item.group, record.mode},
                                                 GroupLengthBounds{len, len});
        if (!inserted) {
            it->second.len_min = std::min(it->second.len_min, len);
            it->second.len_max = std::max(it->second.len_max, len);
        }
        items.push_back(std::move(item));
    }

    std::ostringstream out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const Scored& item = items[i];
        const auto& group_bounds = bounds.at({item.group, item.trace.mode});
        const RewardBreakdown r =
            composite_reward(item.trace, *item.reference, group_bounds, config.reward);
        out << ordered_json{{"id", records[i].id},
                            {"mode", to_string(item.trace.mode)},
                            {"group", item.group},
                            {"task", r.task},
                            {"lambda", r.lambda},
                            {"length", r.length},
                            {"leak", r.leak},
                            {"total", r.total}}
                   .dump()
            << '\n';
    }

    if (opts.out_dir.empty()) {
        std::cout << out.str();
    } else {
        ensure_dir(opts.out_dir);
        const fs::path dir(opts.out_dir);
        write_text_file(dir / "scores.jsonl", out.str());
        write_run_manifest(dir, config, {"scores.jsonl"});
    }
    return 0;
}

// --- train-toy ---------------------------------------------------------

struct TrainOpts {
    CommonOpts common;
    std::string out_dir;
};

int cmd_train_toy(const TrainOpts& opts) {
    const RunConfig config = resolve_config(opts.common);
    const ToyEnvironment env(config.environment, config.seed);
    ToyPolicy policy = env.make_policy(config.seed);
    const TrainingLog log = run_two_phase(env, policy, config.dapo, config.reward);

    ensure_dir(opts.out_dir);
    const fs::path dir(opts.out_dir);
    std::ostringstream jsonl;
    write_training_log_jsonl(log, jsonl);
    write_text_file(dir / "training_log.jsonl", jsonl.str());
    std::ostringstream csv;
    write_training_log_csv(log, csv);
    write_text_file(dir / "training_summary.csv", csv.str());
    write_run_manifest(dir, config, {"training_log.jsonl", "training_summary.csv"});

    const TrainStepRecord& last = log.steps.back();
    std::cout << "finished " << last.step << " steps;";
    for (Mode mode : kAllModes) {
        const auto m = static_cast<std::size_t>(mode);
        std::cout << " " << to_string(mode) << " acc " << last.accuracy[m] << " think "
                  << last.thinking_tokens[m];
    }
    std::cout << "\n";
    return 0;
}

// --- report ------------------------------------------------------------

struct ReportOpts {
    CommonOpts common;
    std::string measurements;
    std::string baseline;
    std::string out_file;
};

int cmd_report(const ReportOpts& opts) {
    const RunConfig config = resolve_config(opts.common);

    // Measurements: one JSONL row per (benchmark, mode).
    std::vector<std::string> order;
    std::map<std::string, std::vector<ModeMeasurement>> by_benchmark;
    std::size_t line_no = 0;
    for (const std::string& line : read_lines(opts.measurements)) {
        ++line_no;
        const std::string where = opts.measurements + " line " + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(where + ": " + e.what());
        }
        if (!j.is_object()) throw ValidationError(where + ": expected an object");
        std::string benchmark = config.benchmark;
        ModeMeasurement m;
        bool saw_mode = false, saw_accuracy = false, saw_cost = false;
        for (const auto& [key, value] : j.items()) {
            if (key == "benchmark" && value.is_string()) {
                benchmark = value.get<std::string>();
            } else if (key == "mode" && value.is_string()) {
                m.mode = mode_from_string(value.get<std::string>());
                saw_mode = true;
            } else if (key == "accuracy" && value.is_number()) {
                m.accuracy = value.get<double>();
                saw_accuracy = true;
            } else if (key == "cost" && value.is_number()) {
                m.cost = value.get<double>();
                saw_cost = true;
            } else {
                throw ValidationError(where + ": unknown or mistyped key '" + key + "'");
            }
        }
        if (!saw_mode || !saw_accuracy || !saw_cost) {
            throw ValidationError(where + ": need mode, accuracy, and cost");
        }
        if (!by_benchmark.count(benchmark)) order.push_back(benchmark);
        by_benchmark[benchmark].push_back(m);
    }
    if (order.empty()) throw EmptyCorpus("no measurements in '" + opts.measurements + "'");

    // Baseline: either one record for every benchmark or a per-benchmark map.
    std::ifstream bin(opts.baseline);
    if (!bin) throw IoError("cannot open '" + opts.baseline + "'");
    json bj;
    try {
        bj = json::parse(bin);
    } catch (const json::parse_error& e) {
        throw ParseError(opts.baseline + ": " + e.what());
    }
    auto parse_baseline = [&](const json& node, const std::string& where) {
        if (!node.is_object() || !node.contains("accuracy_base") || !node.contains("cost_base") ||
            !node["accuracy_base"].is_number() || !node["cost_base"].is_number()) {
            throw ValidationError(where + ": expected {\"accuracy_base\": num, \"cost_base\": num}");
        }
        return BaselineMeasurement{node["accuracy_base"].get<double>(),
                                   node["cost_base"].get<double>()};
    };
    const bool single_baseline = bj.is_object() && bj.contains("accuracy_base");

    ordered_json reports = ordered_json::array();
    std::ostringstream csv;
    csv << "benchmark,mode,accuracy,cost\n";
    for (const std::string& benchmark : order) {
        BaselineMeasurement base{};
        if (single_baseline) {
            base = parse_baseline(bj, opts.baseline);
        } else {
            if (!bj.is_object() || !bj.contains(benchmark)) {
                throw ValidationError(opts.baseline + ": no baseline for benchmark '" + benchmark +
                                      "'");
            }
            base = parse_baseline(bj[benchmark], opts.baseline + ":" + benchmark);
        }
        const auto& ms = by_benchmark[benchmark];
        const ACTReport report = build_report(benchmark, ms, base, config.accuracy_unit);
        reports.push_back(ordered_json::parse(report_to_json(report)));
        std::ostringstream rows;
        write_measurements_csv(benchmark, ms, rows);
        // drop the per-benchmark header line, the file has one on top
        const std::string text = rows.str();
        csv << text.substr(text.find('\n') + 1);
    }

    const fs::path out_path(opts.out_file);
    const fs::path dir = out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
    ensure_dir(dir);
    write_text_file(out_path, ordered_json{{"reports", reports}}.dump(2) + "\n");
    fs::path csv_path = out_path;
    csv_path.replace_extension(".csv");
    write_text_file(csv_path, csv.str());
    write_run_manifest(dir, config,
                       {out_path.filename().string(), csv_path.filename().string()});
    std::cout << "wrote " << reports.size() << " report(s) to " << out_path.string() << "\n";
    return 0;
}

const char* category_name(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::Validation: return "validation";
        case ErrorCategory::Runtime: return "runtime";
        case ErrorCategory::Io: return "io";
    }
    return "runtime";
}

int exit_code_for(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::Validation: return 2;
        case ErrorCategory::Runtime: return 3;
        case ErrorCategory::Io: return 4;
    }
    return 3;
}

void emit_error(const std::string& code, const char* category, const std::string& message) {
    std::cerr << ordered_json{{"error", ordered_json{{"code", code},
                                                     {"category", category},
                                                     {"message", message}}}}
                     .dump()
              << std::endl;
}

}  // namespace

int run_cli(std::vector<std::string> args) {
    CLI::App app{"budget-mode reasoning toolkit"};
    app.require_subcommand(1);

    ConstructOpts construct;
    CLI::App* c = app.add_subcommand("construct", "build the per-mode SFT dataset");
    c->add_option("--input", construct.input, "trace records JSONL")->required();
    c->add_option("--answers", construct.answers, "reference answers JSONL")->required();
    c->add_option("--out", construct.out_dir, "output directory")->required();
    c->add_option("--r-med", construct.r_med, "medium-mode retention ratio");
    c->add_option("--r-low", construct.r_low, "low-mode retention ratio");
    c->add_option("--seed", construct.common.seed, "root seed");
    c->add_option("--config", construct.common.config_path, "config JSON path");
    c->add_option("--threads", construct.threads, "worker thread bound")
        ->check(CLI::Range(1, 256));

    ScoreOpts score;
    CLI::App* s = app.add_subcommand("score", "score traces with the composite reward");
    s->add_option("--traces", score.traces, "trace records JSONL")->required();
    s->add_option("--answers", score.answers, "reference answers JSONL")->required();
    s->add_option("--group-by", score.group_by, "extra field naming the length group");
    s->add_option("--config", score.common.config_path, "config JSON path");
    s->add_option("--out", score.out_dir, "output directory (default: stdout)");

    TrainOpts train;
    CLI::App* t = app.add_subcommand("train-toy", "run the two-phase toy training loop");
    t->add_option("--config", train.common.config_path, "config JSON path");
    t->add_option("--seed", train.common.seed, "root seed");
    t->add_option("--out", train.out_dir, "output directory")->required();

    ReportOpts report;
    CLI::App* r = app.add_subcommand("report", "compute accuracy-cost trade-off reports");
    r->add_option("--measurements", report.measurements, "per-mode measurements JSONL")
        ->required();
    r->add_option("--baseline", report.baseline, "baseline JSON")->required();
    r->add_option("--out", report.out_file, "report JSON path")->required();
    r->add_option("--config", report.common.config_path, "config JSON path");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the CLI11 message
        return 2;
    }

    try {
        if (app.got_subcommand(c)) return cmd_construct(construct);
        if (app.got_subcommand(s)) return cmd_score(score);
        if (app.got_subcommand(t)) return cmd_train_toy(train);
        return cmd_report(report);
    } catch (const Error& e) {
        emit_error(e.code(), category_name(e.category()), e.what());
        return exit_code_for(e.category());
    } catch (const std::exception& e) {
        emit_error("RuntimeFailure", "runtime", e.what());
        return 3;
    }
}

}  // namespace budgetrl
