// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#include "budgetrl/trace.hpp"

#include <nlohmann/json.hpp>

#include "budgetrl/errors.hpp"

namespace budgetrl {
namespace {

using nlohmann::json;

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
    if (needle.empty()) return 0;
    std::size_t count = 0;
    for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + needle.size())) {
        ++count;
    }
    return count;
}

void validate_markers(const TraceMarkers& markers) {
    if (markers.open.empty() || markers.close.empty())
        throw ValidationError("trace markers must be non-empty");
    if (markers.open == markers.close)
        throw ValidationError("open and close markers must differ");
    if (markers.open.find(markers.close) != std::string::npos ||
        markers.close.find(markers.open) != std::string::npos)
        throw ValidationError("trace markers must not be substrings of each other");
}

void finish_counts(ReasoningTrace& trace, const Tokenizer& tokenizer) {
    trace.thinking_tokens = tokenizer.count(trace.thinking);
    trace.answer_tokens = tokenizer.count(trace.answer);
    trace.total_tokens = trace.thinking_tokens + trace.answer_tokens;
}

}  // namespace

ReasoningTrace parse_trace(const std::string& raw_text, Mode mode,
                           const TraceMarkers& markers, const Tokenizer& tokenizer) {
    validate_markers(markers);

    const std::size_t opens = count_occurrences(raw_text, markers.open);
    const std::size_t closes = count_occurrences(raw_text, markers.close);

    ReasoningTrace trace;
    trace.raw_text = raw_text;
    trace.mode = mode;

    if (opens == 0 && closes == 0) {
        trace.has_markers = false;
        trace.thinking.clear();
        trace.answer = raw_text;
        finish_counts(trace, tokenizer);
        return trace;
    }
    if (opens != 1 || closes != 1)
        throw MalformedTrace("expected exactly one open/close marker pair, found " +
                             std::to_string(opens) + " open and " + std::to_string(closes) +
                             " close");

    const std::size_t open_pos = raw_text.find(markers.open);
    const std::size_t close_pos = raw_text.find(markers.close);
    if (open_pos != 0)
        throw MalformedTrace("text before the think-open marker");
    if (close_pos < open_pos + markers.open.size())
        throw MalformedTrace("think-close marker precedes think-open");

    trace.has_markers = true;
    trace.thinking = raw_text.substr(open_pos + markers.open.size(),
                                     close_pos - open_pos - markers.open.size());
    trace.answer = raw_text.substr(close_pos + markers.close.size());
    finish_counts(trace, tokenizer);
    return trace;
}

ReasoningTrace make_trace(const std::string& thinking, const std::string& answer, Mode mode,
                          const TraceMarkers& markers, const Tokenizer& tokenizer) {
    validate_markers(markers);
    for (const std::string* section : {&thinking, &answer}) {
        if (section->find(markers.open) != std::string::npos ||
            section->find(markers.close) != std::string::npos)
            throw MalformedTrace("trace section contains a marker string");
    }
    ReasoningTrace trace;
    trace.thinking = thinking;
    trace.answer = answer;
    trace.mode = mode;
    trace.has_markers = true;
    trace.raw_text = markers.open + thinking + markers.close + answer;
    finish_counts(trace, tokenizer);
    return trace;
}

std::string serialize_trace(const ReasoningTrace& trace, const TraceMarkers& markers) {
    if (!trace.has_markers) return trace.answer;
    return markers.open + trace.thinking + markers.close + trace.answer;
}

TraceRecord trace_record_from_json_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON in trace record: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("trace record must be a JSON object");
    for (const char* field : {"id", "mode", "raw_text"}) {
        if (!j.contains(field) || !j[field].is_string())
            throw ParseError(std::string("trace record missing string field '") + field + "'");
    }
    TraceRecord record;
    record.id = j["id"].get<std::string>();
    record.mode = mode_from_string(j["mode"].get<std::string>());
    record.raw_text = j["raw_text"].get<std::string>();
    for (const auto& [key, value] : j.items()) {
        if (key == "id" || key == "mode" || key == "raw_text") continue;
        if (value.is_string()) record.extra.emplace_back(key, value.get<std::string>());
    }
    return record;
}

std::string trace_record_to_json_line(const TraceRecord& record) {
    json j;
    j["id"] = record.id;
    j["mode"] = std::string(to_string(record.mode));
    j["raw_text"] = record.raw_text;
    for (const auto& [key, value] : record.extra) j[key] = value;
    return j.dump();
}

}  // namespace budgetrl
