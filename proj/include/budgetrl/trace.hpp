// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "budgetrl/mode.hpp"
#include "budgetrl/tokenizer.hpp"

namespace budgetrl {

// Delimiters separating the thinking section from the answer section.
// Neither marker may be a substring of the other (validated on use).
struct TraceMarkers {
    std::string open = "<think>";
    std::string close = "</think>";
};

// A reasoning trace split into its thinking and answer sections.
//
// Invariants (enforced by parse_trace / make_trace):
//  * has_markers  => raw_text == open + thinking + close + answer, byte for byte
//  * !has_markers => thinking.empty() && raw_text == answer
//  * total_tokens == thinking_tokens + answer_tokens
struct ReasoningTrace {
    std::string raw_text;
    std::string thinking;
    std::string answer;
    Mode mode = Mode::High;
    bool has_markers = true;
    int thinking_tokens = 0;
    int answer_tokens = 0;
    int total_tokens = 0;
};

// Splits raw text at the marker pair. Zero markers means the whole text is
// answer; exactly one open followed by exactly one close splits the text.
// Anything else (unbalanced, nested, out of order) throws MalformedTrace.
ReasoningTrace parse_trace(const std::string& raw_text, Mode mode,
                           const TraceMarkers& markers = {},
                           const Tokenizer& tokenizer = Tokenizer::whitespace());

// Builds a trace from sections, recomputing raw_text and token counts.
// Sections must not contain either marker (throws MalformedTrace).
ReasoningTrace make_trace(const std::string& thinking, const std::string& answer, Mode mode,
                          const TraceMarkers& markers = {},
                          const Tokenizer& tokenizer = Tokenizer::whitespace());

// Byte-exact inverse of parse_trace.
std::string serialize_trace(const ReasoningTrace& trace, const TraceMarkers& markers = {});

// One line of a trace corpus: {"id": ..., "mode": "low|medium|high",
// "raw_text": ...}. Extra fields are preserved in `extra` (the score
// subcommand groups by one of them); unknown fields are not an error here.
struct TraceRecord {
    std::string id;
    Mode mode = Mode::High;
    std::string raw_text;
    std::vector<std::pair<std::string, std::string>> extra;  // string-valued extras only
};

TraceRecord trace_record_from_json_line(const std::string& line);
std::string trace_record_to_json_line(const TraceRecord& record);

}  // namespace budgetrl
