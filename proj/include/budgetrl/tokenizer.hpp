// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace budgetrl {

// Token counting backend. All reported token statistics are relative to the
// configured scheme; absolute counts from any particular model tokenizer are
// out of scope. The whitespace scheme is the default everywhere.
class Tokenizer {
public:
    enum class Scheme { Whitespace, UnicodeWord, External };

    using SplitFn = std::function<std::vector<std::string>(std::string_view)>;

    // Splits on runs of ASCII whitespace; consecutive separators collapse.
    static Tokenizer whitespace();

    // Tokens are maximal runs of alphanumerics/underscore; any byte >= 0x80
    // counts as a word byte so UTF-8 sequences stay glued together.
    static Tokenizer unicode_word();

    // Caller-provided splitter (e.g. a real model tokenizer behind FFI).
    static Tokenizer external(SplitFn fn);

    Scheme scheme() const noexcept { return scheme_; }

    std::vector<std::string> split(std::string_view text) const;
    int count(std::string_view text) const;

private:
    Tokenizer(Scheme scheme, SplitFn fn) : scheme_(scheme), fn_(std::move(fn)) {}

    Scheme scheme_;
    SplitFn fn_;
};

// Free-function form used throughout the pipeline code.
int count_tokens(std::string_view text, const Tokenizer& tokenizer);

// Joins tokens with single spaces. Inverse of whitespace split up to spacing.
std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace budgetrl
