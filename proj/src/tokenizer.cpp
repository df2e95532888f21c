// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#include "budgetrl/tokenizer.hpp"

#include "budgetrl/errors.hpp"

namespace budgetrl {
namespace {

bool is_ascii_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_word_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
           c == '_' || c >= 0x80;
}

std::vector<std::string> split_whitespace(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_ascii_space(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_ascii_space(text[i])) ++i;
        if (i > start) out.emplace_back(text.substr(start, i - start));
    }
    return out;
}

std::vector<std::string> split_unicode_word(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_word_byte(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && is_word_byte(text[i])) ++i;
        if (i > start) out.emplace_back(text.substr(start, i - start));
    }
    return out;
}

}  // namespace

Tokenizer Tokenizer::whitespace() {
    return Tokenizer(Scheme::Whitespace, &split_whitespace);
}

Tokenizer Tokenizer::unicode_word() {
    return Tokenizer(Scheme::UnicodeWord, &split_unicode_word);
}

Tokenizer Tokenizer::external(SplitFn fn) {
    if (!fn) throw ValidationError("external tokenizer requires a split function");
    return Tokenizer(Scheme::External, std::move(fn));
}

std::vector<std::string> Tokenizer::split(std::string_view text) const {
    return fn_(text);
}

int Tokenizer::count(std::string_view text) const {
    return static_cast<int>(fn_(text).size());
}

int count_tokens(std::string_view text, const Tokenizer& tokenizer) {
    return tokenizer.count(text);
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out += ' ';
        out += tokens[i];
    }
    return out;
}

}  // namespace budgetrl
