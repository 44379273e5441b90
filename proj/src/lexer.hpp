#pragma once

// Tokenizer shared by the term parser and the program parser.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "teleo/errors.hpp"
#include "teleo/term.hpp"

namespace teleo::detail {

enum class TokenKind { Ident, Var, Integer, Decimal, String, Punct, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;  // identifier, punctuation, or decoded string contents
    Number number{std::int64_t{0}};
    std::size_t offset = 0;
    std::size_t line = 1;
    std::size_t column = 1;

    bool is(std::string_view punct) const { return kind == TokenKind::Punct && text == punct; }
    bool is_ident(std::string_view word) const { return kind == TokenKind::Ident && text == word; }
};

struct LexOptions {
    /// `%` starts a comment running to end of line.
    bool percent_comments = false;
};

/// Tokenizes the whole input; the last token is always End.
std::vector<Token> tokenize(std::string_view text, LexOptions options = {});

}  // namespace teleo::detail
