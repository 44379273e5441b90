#pragma once

#include <vector>

#include "lexer.hpp"

namespace teleo::detail {

class TokenCursor {
public:
    explicit TokenCursor(const std::vector<Token>& tokens) : tokens_(tokens) {}

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = pos_ + ahead;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }
    const Token& next() {
        const Token& t = peek();
        if (pos_ < tokens_.size() - 1) ++pos_;
        return t;
    }
    bool at_end() const { return peek().kind == TokenKind::End; }
    bool accept(std::string_view punct) {
        if (peek().is(punct)) {
            next();
            return true;
        }
        return false;
    }
    const Token& expect(std::string_view punct, std::string_view context);

    [[noreturn]] static void fail(const std::string& message, const Token& at);

private:
    const std::vector<Token>& tokens_;
    std::size_t pos_ = 0;
};

/// Number, string, variable, atom, compound, list, or parenthesised full term.
Term parse_operand_term(TokenCursor& cur);

/// Full term including infix operators.
Term parse_full_term(TokenCursor& cur);

std::string describe(const Token& tok);

}  // namespace teleo::detail
