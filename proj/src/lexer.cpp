#include "lexer.hpp"

#include <array>
#include <cctype>
#include <charconv>

namespace teleo::detail {
namespace {

// Longest first.
constexpr std::array<std::string_view, 28> kPuncts = {
    "::=", "~>", "||", "..", ">=", "<=", "==", "::", "(", ")", "[", "]", "{", "}",
    ",",   "|",  "&",  ":",  ";",  "<",  ">",  "+",  "-",  "*",  "/",  "=", "@", "!"};

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Whether a '-' at this point may start a negative literal: only when the
// previous token cannot end an operand.
bool operand_expected(const std::vector<Token>& tokens) {
    if (tokens.empty()) return true;
    const Token& prev = tokens.back();
    switch (prev.kind) {
        case TokenKind::Ident:
        case TokenKind::Var:
        case TokenKind::Integer:
        case TokenKind::Decimal:
        case TokenKind::String:
            return false;
        case TokenKind::Punct:
            return !(prev.text == ")" || prev.text == "]" || prev.text == "}");
        case TokenKind::End:
            return true;
    }
    return true;
}

class Lexer {
public:
    Lexer(std::string_view text, LexOptions options) : text_(text), options_(options) {}

    std::vector<Token> run() {
        std::vector<Token> tokens;
        while (true) {
            skip_space();
            Token tok;
            tok.offset = pos_;
            tok.line = line_;
            tok.column = pos_ - line_start_ + 1;
            if (pos_ >= text_.size()) {
                tokens.push_back(tok);
                return tokens;
            }
            char c = text_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '-' && pos_ + 1 < text_.size() &&
                 std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) &&
                 operand_expected(tokens))) {
                lex_number(tok);
            } else if (std::islower(static_cast<unsigned char>(c)) || c == '_') {
                tok.kind = TokenKind::Ident;
                tok.text = take_word();
            } else if (std::isupper(static_cast<unsigned char>(c))) {
                tok.kind = TokenKind::Var;
                tok.text = take_word();
            } else if (c == '"') {
                lex_string(tok);
            } else {
                lex_punct(tok);
            }
            tokens.push_back(std::move(tok));
        }
    }

private:
    [[noreturn]] void fail(const std::string& message, std::size_t at) const {
        std::size_t line = 1;
        std::size_t line_start = 0;
        for (std::size_t i = 0; i < at && i < text_.size(); ++i) {
            if (text_[i] == '\n') {
                ++line;
                line_start = i + 1;
            }
        }
        throw SyntaxError(message, at, line, at - line_start + 1);
    }

    void skip_space() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '\n') {
                ++pos_;
                ++line_;
                line_start_ = pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == '%' && options_.percent_comments) {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::string take_word() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    bool digit_at(std::size_t i) const {
        return i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]));
    }

    void lex_number(Token& tok) {
        std::size_t start = pos_;
        if (text_[pos_] == '-') ++pos_;
        while (digit_at(pos_)) ++pos_;
        bool decimal = false;
        if (pos_ < text_.size() && text_[pos_] == '.' && digit_at(pos_ + 1)) {
            decimal = true;
            ++pos_;
            while (digit_at(pos_)) ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t exp = pos_ + 1;
            if (exp < text_.size() && (text_[exp] == '+' || text_[exp] == '-')) ++exp;
            if (digit_at(exp)) {
                decimal = true;
                pos_ = exp;
                while (digit_at(pos_)) ++pos_;
            }
        }
        if (pos_ < text_.size() && ident_char(text_[pos_])) {
            fail("malformed number", start);
        }
        std::string_view lit = text_.substr(start, pos_ - start);
        const char* first = lit.data();
        const char* last = lit.data() + lit.size();
        if (decimal) {
            double v = 0;
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc{} || ptr != last) fail("malformed number", start);
            tok.kind = TokenKind::Decimal;
            tok.number = Number{v};
        } else {
            std::int64_t v = 0;
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc{} || ptr != last) fail("integer out of range", start);
            tok.kind = TokenKind::Integer;
            tok.number = Number{v};
        }
        tok.text = std::string(lit);
    }

    void lex_string(Token& tok) {
        std::size_t start = pos_;
        ++pos_;
        std::string out;
        while (true) {
            if (pos_ >= text_.size()) fail("unterminated string", start);
            char c = text_[pos_++];
            if (c == '"') break;
            if (c == '\n') fail("newline in string literal", pos_ - 1);
            if (c == '\\') {
                if (pos_ >= text_.size()) fail("unterminated string", start);
                char e = text_[pos_++];
                switch (e) {
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    default: fail("unknown escape in string", pos_ - 2);
                }
            } else {
                out += c;
            }
        }
        tok.kind = TokenKind::String;
        tok.text = std::move(out);
    }

    void lex_punct(Token& tok) {
        for (std::string_view p : kPuncts) {
            if (text_.substr(pos_, p.size()) == p) {
                tok.kind = TokenKind::Punct;
                tok.text = std::string(p);
                pos_ += p.size();
                return;
            }
        }
        fail(std::string("unexpected character '") + text_[pos_] + "'", pos_);
    }

    std::string_view text_;
    LexOptions options_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t line_start_ = 0;
};

}  // namespace

std::vector<Token> tokenize(std::string_view text, LexOptions options) {
    return Lexer(text, options).run();
}

}  // namespace teleo::detail
