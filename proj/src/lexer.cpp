#include "homesafe/lexer.hpp"

#include <cctype>

#include "homesafe/error.hpp"

namespace homesafe {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

constexpr std::string_view two_char_puncts[] = {"==", "!=", "<=", ">=", "&&", "||"};
constexpr std::string_view one_char_puncts = "{}(),;:.<>!=*";

} // namespace

std::vector<Token> tokenize(std::string_view text, const std::string& origin) {
    std::vector<Token> out;
    int line = 1;
    int col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };

    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') advance(1);
            continue;
        }
        Token tok;
        tok.line = line;
        tok.column = col;
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < text.size() && ident_char(text[j])) ++j;
            // A trailing '-' belongs to whatever follows, not the identifier.
            while (j > i + 1 && text[j - 1] == '-') --j;
            tok.kind = TokenKind::Ident;
            tok.text = std::string(text.substr(i, j - i));
            advance(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '-' && i + 1 < text.size() &&
                    std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
            std::size_t j = i + 1;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            tok.kind = TokenKind::Number;
            tok.text = std::string(text.substr(i, j - i));
            advance(j - i);
        } else if (c == '"') {
            std::string value;
            std::size_t j = i + 1;
            bool closed = false;
            while (j < text.size()) {
                if (text[j] == '\\' && j + 1 < text.size()) {
                    value.push_back(text[j + 1]);
                    j += 2;
                } else if (text[j] == '"') {
                    closed = true;
                    ++j;
                    break;
                } else if (text[j] == '\n') {
                    break;
                } else {
                    value.push_back(text[j++]);
                }
            }
            if (!closed) throw ParseError(origin, line, col, "unterminated string literal");
            tok.kind = TokenKind::String;
            tok.text = std::move(value);
            advance(j - i);
        } else {
            bool matched = false;
            for (auto p : two_char_puncts) {
                if (text.substr(i, 2) == p) {
                    tok.kind = TokenKind::Punct;
                    tok.text = std::string(p);
                    advance(2);
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                if (one_char_puncts.find(c) == std::string_view::npos) {
                    throw ParseError(origin, line, col,
                                     std::string("unexpected character '") + c + "'");
                }
                tok.kind = TokenKind::Punct;
                tok.text = std::string(1, c);
                advance(1);
            }
        }
        out.push_back(std::move(tok));
    }
    Token end;
    end.kind = TokenKind::End;
    end.line = line;
    end.column = col;
    out.push_back(end);
    return out;
}

std::string describe(const Token& token) {
    switch (token.kind) {
    case TokenKind::End: return "end of input";
    case TokenKind::String: return "string \"" + token.text + "\"";
    case TokenKind::Number: return "number " + token.text;
    default: return "'" + token.text + "'";
    }
}

TokenStream::TokenStream(std::vector<Token> tokens, std::string origin)
    : tokens_(std::move(tokens)), origin_(std::move(origin)) {
    if (tokens_.empty() || tokens_.back().kind != TokenKind::End) tokens_.push_back(Token{});
}

const Token& TokenStream::peek(std::size_t ahead) const {
    std::size_t idx = pos_ + ahead;
    return idx < tokens_.size() ? tokens_[idx] : tokens_.back();
}

const Token& TokenStream::next() {
    const Token& t = peek();
    if (pos_ < tokens_.size() - 1) ++pos_;
    return t;
}

bool TokenStream::is_punct(std::string_view p, std::size_t ahead) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::Punct && t.text == p;
}

bool TokenStream::is_keyword(std::string_view word, std::size_t ahead) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::Ident && t.text == word;
}

bool TokenStream::accept_punct(std::string_view p) {
    if (!is_punct(p)) return false;
    next();
    return true;
}

bool TokenStream::accept_keyword(std::string_view word) {
    if (!is_keyword(word)) return false;
    next();
    return true;
}

void TokenStream::expect_punct(std::string_view p) {
    if (!accept_punct(p)) fail("unexpected " + describe(peek()), {"'" + std::string(p) + "'"});
}

void TokenStream::expect_keyword(std::string_view word) {
    if (!accept_keyword(word)) fail("unexpected " + describe(peek()), {"'" + std::string(word) + "'"});
}

std::string TokenStream::expect_ident(std::string_view what) {
    if (peek().kind != TokenKind::Ident) fail("unexpected " + describe(peek()), {std::string(what)});
    return next().text;
}

long TokenStream::expect_number() {
    if (peek().kind != TokenKind::Number) fail("unexpected " + describe(peek()), {"number"});
    return std::stol(next().text);
}

std::string TokenStream::expect_string() {
    if (peek().kind != TokenKind::String) fail("unexpected " + describe(peek()), {"string"});
    return next().text;
}

void TokenStream::fail(const std::string& message, std::vector<std::string> expected) const {
    fail_at(peek(), message, std::move(expected));
}

void TokenStream::fail_at(const Token& at, const std::string& message,
                          std::vector<std::string> expected) const {
    throw ParseError(origin_, at.line, at.column, message, std::move(expected));
}

} // namespace homesafe
