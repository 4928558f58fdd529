#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace homesafe {

enum class TokenKind { Ident, Number, String, Punct, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text; // string literals are unescaped
    int line = 1;
    int column = 1;
};

// Tokenizer shared by the app language, condition predicates and the config
// and rule formats. '#' starts a comment running to end of line. Identifiers
// may contain '-' after the first character so role tags such as
// "main-door" lex as one token.
std::vector<Token> tokenize(std::string_view text, const std::string& origin);

// Cursor over a token vector with the error reporting the parsers share.
class TokenStream {
public:
    TokenStream(std::vector<Token> tokens, std::string origin);

    const Token& peek(std::size_t ahead = 0) const;
    const Token& next();
    bool at_end() const { return peek().kind == TokenKind::End; }

    bool is_punct(std::string_view p, std::size_t ahead = 0) const;
    bool is_keyword(std::string_view word, std::size_t ahead = 0) const;
    bool accept_punct(std::string_view p);
    bool accept_keyword(std::string_view word);

    void expect_punct(std::string_view p);
    void expect_keyword(std::string_view word);
    std::string expect_ident(std::string_view what = "identifier");
    long expect_number();
    std::string expect_string();

    [[noreturn]] void fail(const std::string& message,
                           std::vector<std::string> expected = {}) const;
    [[noreturn]] void fail_at(const Token& at, const std::string& message,
                              std::vector<std::string> expected = {}) const;

    const std::string& origin() const { return origin_; }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::string origin_;
};

std::string describe(const Token& token);

} // namespace homesafe
