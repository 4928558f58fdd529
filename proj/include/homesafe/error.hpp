#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace homesafe {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Lexical or grammatical error in app, config, catalog or rule text.
class ParseError : public Error {
public:
    ParseError(std::string origin, int line, int column, std::string message,
               std::vector<std::string> expected = {});

    const std::string& origin() const { return origin_; }
    int line() const { return line_; }
    int column() const { return column_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::string origin_;
    int line_;
    int column_;
    std::vector<std::string> expected_;
};

// A well-formed input refers to something that does not exist or clashes.
class BindError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Replaying a trace did not reproduce the recorded steps.
class DivergenceError : public Error {
public:
    using Error::Error;
};

} // namespace homesafe
