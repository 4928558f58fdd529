#include "homesafe/error.hpp"

namespace homesafe {

namespace {

std::string format_parse_error(const std::string& origin, int line, int column,
                               const std::string& message,
                               const std::vector<std::string>& expected) {
    std::string out = origin + ":" + std::to_string(line) + ":" + std::to_string(column) +
                      ": " + message;
    if (!expected.empty()) {
        out += " (expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i > 0) out += i + 1 == expected.size() ? " or " : ", ";
            out += expected[i];
        }
        out += ")";
    }
    return out;
}

} // namespace

ParseError::ParseError(std::string origin, int line, int column, std::string message,
                       std::vector<std::string> expected)
    : Error(format_parse_error(origin, line, column, message, expected)),
      origin_(std::move(origin)),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {}

} // namespace homesafe
