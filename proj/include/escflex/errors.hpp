#pragma once

#include <stdexcept>
#include <string>

namespace escflex {

/// Malformed or inconsistent scenario input. `file`, `line` and `field` say
/// where; any of them may be empty/zero when not applicable.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(std::string file, std::size_t line, std::string field, const std::string& what);

    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    std::string file_;
    std::size_t line_;
    std::string field_;
};

/// The scenario can never be satisfied, detected before any solve.
class InfeasibleScenarioError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace escflex
