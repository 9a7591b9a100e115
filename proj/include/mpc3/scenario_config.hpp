#pragma once

#include <stdexcept>
#include <string>

#include "mpc3/simulation.hpp"

namespace mpc3 {

/// Malformed or invalid scenario file. `line` and `column` are 1-based; 0
/// when the problem is not tied to a position.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, int line, int column, const std::string& message);

    const std::string& source() const { return source_; }
    int line() const { return line_; }
    int column() const { return column_; }

private:
    std::string source_;
    int line_;
    int column_;
};

/// Parses a YAML scenario with sections plant, transcription, guidance,
/// collision and run. Missing keys keep their defaults; unknown keys are errors.
ScenarioConfig parse_scenario(const std::string& text, const std::string& source = "<string>");
ScenarioConfig load_scenario(const std::string& path);

/// YAML text that parses back to `config`.
std::string dump_scenario(const ScenarioConfig& config);

}  // namespace mpc3
