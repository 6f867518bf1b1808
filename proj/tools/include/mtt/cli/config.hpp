#pragma once

#include "mtt/experiment.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mtt::cli {

/// Invalid configuration. `line()` is 0 when the problem is not tied to a line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

    [[nodiscard]] int line() const { return line_; }

private:
    int line_;
};

/// Parses flat `key = value` text. `#` starts a comment; blank lines are
/// ignored; unknown or repeated keys are errors; missing keys keep their
/// defaults.
[[nodiscard]] ExperimentConfig parse_config(std::string_view text);

[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies a single `key = value` assignment on top of `config`.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Every documented key with its current value, formatted so that
/// parse_config(to_config_text(c)) reproduces `c` exactly.
[[nodiscard]] std::map<std::string, std::string> config_snapshot(const ExperimentConfig& config);

[[nodiscard]] std::string to_config_text(const ExperimentConfig& config);

}  // namespace mtt::cli
