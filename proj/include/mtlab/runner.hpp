#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace mtlab {

// Thrown for malformed configs (unknown backend, missing/duplicate command
// block, expression errors); maps to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunOutcome {
    std::vector<std::string> outputs;  // file names written under out_dir
};

// Executes one command against a config document and writes its artifacts
// plus manifest.json into out_dir. Valid commands: green, robin-map,
// minimize, continuation, sweep, mt-check, condition, bubble-check.
RunOutcome run_command(const nlohmann::json& config, const std::string& command,
                       const std::string& out_dir, int threads);

// `--set key.path=value` override; value parsed as JSON when possible.
void apply_override(nlohmann::json& config, const std::string& assignment);

// Full CLI behavior: returns the process exit code (0 ok, 2 config error,
// 3 numeric error) and reports errors as structured JSON on err.
int run_cli(const std::string& config_path, const std::string& command,
            const std::vector<std::string>& overrides, const std::string& out_dir, int threads,
            std::ostream& err);

}  // namespace mtlab
