#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "zld/experiments.hpp"

namespace zld {

inline constexpr const char* kArtifactVersion = "1.0.0";

// flat dotted keys, e.g. "ladder.alpha"
nlohmann::json default_config();

struct ConfigResult {
    nlohmann::json resolved;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

// schema check with defaults filled in; collects every error instead of stopping at the first
ConfigResult validate_config(const std::string& json_text);
ConfigResult validate_config(const nlohmann::json& partial);

using Outputs = std::vector<std::pair<std::string, Table>>;  // file name, table

// runs one experiment on a resolved configuration
Outputs run_experiment(const std::string& name, const nlohmann::json& cfg);
const std::vector<std::string>& experiment_names();

std::string crc32_hex(const std::string& bytes);

// exit codes: 0 ok, 1 a check failed, 2 configuration error, 3 resource error
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace zld
