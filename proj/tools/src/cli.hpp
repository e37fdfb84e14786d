#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace idewave::cli {

/// Runs one subcommand. Returns 0 on success, 1 when a verification or
/// convergence check fails (the report is still written) and 2 on invalid
/// input.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// JSON text with every floating-point number printed with 17 significant
/// digits; non-finite values become null.
std::string to_json_text(const nlohmann::json& value);

}  // namespace idewave::cli
