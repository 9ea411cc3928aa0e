// Apache License, Version 2.0, refer to LICENSE.txt

// Batch front end: ingest, fit, forecast, peak, diagnose, backtest, simulate.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 non-convergence.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace richfit::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNonConvergence = 4 };

/// Runs one command line (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

/// JSON text with reals printed at 17 significant digits; NaN and inf as null.
std::string dump(const Json& j, int indent = 2);

/// "%.17g" formatting used for every real in CSV and JSON output.
std::string format_real(double v);

std::uint64_t fnv1a(std::string_view bytes);

}  // namespace richfit::cli
