#pragma once

// Command-line front end. Every subcommand first resolves its flags and input
// files into a self-contained JSON request, then executes that request. The
// manifest written next to the outputs stores the request, so `replay` runs
// exactly the same computation again.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace plab::cli {

enum ExitCode : int { Ok = 0, Failure = 1, BadInput = 2, NumericalFailure = 3, Usage = 64 };

struct Context {
    unsigned threads = 1;
    std::filesystem::path out_dir = ".";
};

struct OutputFile {
    std::string path;   ///< relative to the output directory
    std::uintmax_t bytes = 0;
    std::string fnv1a64;
};

/// Runs one resolved request and returns the files it wrote.
std::vector<OutputFile> execute(const std::string& subcommand, const nlohmann::json& request, const Context& ctx);

/// Full dispatcher including manifest writing and exit-code mapping.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// "from:to:lin|log:count" -> values; count 0 gives an empty list.
std::vector<double> parse_range(const std::string& spec);

std::string fnv1a64_hex(const std::filesystem::path& file);

}  // namespace plab::cli
