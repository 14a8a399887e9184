#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sorted_effects::cli {

enum class Command { spe, ca, subpop, synth };

const char* command_name(Command command);

struct RunConfig {
    Command command = Command::spe;

    // Data.
    std::string data;
    std::string schema;
    std::vector<std::string> factors;
    std::optional<std::string> samp_weight;
    bool drop_na = false;

    // Model and effect.
    std::string fm;
    std::string method = "ols";
    std::string taus = "5:95/100";
    std::string var;
    std::string var_type = "binary";
    std::vector<std::string> compare;
    std::string subgroup;

    // Bootstrap.
    double alpha = 0.1;
    std::uint64_t seed = 1;
    std::size_t b = 500;
    std::string boot_type = "nonpar";
    bool bc = true;
    bool parallel = false;
    // 0 means every hardware thread.
    unsigned ncores = 0;

    // spe.
    std::string us = "1:9/10";

    // ca and subpop.
    double u = 0.1;
    std::string interest = "moment";
    std::string cl = "both";
    std::vector<std::string> t;
    std::vector<std::string> cat;
    std::string range_cb = "1:99/100";
    std::string varx;
    std::string vary;
    bool overlap = false;
    std::vector<std::string> vars;

    // synth.
    std::string dgp;
    std::size_t n = 1000;
    std::string output;

    std::string out_dir = ".";
};

// Thrown by parse_command_line for --help; what() is the help text.
struct HelpRequest : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses argv (argv[0] is the program name). Throws HelpRequest for --help
/// and CLI11 parse errors otherwise.
RunConfig parse_command_line(int argc, const char* const* argv);

/// Runs one analysis and writes its result files into config.out_dir
/// (or config.output for synth). Throws sorted_effects::Error on failure.
void run(const RunConfig& config, std::ostream& log);

/// Parse, run, and map failures to a JSON error on `err` plus the exit code
/// of the error category.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sorted_effects::cli
