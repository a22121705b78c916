#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "balsel/models.hpp"
#include "balsel/statespace.hpp"

namespace balsel {

/// Exit codes shared by every command.
enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_domain = 2, exit_parse = 3, exit_cap = 4 };

/// n,p,q,seed[,discrete]
struct GeneratorSpec {
    Index n = 25, p = 25, q = 25;
    std::uint64_t seed = 0;
    TimeDomain domain = TimeDomain::continuous;

    /// Throws ParseError on malformed text.
    static GeneratorSpec parse(const std::string& text);
};

struct RunConfig {
    std::string command;
    std::string model_path;
    std::optional<GeneratorSpec> generate;
    Index rank = 0;    // 0: command default
    Index budget = 0;  // 0: same as rank
    bool no_collocate = false;
    std::string metric = "logdet";  // logdet | trace | h2
    std::vector<std::uint64_t> seeds;
    Index ensemble_count = 200;
    std::string out;  // file or directory, per command
    std::optional<std::uint64_t> cap;
    std::string gl_params;
    std::string freq_grid;  // lo,hi,count

    /// Scaling sweep controls.
    std::vector<Index> sizes{1000, 2000, 4000, 8000};
    std::vector<Index> ranks{5, 10, 20, 40};
    Index repeats = 5;
};

/// Exactly one model source must be set; loads or generates it.
StateSpaceModel load_model(const RunConfig& cfg);

/// Reads a GL parameter file (key=value) over the defaults.
GinzburgLandauParams load_gl_params(const std::string& path);

/// Each command writes its report to `log` and files under cfg.out. They
/// throw library errors; run_command maps them to exit codes.
void cmd_gramians(const RunConfig& cfg, std::ostream& log);
void cmd_select(const RunConfig& cfg, std::ostream& log);
void cmd_bruteforce(const RunConfig& cfg, std::ostream& log);
void cmd_bench_random(const RunConfig& cfg, std::ostream& log);
void cmd_gl_demo(const RunConfig& cfg, std::ostream& log);
void cmd_scaling(const RunConfig& cfg, std::ostream& log);

/// Dispatches on cfg.command; returns an ExitCode and prints errors to `err`.
int run_command(const RunConfig& cfg, std::ostream& log, std::ostream& err);

/// Least-squares slope of log(y) against log(x).
double fit_exponent(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace balsel
