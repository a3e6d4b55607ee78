#pragma once

// Command-line front end. Kept in a library so the tests can drive it
// without spawning processes.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qrisk::cli {

struct RunConfig {
    std::string command;
    int m = 0;  // 0: command default
    int m_min = 1;
    std::uint64_t shots = 8192;
    std::uint64_t seed = 0;
    double c = 0.0;  // <= 0: optimal for the run's M
    int u = 0;
    double alpha = 0.95;
    std::vector<double> gamma;      // 1/ns
    std::vector<double> crosstalk;  // alpha of the ZZ term
    double t_cnot = 100.0;
    int trajectories = 1000;
    bool full_grid = false;
    std::optional<std::string> data;
    bool synthetic = false;
    double rate_scale = 1.0;
    std::string problem = "binomial";
    int trials = 101;
    double p = 0.3;
    std::optional<std::string> out;
    bool report_gates = false;
    bool dump_circuit = false;
};

/// Parses and runs; returns the process exit code. Tables go to `out` when
/// no output directory is given, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qrisk::cli
