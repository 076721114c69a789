#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpfactor/factorize.hpp"
#include "qpfactor/report.hpp"

namespace qpf {

/// Effective parameters of one command. JSON config files use the long flag names as keys.
struct RunConfig {
    std::string command;  // generate | factorize | join | check | report

    std::string in, out, out_dir, phase_out, u_out;
    std::string phase, phase1, phase2, against;

    // generate
    std::string kind = "sine";  // sine | modulated | chirp | arctan | constant | linear
    std::size_t n = 600;
    double a = 0.0, b = 6.0;
    double sine_period = 1.0;
    double value = 0.0;
    double noise = 0.0;
    std::uint64_t seed = 0;

    // factorize / report
    std::vector<double> offsets;  // empty: automatic
    std::size_t landmarks = 200;
    std::size_t landmark_seed = 0;
    std::optional<double> rmax;
    double rmax_fraction = 0.5;
    int prime = 47;
    std::size_t bins = 64;
    double tau = 3.0;
    std::optional<double> eps_const;
    std::optional<double> tol_phase;
    std::optional<double> tol_domain;
    std::optional<std::size_t> cocycle_index;
    double smoothing_factor = 2.0;
    bool extend_tail = true;

    // join / check
    std::size_t join_bins = 60;
    std::optional<double> period;  // window length for the injectivity check
    std::optional<double> tol;     // refinement tolerance
    double lipschitz = 2.0;
};

/// Bad flags or values. The message names the offending field.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// args excludes the program name. A `--config file.json` entry is expanded in place; flags
/// given on the command line win over the file.
RunConfig parse_config(const std::vector<std::string>& args);

FactorizeConfig to_factorize_config(const RunConfig& config);
Json config_echo(const RunConfig& config);

/// Runs a parsed command. Returns 0 on success and 1 on pipeline errors, which are reported
/// on `err` as "error: <kind>: <message>".
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_config + run; usage errors print help context on `err` and return 2.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qpf
