#pragma once

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "foldsim/dynamics.hpp"
#include "foldsim/identification.hpp"

namespace foldsim {

// Process exit codes shared by all subcommands.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;       // unexpected error
inline constexpr int invalid_input = 2; // schema/reference/topology/value errors
inline constexpr int analysis = 3;      // burn-in, spectrum, rank, axis, singular mass
inline constexpr int blowup = 4;        // numerical divergence
} // namespace exit_code

struct SimulateOptions {
    std::string input;
    std::string out_dir = "out";
    SimulationConfig config{};
    int max_frames = 120;
    std::uint64_t seed = 0;
};

struct IdentifyOptions {
    std::string input;
    std::string out_dir = "out";
    std::string parent; // empty: first body of the recording
    std::string child;  // empty: second body
    PendulumGeometry geometry{};
    int order = 8;
    double trim_fraction = 0.05; // evaluation window trimmed at both ends
    std::uint64_t seed = 0;
};

struct HingeOptions {
    std::string model = "comprehensive"; // air | width | length | comprehensive
    std::optional<double> length;
    std::optional<double> width;
    std::optional<double> area;
};

struct FitSurfaceOptions {
    std::string input;           // CSV l,w,a,k_meas,b_meas
    std::string target = "both"; // k | b | both
};

// Subcommand drivers. Each returns an exit code and reports failures as a
// machine-readable JSON line on stderr.
int cmd_simulate(const SimulateOptions& options);
int cmd_identify(const IdentifyOptions& options);
int cmd_hinge(const HingeOptions& options, std::ostream& out = std::cout);
int cmd_fit_surface(const FitSurfaceOptions& options, std::ostream& out = std::cout);
int cmd_validate(const std::string& input, std::ostream& out = std::cout);

int run_cli(int argc, const char* const* argv);

} // namespace foldsim
