#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "orthosmooth/dataset.hpp"
#include "orthosmooth/spike_slab.hpp"

namespace orthosmooth::cli {

enum class Command { FitGlobal, FitLocal, DofCurve, TheoryDensity, Simulate };
enum class Scenario { Curve, Sparse, Overparam, NullLimit };

std::string command_name(Command c);
std::string scenario_name(Scenario s);

// Raw key=value settings before defaults are applied. Keys are flag names
// without the leading dashes.
using Settings = std::map<std::string, std::string>;

struct RunConfig {
    Command command = Command::FitGlobal;
    std::optional<std::filesystem::path> input;
    std::optional<SyntheticSpec> synthetic;
    std::filesystem::path out;

    int degree = 10;
    double bandwidth = 1.0;
    std::optional<int> min_neighbors;
    bool local = false;  // simulate: local instead of global fit
    PriorConfig prior;
    McmcConfig mcmc;
    unsigned jobs = 1;

    Scenario scenario = Scenario::Curve;
    double signal = 5.0;  // sparse scenario, in noise units

    double w = 0.1;
    int quad_points = 256;

    std::optional<long> kernel_index;
    bool dump_basis = false;

    // Every resolved parameter in canonical form, in a fixed order.
    std::vector<std::pair<std::string, std::string>> resolved;
};

/// Parses "key = value" lines; blank lines and '#' comments are skipped.
Settings parse_config_text(const std::string& text, const std::string& source);
Settings read_config_file(const std::filesystem::path& path);

/// Applies command-specific defaults and validates every value. Keys that
/// the chosen command does not use are rejected.
RunConfig resolve(const Settings& settings);

/// key=value text that reproduces the run when passed back via --config.
std::string manifest_text(const RunConfig& cfg);

struct OutputFile {
    std::string name;
    std::string content;
};

/// Runs the pipeline and returns the files it would write, without touching
/// the filesystem.
std::vector<OutputFile> execute(const RunConfig& cfg);

/// Full entry point: parse, execute, write outputs atomically. Returns the
/// process exit status (0 ok, 2 usage, 3 data, 4 numerical).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace orthosmooth::cli
