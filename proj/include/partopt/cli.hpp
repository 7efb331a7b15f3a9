#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace partopt::cli {

enum ExitCode : int { kSuccess = 0, kValidation = 2, kNumerical = 3 };

/// Flat run configuration shared by every subcommand. JSON keys match the
/// member names; command-line flags override the file.
struct RunConfig {
    std::string command;
    std::filesystem::path out = "out";
    std::uint64_t seed = 0;
    double epsilon = 0.05;
    double h = -1.0;                 ///< <= 0 selects epsilon / 2
    int niter = 150;
    double alpha = 0.05;
    int nmod = 30;
    int n = 0;                       ///< 0: derived from fractions
    std::vector<double> fractions;   ///< empty: n equal fractions
    double c = 0.5;                  ///< single-phase fraction (fence, maximize with n <= 1)
    std::string polygon = "disk";    ///< square | disk | csv:PATH (csv only for voronoi-init)
    int restarts = 4;
    bool allow_partial = false;
    bool equal = false;
    std::string mode = "min-perimeter"; ///< capacity mode for voronoi-init
    int modes = 8;                   ///< Fourier modes for maximize
    int reinit_every = 25;
    std::string shape;               ///< optional JSON shape file
    double perturb = 0.3;            ///< a_2 of the default maximize start
    double t_min = 1.5;
    double t_max = 2.5;
    double t_step = 0.01;
    int max_iter = 2000;             ///< inner LBFGS iterations
    double tol_g = -1.0;             ///< inner tolerance; <= 0 selects 1e-6 sqrt(N)
    bool multiplier_term = false;    ///< maximize: volume multiplier term in the boundary density
    bool svg = true;
    bool quiet = false;

    /// Throws ValidationError.
    void validate() const;
    /// Per-phase fractions after applying n / equal defaults.
    std::vector<double> resolved_fractions() const;
};

/// Reads a flat JSON object; unknown keys raise ValidationError.
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

int cmd_voronoi_init(const RunConfig& cfg, std::ostream& log);
int cmd_fence(const RunConfig& cfg, std::ostream& log);
int cmd_partition(const RunConfig& cfg, std::ostream& log);
int cmd_maximize(const RunConfig& cfg, std::ostream& log);
int cmd_perimtrack(const RunConfig& cfg, std::ostream& log);

/// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace partopt::cli
