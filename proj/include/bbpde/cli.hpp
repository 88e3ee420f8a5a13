#pragma once

#include <string>
#include <vector>

#include "bbpde/problem.hpp"
#include "bbpde/solution.hpp"

namespace bbpde {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;    // input / validation failures
inline constexpr int kExitVerify = 3;   // verification failed
inline constexpr int kExitSolver = 4;   // solver non-convergence

struct CliOptions {
    double tol = 1e-6;
    int grid_nt = 32;
    int grid_nx = 16;
    double tmin = 1e-3;
    double tmax = 0.0;          // <= 0: 0.66 * T0, clamped to the handle
    double ring_radius = 0.0;   // <= 0: R0 / 4
    std::vector<Cplx> psi;      // family override
    std::string candidate;      // classify / verify override
    bool verify_only = false;
    uint64_t seed = 12345;
    std::string out_dir = "out";
    std::string problem_path;
};

struct CmdResult {
    int exit_code = kExitOk;
    std::string report_path;  // JSON run report
    std::string message;      // one-line outcome summary
};

/// Shortest round-trip decimal rendering (identical inputs give identical
/// CSV bytes).
std::string format_double(double v);

CmdResult cmd_solve(const Problem& pb, const CliOptions& opt);
CmdResult cmd_family(const Problem& pb, const CliOptions& opt);
CmdResult cmd_classify(const Problem& pb, const CliOptions& opt);
CmdResult cmd_verify(const Problem& pb, const CliOptions& opt);

/// Runs every task in the problem file in order; first failure wins.
CmdResult run_problem(const Problem& pb, const CliOptions& opt);

}  // namespace bbpde
