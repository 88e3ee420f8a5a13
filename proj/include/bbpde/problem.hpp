#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bbpde/conditions.hpp"
#include "bbpde/expr.hpp"
#include "bbpde/field.hpp"
#include "bbpde/germ.hpp"

namespace bbpde {

/// One requested task from a problem file.
struct Task {
    enum class Type { Solve, Family, Classify, Verify };
    Type type = Type::Solve;
    std::vector<Cplx> psi;      // family: germ coefficients
    std::string candidate;      // classify / verify: expression text
    bool verify_only = false;   // classify: skip the residual gate
};

struct SolverOverrides {
    double tol = 1e-10;
    int K = 6;            // series truncation order
    int grid_t = 128;
    int grid_x = 64;
    int max_iter = 40;
    int shrink_budget = 8;
};

/// A validated problem: the compiled equation, the fitted coefficient
/// conditions, solver overrides and the task list.
struct Problem {
    EquationSpec spec;
    ConditionReport conditions;
    SolverOverrides solver;
    std::vector<Task> tasks;
    std::optional<Expr> full_F;  // set when the file supplied a full F
};

/// Parses and validates a problem document (JSON). Exactly one of `full_F`
/// and `parts` must be present; the standing assumptions A1-A3 are enforced
/// and Re lambda(0,0) > 0 is required when a family task is requested.
/// Rejections name the violated assumption.
Problem load_problem_text(const std::string& json_text);
Problem load_problem(const std::string& path);

}  // namespace bbpde
