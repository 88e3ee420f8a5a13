#pragma once

#include "bbpde/conditions.hpp"
#include "bbpde/picard.hpp"
#include "bbpde/series.hpp"

namespace bbpde {

struct SolveDiagnostics {
    ConditionReport conditions;
    double mu = 0.0;               // fitted decay exponent of a
    bool ladder_path = false;      // threshold regime dispatch
    int ladder_N = 0;
    double ladder_d = 0.0;
    PicardDiagnostics picard;
};

/// Base solution of the full equation: below threshold (Re lambda(0,0) < mu)
/// a single shifted contraction solve; at or above threshold the finite
/// reduction ladder plus the contraction solve on the transformed equation.
SolutionHandle solve_u0(const EquationSpec& spec, SolveDiagnostics* diag = nullptr,
                        const PicardConfig& pcfg = {});

/// The equation for U = u - u0 around a residual-certified base solution:
/// same normal form with a == 0, lambda_c = lambda + c1, b_c = b + c2 and the
/// re-expanded nonlinearity.
EquationSpec reduce_about(const EquationSpec& spec, const SolutionHandle& u0);

struct FamilyOptions {
    PicardConfig picard;
    double limit_tol = 1e-3;     // target of the data-law error at k = 16
    int k_lo = 4, k_hi = 16;     // t_k = 2^{-k} ladder of the limit check
    double R_limit = 0.2;        // x-disc of the limit sup
    int shrink_budget = 8;
};

/// One member of the solution family: u = v + w with v carrying the singular
/// Cauchy data and w the contraction correction, plus the measured data-law
/// error curve e_k = sup |t_k^{-lambda(0,x)} u - psi|.
struct FamilyMember {
    HoloGerm psi;
    SolutionHandle u;
    SolutionHandle v_part;
    SolutionHandle w_part;
    std::vector<std::pair<double, double>> limit_error_curve;  // (t_k, e_k)
    PicardDiagnostics picard;
};

/// Solves the a == 0 equation with singular data t^{-lambda(0,x)} u -> psi.
FamilyMember solve_family(const EquationSpec& spec0, const HoloGerm& psi,
                          const FamilyOptions& opt = {});

struct RecoverOptions {
    int k_lo = 8, k_hi = 16;     // dyadic ladder t_k = 2^{-k}
    double radius = 0.125;       // extraction circle
    int degree = 16;             // coefficients kept
};

/// Recovers the germ of a family member from the singular data limit,
/// extrapolating the dyadic ladder with the empirically estimated rate.
HoloGerm recover_psi(const EquationSpec& spec0, const SolutionHandle& u,
                     const RecoverOptions& opt = {});

struct FullSolveResult {
    SolutionHandle u;       // u0 + U(psi)
    SolutionHandle u0;
    FamilyMember member;    // the U(psi) part and its certificates
    EquationSpec reduced;   // the a == 0 equation used for the family
};

/// Full pipeline: base solution, reduction, family member, sum.
FullSolveResult solve_full(const EquationSpec& spec, const HoloGerm& psi,
                           const FamilyOptions& opt = {});

/// Pointwise sum of two handles (used for u0 + U(psi) and test oracles).
SolutionHandle sum_handles(const SolutionHandle& a, const SolutionHandle& b);

}  // namespace bbpde
