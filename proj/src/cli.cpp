#include "bbpde/cli.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "bbpde/classify.hpp"
#include "bbpde/pipeline.hpp"
#include "bbpde/residual.hpp"

namespace bbpde {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

json spec_summary(const Problem& pb) {
    const Cplx l00 = pb.spec.lambda00();
    json cond{{"c1_ok", pb.conditions.c1_ok},
              {"c2_ok", pb.conditions.c2_ok},
              {"c3_ok", pb.conditions.c3_ok},
              {"A", pb.conditions.A},
              {"mu_exponent", std::isfinite(pb.conditions.mu_exponent)
                                  ? json(pb.conditions.mu_exponent)
                                  : json("inf")},
              {"Lambda", pb.conditions.Lambda},
              {"B", pb.conditions.B}};
    return json{{"T0", pb.spec.T0},
                {"R0", pb.spec.R0},
                {"rho0", pb.spec.rho0},
                {"weight", pb.spec.weight.name()},
                {"lambda00", {l00.real(), l00.imag()}},
                {"conditions", cond}};
}

struct GridSpec {
    std::vector<double> ts;
    std::vector<Cplx> xs;
    double radius = 0.0;
};

GridSpec make_grid(const CliOptions& opt, const Problem& pb, double t_cap) {
    GridSpec g;
    double tmax = opt.tmax > 0 ? opt.tmax : 0.66 * pb.spec.T0;
    tmax = std::min(tmax, 0.995 * t_cap);
    const double tmin = std::min(opt.tmin, 0.5 * tmax);
    g.ts = log_spaced(tmin, tmax, opt.grid_nt);
    g.radius = opt.ring_radius > 0 ? opt.ring_radius : 0.25 * pb.spec.R0;
    g.xs = circle_nodes(0.0, g.radius, opt.grid_nx);
    return g;
}

void write_grid_csv(const std::string& path, const SolutionHandle& u,
                    const GridSpec& g) {
    std::ofstream out(path, std::ios::binary);
    out << "t,re_x,im_x,re_u,im_u\n";
    for (double t : g.ts)
        for (Cplx x : g.xs) {
            const Cplx v = u(t, x);
            out << format_double(t) << ',' << format_double(x.real()) << ','
                << format_double(x.imag()) << ',' << format_double(v.real())
                << ',' << format_double(v.imag()) << '\n';
        }
}

double grid_residual_sup(const EquationSpec& spec, const SolutionHandle& u,
                         const GridSpec& g) {
    std::vector<GridNode> nodes;
    for (double t : g.ts) {
        if (t * std::exp(2e-3) >= u.t_max) continue;
        for (Cplx x : g.xs) nodes.push_back({t, x});
    }
    return residual(spec, u, nodes).residual_sup;
}

json picard_json(const PicardDiagnostics& d) {
    return json{{"iterations", d.iterations},
                {"shrink_rounds", d.shrink_rounds},
                {"contraction_ratios", d.ratios},
                {"final_update", d.final_update},
                {"d_shift", d.d_shift},
                {"T_used", d.T_used},
                {"R_used", d.R_used}};
}

CmdResult finish(const CliOptions& opt, const std::string& name, json& report,
                 int code, const std::string& message) {
    fs::create_directories(opt.out_dir);
    const std::string path = (fs::path(opt.out_dir) / (name + "_report.json")).string();
    report["task"] = name;
    report["problem"] = opt.problem_path;
    report["exit_code"] = code;
    report["message"] = message;
    std::ofstream out(path, std::ios::binary);
    out << report.dump(2) << "\n";
    return {code, path, message};
}

SolutionHandle candidate_handle(const Problem& pb, const std::string& text,
                                double tol) {
    Expr e = Expr::parse(text);
    for (const std::string& v : e.free_vars())
        if (v != "t" && v != "x")
            throw SpecInvalidError("candidate may only use t and x");
    auto h = make_handle(
        [e](double t, Cplx x) { return e.eval(t, x, 0.0, 0.0); }, pb.spec.T0,
        pb.spec.R0, "exact-formula", 0.0, tol);
    return h;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

CmdResult cmd_solve(const Problem& pb, const CliOptions& opt) {
    json report;
    report["spec"] = spec_summary(pb);
    const double t0 = now_ms();

    PicardConfig pcfg;
    pcfg.tol = pb.solver.tol;
    pcfg.nt = pb.solver.grid_t;
    pcfg.nx = pb.solver.grid_x;
    pcfg.max_iter = pb.solver.max_iter;
    pcfg.shrink_budget = pb.solver.shrink_budget;

    SolveDiagnostics diag;
    SolutionHandle u0 = solve_u0(pb.spec, &diag, pcfg);

    fs::create_directories(opt.out_dir);
    const GridSpec g = make_grid(opt, pb, u0.t_max);
    const std::string csv = (fs::path(opt.out_dir) / "solve_u0.csv").string();
    write_grid_csv(csv, u0, g);
    const double rsup = grid_residual_sup(pb.spec, u0, g);

    report["outputs"] = json{{"grid_csv", csv},
                             {"residual_sup", rsup},
                             {"claimed_exponent", u0.claimed_exponent},
                             {"provenance", u0.provenance}};
    report["diagnostics"] =
        json{{"mu", diag.mu},
             {"ladder_path", diag.ladder_path},
             {"ladder_N", diag.ladder_N},
             {"ladder_d", diag.ladder_d},
             {"picard", picard_json(diag.picard)},
             {"timing_ms", now_ms() - t0}};
    return finish(opt, "solve", report, kExitOk,
                  "base solution written, residual_sup = " + format_double(rsup));
}

CmdResult cmd_family(const Problem& pb, const CliOptions& opt) {
    json report;
    report["spec"] = spec_summary(pb);
    const double t0 = now_ms();

    std::vector<Cplx> psi_coeffs = opt.psi;
    if (psi_coeffs.empty())
        for (const Task& task : pb.tasks)
            if (task.type == Task::Type::Family) { psi_coeffs = task.psi; break; }

    PicardConfig pcfg;
    pcfg.tol = pb.solver.tol;
    pcfg.nt = pb.solver.grid_t;
    pcfg.nx = pb.solver.grid_x;
    pcfg.max_iter = pb.solver.max_iter;
    pcfg.shrink_budget = pb.solver.shrink_budget;

    SolveDiagnostics diag;
    SolutionHandle u0 = solve_u0(pb.spec, &diag, pcfg);

    fs::create_directories(opt.out_dir);
    bool zero_psi = true;
    for (const Cplx& c : psi_coeffs)
        if (std::abs(c) > 0) zero_psi = false;

    const std::string csv = (fs::path(opt.out_dir) / "family_u.csv").string();
    const std::string curve_csv =
        (fs::path(opt.out_dir) / "family_limit_curve.csv").string();

    if (zero_psi) {
        // the trivial member: u = u0 exactly, byte-identical to cmd_solve
        const GridSpec g = make_grid(opt, pb, u0.t_max);
        write_grid_csv(csv, u0, g);
        std::ofstream curve(curve_csv, std::ios::binary);
        curve << "t_k,sup_error\n";
        for (int k = 4; k <= 16; ++k)
            curve << format_double(std::pow(2.0, -k)) << ",0\n";
        report["outputs"] = json{{"grid_csv", csv},
                                 {"limit_curve_csv", curve_csv},
                                 {"residual_sup", grid_residual_sup(pb.spec, u0,
                                                                    make_grid(opt, pb, u0.t_max))},
                                 {"psi_roundtrip_error", 0.0}};
        report["diagnostics"] = json{{"timing_ms", now_ms() - t0}};
        return finish(opt, "family", report, kExitOk, "trivial member, u = u0");
    }

    HoloGerm psi(psi_coeffs, 1.0);
    EquationSpec reduced = reduce_about(pb.spec, u0);
    FamilyOptions fopt;
    fopt.picard = pcfg;
    FamilyMember member = solve_family(reduced, psi, fopt);
    SolutionHandle u = sum_handles(u0, member.u);

    const GridSpec g = make_grid(opt, pb, u.t_max);
    write_grid_csv(csv, u, g);
    {
        std::ofstream curve(curve_csv, std::ios::binary);
        curve << "t_k,sup_error\n";
        for (auto [tk, e] : member.limit_error_curve)
            curve << format_double(tk) << ',' << format_double(e) << '\n';
    }

    // round trip through the recovered germ
    HoloGerm rec = recover_psi(reduced, member.u);
    double roundtrip = 0.0;
    for (size_t k = 0; k < std::max(rec.coeffs.size(), psi.coeffs.size()); ++k) {
        const Cplx a = k < rec.coeffs.size() ? rec.coeffs[k] : Cplx(0.0);
        const Cplx b = k < psi.coeffs.size() ? psi.coeffs[k] : Cplx(0.0);
        roundtrip = std::max(roundtrip, std::abs(a - b));
    }

    const double rsup = grid_residual_sup(pb.spec, u, g);
    json rec_j = json::array();
    for (const Cplx& c : rec.coeffs) rec_j.push_back({c.real(), c.imag()});
    report["outputs"] = json{{"grid_csv", csv},
                             {"limit_curve_csv", curve_csv},
                             {"residual_sup", rsup},
                             {"recovered_psi", rec_j},
                             {"psi_roundtrip_error", roundtrip},
                             {"limit_error_final",
                              member.limit_error_curve.back().second}};
    report["diagnostics"] = json{{"u0_picard", picard_json(diag.picard)},
                                 {"family_picard", picard_json(member.picard)},
                                 {"timing_ms", now_ms() - t0}};
    return finish(opt, "family", report, kExitOk,
                  "family member written, psi round-trip error = " +
                      format_double(roundtrip));
}

CmdResult cmd_classify(const Problem& pb, const CliOptions& opt) {
    json report;
    report["spec"] = spec_summary(pb);
    const double t0 = now_ms();

    std::string text = opt.candidate;
    bool verify_only = opt.verify_only;
    if (text.empty())
        for (const Task& task : pb.tasks)
            if (task.type == Task::Type::Classify) {
                text = task.candidate;
                verify_only = verify_only || task.verify_only;
                break;
            }
    if (text.empty())
        throw SpecInvalidError("classify: no candidate expression given");

    SolutionHandle cand = candidate_handle(pb, text, opt.tol);

    if (!verify_only) {
        auto grid = default_residual_grid(pb.spec, cand);
        const double rsup = residual(pb.spec, cand, grid).residual_sup;
        report["outputs"]["residual_sup"] = rsup;
        if (rsup > opt.tol) {
            report["outputs"]["candidate"] = text;
            return finish(opt, "classify", report, kExitVerify,
                          "candidate is not a solution, residual_sup = " +
                              format_double(rsup));
        }
    }

    GrowthReport gr = classify(cand);
    json sched{{"rho0", gr.schedule.rho0},
               {"j_lo", gr.schedule.j_lo},
               {"j_hi", gr.schedule.j_hi},
               {"sigma0", gr.schedule.sigma0},
               {"t_floor", gr.schedule.t_floor},
               {"stabilization", gr.schedule.stabilization}};
    report["outputs"] =
        json{{"candidate", text},
             {"d_fit", std::isfinite(gr.fit.d_fit) ? json(gr.fit.d_fit) : json("inf")},
             {"d_fit_derivative", std::isfinite(gr.fit.d_fit_derivative)
                                      ? json(gr.fit.d_fit_derivative)
                                      : json("inf")},
             {"log_modified", gr.fit.log_modified},
             {"scaled_sup_value", gr.scaled_sup_value},
             {"class_label", growth_class_name(gr.class_label)},
             {"schedule", sched},
             {"s_j", gr.scaled.s_j}};
    report["diagnostics"] = json{{"timing_ms", now_ms() - t0}};
    return finish(opt, "classify", report, kExitOk,
                  std::string("class = ") + growth_class_name(gr.class_label));
}

CmdResult cmd_verify(const Problem& pb, const CliOptions& opt) {
    json report;
    report["spec"] = spec_summary(pb);
    const double t0 = now_ms();

    std::string text = opt.candidate;
    if (text.empty())
        for (const Task& task : pb.tasks)
            if (task.type == Task::Type::Verify) { text = task.candidate; break; }
    if (text.empty())
        throw SpecInvalidError("verify: no candidate expression given");

    SolutionHandle cand = candidate_handle(pb, text, opt.tol);
    auto grid = default_residual_grid(pb.spec, cand);
    auto rep = residual(pb.spec, cand, grid);
    const bool pass = rep.residual_sup <= opt.tol;

    report["outputs"] = json{{"candidate", text},
                             {"residual_sup", rep.residual_sup},
                             {"relative_scale", rep.relative_scale},
                             {"tol", opt.tol},
                             {"pass", pass}};
    report["diagnostics"] = json{{"timing_ms", now_ms() - t0}};
    return finish(opt, "verify", report, pass ? kExitOk : kExitVerify,
                  pass ? "residual within tolerance"
                       : "residual above tolerance: " +
                             format_double(rep.residual_sup));
}

CmdResult run_problem(const Problem& pb, const CliOptions& opt) {
    CmdResult last;
    for (const Task& task : pb.tasks) {
        CliOptions topt = opt;
        CmdResult r;
        switch (task.type) {
            case Task::Type::Solve: r = cmd_solve(pb, topt); break;
            case Task::Type::Family:
                topt.psi = task.psi;
                r = cmd_family(pb, topt);
                break;
            case Task::Type::Classify:
                topt.candidate = task.candidate;
                topt.verify_only = task.verify_only;
                r = cmd_classify(pb, topt);
                break;
            case Task::Type::Verify:
                topt.candidate = task.candidate;
                r = cmd_verify(pb, topt);
                break;
        }
        if (r.exit_code != kExitOk) return r;
        last = r;
    }
    return last;
}

}  // namespace bbpde
