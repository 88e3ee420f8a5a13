#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "bbpde/cli.hpp"

using namespace bbpde;

namespace {

void add_common(CLI::App* cmd, CliOptions& opt, std::string& grid,
                std::string& psi_text) {
    cmd->add_option("problem", opt.problem_path, "problem file (JSON)")
        ->required();
    cmd->add_option("--tol", opt.tol, "verification tolerance");
    cmd->add_option("--grid", grid, "output grid as NTxNX, e.g. 16x16");
    cmd->add_option("--tmin", opt.tmin, "smallest output t");
    cmd->add_option("--tmax", opt.tmax, "largest output t");
    cmd->add_option("--radius", opt.ring_radius, "output x-circle radius");
    cmd->add_option("--psi", psi_text, "germ coefficients, comma separated");
    cmd->add_option("--candidate", opt.candidate, "candidate expression");
    cmd->add_flag("--verify-only", opt.verify_only,
                  "classify without the residual gate");
    cmd->add_option("--seed", opt.seed, "seed for sampled checks");
    cmd->add_option("--out-dir", opt.out_dir, "output directory");
}

void parse_grid(const std::string& grid, CliOptions& opt) {
    if (grid.empty()) return;
    const size_t x = grid.find('x');
    if (x == std::string::npos)
        throw SpecInvalidError("grid must look like 16x16");
    opt.grid_nt = std::stoi(grid.substr(0, x));
    opt.grid_nx = std::stoi(grid.substr(x + 1));
    if (opt.grid_nt < 2 || opt.grid_nx < 1)
        throw SpecInvalidError("grid sizes must be at least 2x1");
}

void parse_psi(const std::string& text, CliOptions& opt) {
    if (text.empty()) return;
    opt.psi.clear();
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string tok = text.substr(pos, comma - pos);
        if (!tok.empty()) opt.psi.push_back(Cplx(std::stod(tok)));
        pos = comma + 1;
        if (comma == text.size()) break;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"solver and classifier for singular first order PDEs "
                 "t u_t = F(t, x, u, u_x)"};
    app.require_subcommand(1);

    CliOptions opt;
    std::string grid, psi_text;

    auto* solve = app.add_subcommand("solve", "compute the base solution u0");
    auto* family = app.add_subcommand(
        "family", "compute the solution attached to a data germ psi");
    auto* classify =
        app.add_subcommand("classify", "growth classification of a candidate");
    auto* verify = app.add_subcommand("verify", "residual check of a candidate");
    auto* run = app.add_subcommand("run", "run every task in the problem file");
    for (auto* cmd : {solve, family, classify, verify, run})
        add_common(cmd, opt, grid, psi_text);

    CLI11_PARSE(app, argc, argv);

    try {
        parse_grid(grid, opt);
        parse_psi(psi_text, opt);
        const Problem pb = load_problem(opt.problem_path);
        CmdResult r;
        if (solve->parsed()) r = cmd_solve(pb, opt);
        else if (family->parsed()) r = cmd_family(pb, opt);
        else if (classify->parsed()) r = cmd_classify(pb, opt);
        else if (verify->parsed()) r = cmd_verify(pb, opt);
        else r = run_problem(pb, opt);
        std::printf("%s\n", r.message.c_str());
        if (!r.report_path.empty())
            std::printf("report: %s\n", r.report_path.c_str());
        return r.exit_code;
    } catch (const ExprSyntaxError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const SpecInvalidError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const PreconditionError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const ConfigurationError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const NonIntegrableWeightError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const Error& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return kExitSolver;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitSolver;
    }
}
