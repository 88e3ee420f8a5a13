#include "bbpde/problem.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bbpde {

namespace {

using nlohmann::json;

ScalarField compile_coeff(const std::string& text, double T0, double R0,
                          const char* slot) {
    Expr e = Expr::parse(text);
    for (const std::string& v : e.free_vars())
        if (v != "t" && v != "x")
            throw SpecInvalidError(std::string("coefficient ") + slot +
                                   " may only use t and x, found '" + v + "'");
    return ScalarField(
        [e](double t, Cplx x) { return e.eval(t, x, 0.0, 0.0); }, T0, R0);
}

WeightFn parse_weight(const json& j, double T0) {
    if (!j.is_object()) throw SpecInvalidError("weight must be an object");
    const std::string form = j.value("form", "power");
    if (form == "power") {
        const double p = j.value("p", 1.0);
        if (!(p > 0)) throw SpecInvalidError("weight parameter p must be positive");
        return WeightFn::power(p, T0);
    }
    if (form == "sqrt") return WeightFn::sqrt(T0);
    if (form == "inverse-log-square") return WeightFn::inverse_log_square(T0);
    throw SpecInvalidError("unknown weight form '" + form + "'");
}

std::vector<Cplx> parse_psi(const json& j) {
    std::vector<Cplx> out;
    if (!j.is_array()) throw SpecInvalidError("psi must be an array");
    for (const auto& c : j) {
        if (c.is_number()) {
            out.push_back(Cplx(c.get<double>()));
        } else if (c.is_array() && c.size() == 2) {
            out.push_back(Cplx(c[0].get<double>(), c[1].get<double>()));
        } else {
            throw SpecInvalidError("psi entries must be numbers or [re, im] pairs");
        }
    }
    return out;
}

}  // namespace

Problem load_problem_text(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw SpecInvalidError(std::string("problem file is not valid JSON: ") +
                               e.what());
    }

    Problem pb;
    const double T0 = j.value("T0", 0.3);
    const double R0 = j.value("R0", 1.0);
    const double rho0 = j.value("rho0", 1.0);
    if (!(T0 > 0 && T0 < 1))
        throw SpecInvalidError("T0 must lie in (0, 1)");
    if (!(R0 > 0) || !(rho0 > 0))
        throw SpecInvalidError("R0 and rho0 must be positive");

    WeightFn weight = j.contains("weight") ? parse_weight(j["weight"], T0)
                                           : WeightFn::power(1.0, T0);

    const bool has_full = j.contains("full_F");
    const bool has_parts = j.contains("parts");
    if (has_full == has_parts)
        throw SpecInvalidError(
            "problem must contain exactly one of 'full_F' and 'parts'");

    if (has_full) {
        Expr F = Expr::parse(j["full_F"].get<std::string>());
        pb.full_F = F;
        auto ev = [F](double t, Cplx x, Cplx z1, Cplx z2) {
            return F.eval(t, x, z1, z2);
        };
        // normal_form enforces A2/A3 and the coefficient tail
        pb.spec = normal_form(ev, T0, R0, rho0, weight).spec;
    } else {
        const json& parts = j["parts"];
        EquationSpec spec;
        spec.T0 = T0;
        spec.R0 = R0;
        spec.rho0 = rho0;
        spec.weight = weight;
        spec.a = compile_coeff(parts.value("a", "0"), T0, R0, "a");
        spec.lambda = compile_coeff(parts.value("lambda", "0"), T0, R0, "lambda");
        spec.b = compile_coeff(parts.value("b", "0"), T0, R0, "b");
        if (parts.contains("nonlinear")) {
            for (const auto& item : parts["nonlinear"]) {
                if (!item.is_array() || item.size() != 3)
                    throw SpecInvalidError(
                        "nonlinear entries must be [j, alpha, expr]");
                const int jj = item[0].get<int>();
                const int al = item[1].get<int>();
                if (jj < 0 || al < 0 || jj + al < 2)
                    throw SpecInvalidError("nonlinear orders need j + alpha >= 2");
                spec.nonlinear.push_back(
                    {jj, al,
                     compile_coeff(item[2].get<std::string>(), T0, R0,
                                   "nonlinear coefficient")});
            }
        }
        // A2) and A3): the t -> 0 limits of a and b vanish on a sample circle
        double a2 = 0.0, a3 = 0.0, scale = 1e-12;
        for (Cplx x : circle_nodes(0.0, 0.6 * R0, 8)) {
            a2 = std::max(a2, std::abs(limit_t0(spec.a, x)));
            a3 = std::max(a3, std::abs(limit_t0(spec.b, x)));
            scale = std::max(scale, std::abs(spec.a(T0, x)) +
                                        std::abs(spec.lambda(T0, x)) + 1.0);
        }
        if (a2 > 1e-9 * scale)
            throw SpecInvalidError(
                "a(0,x) != 0: assumption A2 (F(0,x,0,0) = 0) is violated");
        if (a3 > 1e-9 * scale)
            throw SpecInvalidError(
                "b(0,x) != 0: assumption A3 (F_z2(0,x,0,0) = 0) is violated");
        pb.spec = spec;
    }

    if (j.contains("solver")) {
        const json& s = j["solver"];
        pb.solver.tol = s.value("tol", pb.solver.tol);
        pb.solver.K = s.value("K", pb.solver.K);
        pb.solver.grid_t = s.value("grid_t", pb.solver.grid_t);
        pb.solver.grid_x = s.value("grid_x", pb.solver.grid_x);
        pb.solver.max_iter = s.value("max_iter", pb.solver.max_iter);
        pb.solver.shrink_budget = s.value("shrink_budget", pb.solver.shrink_budget);
    }

    if (j.contains("tasks")) {
        for (const auto& tj : j["tasks"]) {
            Task task;
            const std::string type = tj.value("type", "solve");
            if (type == "solve") task.type = Task::Type::Solve;
            else if (type == "family") task.type = Task::Type::Family;
            else if (type == "classify") task.type = Task::Type::Classify;
            else if (type == "verify") task.type = Task::Type::Verify;
            else throw SpecInvalidError("unknown task type '" + type + "'");
            if (tj.contains("psi")) task.psi = parse_psi(tj["psi"]);
            task.candidate = tj.value("candidate", "");
            task.verify_only = tj.value("verify_only", false);
            if ((task.type == Task::Type::Classify ||
                 task.type == Task::Type::Verify) &&
                task.candidate.empty())
                throw SpecInvalidError("classify/verify tasks need a candidate");
            pb.tasks.push_back(std::move(task));
        }
    }

    pb.conditions = check_conditions(pb.spec);

    // a family needs the positive-spectrum assumption
    for (const Task& task : pb.tasks)
        if (task.type == Task::Type::Family) {
            const Cplx l00 = pb.spec.lambda00();
            if (!(l00.real() > 0))
                throw SpecInvalidError(
                    "family task requires Re lambda(0,0) > 0 (assumption 1.3)");
        }
    return pb;
}

Problem load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecInvalidError("cannot open problem file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_problem_text(ss.str());
}

}  // namespace bbpde
