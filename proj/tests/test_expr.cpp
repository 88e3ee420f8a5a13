#include <doctest.h>

#include <random>

#include "bbpde/expr.hpp"

using namespace bbpde;

TEST_CASE("expression evaluation follows standard precedence") {
    Expr e = Expr::parse("x*t + 3*z1 + z2^2");
    const Cplx v = e.eval(0.1, 2.0, 1.0, 2.0);
    CHECK(std::abs(v - Cplx(7.2)) < 1e-14);

    CHECK(std::abs(Expr::parse("t^0.5").eval(0.09, 0.0) - Cplx(0.3)) < 1e-14);
    CHECK(std::abs(Expr::parse("2*3 + 4").eval(1, 0) - Cplx(10.0)) < 1e-14);
    CHECK(std::abs(Expr::parse("2 + 3*4").eval(1, 0) - Cplx(14.0)) < 1e-14);
    CHECK(std::abs(Expr::parse("2*x^2").eval(1, 3.0) - Cplx(18.0)) < 1e-14);
    CHECK(std::abs(Expr::parse("8/4/2").eval(1, 0) - Cplx(1.0)) < 1e-14);
    CHECK(std::abs(Expr::parse("1 - 2 - 3").eval(1, 0) - Cplx(-4.0)) < 1e-14);
    CHECK(std::abs(Expr::parse("i*i").eval(1, 0) - Cplx(-1.0)) < 1e-14);
    CHECK(std::abs(Expr::parse("exp(x)").eval(1, 1.0) - std::exp(Cplx(1.0))) < 1e-14);
    CHECK(std::abs(Expr::parse("log(t)").eval(0.5, 0) - Cplx(std::log(0.5))) < 1e-14);
    CHECK(std::abs(Expr::parse("-x*t/2 - t^2/4").eval(0.1, 0.2) -
                   Cplx(-0.2 * 0.1 / 2 - 0.01 / 4)) < 1e-15);
}

TEST_CASE("syntax errors carry positions") {
    try {
        Expr::parse("z1^");
        FAIL("expected a syntax error");
    } catch (const ExprSyntaxError& e) {
        CHECK(e.column == 4);
        CHECK(e.line == 1);
    }
    CHECK_THROWS_AS(Expr::parse("foo + 1"), ExprSyntaxError);
    CHECK_THROWS_AS(Expr::parse("t^x"), ExprSyntaxError);  // non-literal exponent
    CHECK_THROWS_AS(Expr::parse("(1 + 2"), ExprSyntaxError);
    CHECK_THROWS_AS(Expr::parse("1 + "), ExprSyntaxError);
}

TEST_CASE("log rejects non-positive-real arguments") {
    CHECK_THROWS_AS(Expr::parse("log(x)").eval(0.1, Cplx(0.0, 1.0)), Error);
    CHECK_THROWS_AS(Expr::parse("log(t - 1)").eval(0.5, 0.0), Error);
}

namespace {

// random tree generator for the round-trip property
Expr::NodePtr random_tree(std::mt19937_64& rng, int depth) {
    using Node = Expr::Node;
    auto n = std::make_shared<Node>();
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 8);
    switch (pick(rng)) {
        case 0: {
            n->kind = Node::Kind::Number;
            std::uniform_real_distribution<double> u(0.1, 9.9);
            n->number = std::round(u(rng) * 16) / 16.0;
            break;
        }
        case 1: n->kind = Node::Kind::Imag; break;
        case 2: {
            n->kind = Node::Kind::Var;
            const char* names[] = {"t", "x", "z1", "z2"};
            n->name = names[std::uniform_int_distribution<int>(0, 3)(rng)];
            break;
        }
        case 3:
        case 4: {
            n->kind = pick(rng) == 3 ? Node::Kind::Add : Node::Kind::Mul;
            n->a = random_tree(rng, depth - 1);
            n->b = random_tree(rng, depth - 1);
            break;
        }
        case 5: {
            n->kind = Node::Kind::Sub;
            n->a = random_tree(rng, depth - 1);
            n->b = random_tree(rng, depth - 1);
            break;
        }
        case 6: {
            n->kind = Node::Kind::Div;
            n->a = random_tree(rng, depth - 1);
            n->b = random_tree(rng, depth - 1);
            break;
        }
        case 7: {
            n->kind = Node::Kind::Pow;
            n->a = random_tree(rng, depth - 1);
            n->exponent = std::uniform_int_distribution<int>(0, 3)(rng) + 0.5;
            break;
        }
        default: {
            n->kind = Node::Kind::Fn;
            const char* fns[] = {"exp", "sqrt"};
            n->name = fns[std::uniform_int_distribution<int>(0, 1)(rng)];
            n->a = random_tree(rng, depth - 1);
            break;
        }
    }
    return n;
}

}  // namespace

TEST_CASE("parse of print is the identity on random trees") {
    std::mt19937_64 rng(20240811);
    for (int trial = 0; trial < 200; ++trial) {
        Expr tree(random_tree(rng, 6));
        Expr back = Expr::parse(tree.str());
        CHECK(tree == back);
    }
}

TEST_CASE("printed form evaluates like the tree") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (int trial = 0; trial < 100; ++trial) {
        Expr tree(random_tree(rng, 5));
        Expr back = Expr::parse(tree.str());
        const double t = 0.05 + 0.5 * std::abs(u(rng));
        const Cplx x(u(rng), u(rng)), z1(u(rng), u(rng)), z2(u(rng), u(rng));
        Cplx a, b;
        try {
            a = tree.eval(t, x, z1, z2);
            b = back.eval(t, x, z1, z2);
        } catch (const Error&) {
            continue;  // division by ~0 or similar; irrelevant here
        }
        if (!is_finite(a) || std::abs(a) > 1e12) continue;
        CHECK(std::abs(a - b) <= 1e-14 * (1.0 + std::abs(a)));
    }
}
