#include "bbpde/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace bbpde {

namespace {

using Node = Expr::Node;
using NodePtr = Expr::NodePtr;
using Kind = Node::Kind;

std::shared_ptr<Node> make(Kind k) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    return n;
}

struct Parser {
    const std::string& s;
    size_t pos = 0;

    explicit Parser(const std::string& text) : s(text) {}

    void locate(size_t p, int& line, int& col) const {
        line = 1;
        col = 1;
        for (size_t i = 0; i < p && i < s.size(); ++i) {
            if (s[i] == '\n') { ++line; col = 1; } else ++col;
        }
    }
    [[noreturn]] void fail(const std::string& msg, size_t at) const {
        int line, col;
        locate(at, line, col);
        throw ExprSyntaxError(msg, line, col);
    }

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
            ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) { ++pos; return true; }
        return false;
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }

    double number() {
        skip_ws();
        const size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        if (pos == start || (pos == start + 1 && s[start] == '.'))
            fail("expected a number", start);
        if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
            size_t ep = pos + 1;
            if (ep < s.size() && (s[ep] == '+' || s[ep] == '-')) ++ep;
            size_t dg = ep;
            while (dg < s.size() && std::isdigit(static_cast<unsigned char>(s[dg]))) ++dg;
            if (dg > ep) pos = dg;
        }
        return std::stod(s.substr(start, pos - start));
    }

    double signed_real() {
        skip_ws();
        double sign = 1.0;
        if (eat('-')) sign = -1.0;
        else eat('+');
        skip_ws();
        if (pos >= s.size() ||
            (!std::isdigit(static_cast<unsigned char>(s[pos])) && s[pos] != '.'))
            fail("exponent must be a real literal", pos);
        return sign * number();
    }

    std::string ident() {
        skip_ws();
        const size_t start = pos;
        while (pos < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
            ++pos;
        return s.substr(start, pos - start);
    }

    NodePtr expr();

    NodePtr atom() {
        skip_ws();
        const size_t at = pos;
        const char c = peek();
        if (c == '(') {
            ++pos;
            NodePtr e = expr();
            if (!eat(')')) fail("expected ')'", pos);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            auto n = make(Kind::Number);
            n->number = number();
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::string id = ident();
            if (id == "i") return make(Kind::Imag);
            if (id == "t" || id == "x" || id == "z1" || id == "z2") {
                auto n = make(Kind::Var);
                n->name = id;
                return n;
            }
            if (id == "log" || id == "exp" || id == "sqrt") {
                if (!eat('(')) fail("expected '(' after function name", pos);
                NodePtr arg = expr();
                if (!eat(')')) fail("expected ')'", pos);
                auto n = make(Kind::Fn);
                n->name = id;
                n->a = arg;
                return n;
            }
            fail("unknown identifier '" + id + "'", at);
        }
        fail("expected a value", at);
    }

    NodePtr factor() {
        NodePtr base = atom();
        if (eat('^')) {
            auto n = make(Kind::Pow);
            n->a = base;
            n->exponent = signed_real();
            return n;
        }
        return base;
    }

    NodePtr term() {
        NodePtr lhs = factor();
        for (;;) {
            if (eat('*')) {
                auto n = make(Kind::Mul);
                n->a = lhs;
                n->b = factor();
                lhs = n;
            } else if (eat('/')) {
                auto n = make(Kind::Div);
                n->a = lhs;
                n->b = factor();
                lhs = n;
            } else {
                return lhs;
            }
        }
    }
};

NodePtr Parser::expr() {
    skip_ws();
    NodePtr lhs;
    if (eat('-')) {
        auto n = make(Kind::Neg);
        n->a = term();
        lhs = n;
    } else {
        eat('+');
        lhs = term();
    }
    for (;;) {
        if (eat('+')) {
            auto n = make(Kind::Add);
            n->a = lhs;
            n->b = term();
            lhs = n;
        } else if (eat('-')) {
            auto n = make(Kind::Sub);
            n->a = lhs;
            n->b = term();
            lhs = n;
        } else {
            return lhs;
        }
    }
}

Cplx eval_node(const Node& n, double t, Cplx x, Cplx z1, Cplx z2) {
    switch (n.kind) {
        case Kind::Number: return Cplx(n.number);
        case Kind::Imag: return Cplx(0.0, 1.0);
        case Kind::Var:
            if (n.name == "t") return Cplx(t);
            if (n.name == "x") return x;
            if (n.name == "z1") return z1;
            return z2;
        case Kind::Add:
            return eval_node(*n.a, t, x, z1, z2) + eval_node(*n.b, t, x, z1, z2);
        case Kind::Sub:
            return eval_node(*n.a, t, x, z1, z2) - eval_node(*n.b, t, x, z1, z2);
        case Kind::Mul:
            return eval_node(*n.a, t, x, z1, z2) * eval_node(*n.b, t, x, z1, z2);
        case Kind::Div:
            return eval_node(*n.a, t, x, z1, z2) / eval_node(*n.b, t, x, z1, z2);
        case Kind::Neg: return -eval_node(*n.a, t, x, z1, z2);
        case Kind::Pow: {
            const Cplx base = eval_node(*n.a, t, x, z1, z2);
            const double p = n.exponent;
            const long ip = std::lround(p);
            // integer exponents by repeated multiplication keep polynomials
            // exact for complex bases
            if (std::abs(p - double(ip)) < 1e-12 && std::abs(p) < 64) {
                Cplx r = 1.0;
                for (long k = 0; k < std::labs(ip); ++k) r *= base;
                return ip >= 0 ? r : 1.0 / r;
            }
            return std::pow(base, Cplx(p));
        }
        case Kind::Fn: {
            const Cplx a = eval_node(*n.a, t, x, z1, z2);
            if (n.name == "exp") return std::exp(a);
            if (n.name == "sqrt") return std::sqrt(a);
            // natural log of a positive real argument only
            if (!(a.real() > 0) ||
                std::abs(a.imag()) > 1e-12 * (1 + std::abs(a.real())))
                throw Error("log expects a positive real argument");
            return Cplx(std::log(a.real()));
        }
    }
    return 0.0;
}

int precedence(Kind k) {
    switch (k) {
        case Kind::Add:
        case Kind::Sub:
        case Kind::Neg: return 1;
        case Kind::Mul:
        case Kind::Div: return 2;
        case Kind::Pow: return 3;
        default: return 4;
    }
}

void print_real(double v, std::ostringstream& os) {
    std::ostringstream tmp;
    tmp.precision(17);
    tmp << v;
    os << tmp.str();
}

void print_node(const Node& n, std::ostringstream& os, int parent_prec) {
    const int prec = precedence(n.kind);
    const bool parens = prec < parent_prec;
    if (parens) os << '(';
    switch (n.kind) {
        case Kind::Number: print_real(n.number, os); break;
        case Kind::Imag: os << 'i'; break;
        case Kind::Var: os << n.name; break;
        case Kind::Add:
            print_node(*n.a, os, prec);
            os << " + ";
            print_node(*n.b, os, prec + 1);
            break;
        case Kind::Sub:
            print_node(*n.a, os, prec);
            os << " - ";
            print_node(*n.b, os, prec + 1);
            break;
        case Kind::Mul:
            print_node(*n.a, os, prec);
            os << "*";
            print_node(*n.b, os, prec + 1);
            break;
        case Kind::Div:
            print_node(*n.a, os, prec);
            os << "/";
            print_node(*n.b, os, prec + 1);
            break;
        case Kind::Neg:
            os << '-';
            print_node(*n.a, os, prec + 1);
            break;
        case Kind::Pow:
            print_node(*n.a, os, prec + 1);
            os << '^';
            print_real(n.exponent, os);
            break;
        case Kind::Fn:
            os << n.name << '(';
            print_node(*n.a, os, 0);
            os << ')';
            break;
    }
    if (parens) os << ')';
}

void collect_vars(const Node& n, std::set<std::string>& out) {
    if (n.kind == Kind::Var) out.insert(n.name);
    if (n.a) collect_vars(*n.a, out);
    if (n.b) collect_vars(*n.b, out);
}

bool equal_nodes(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == Kind::Number && a.number != b.number) return false;
    if ((a.kind == Kind::Var || a.kind == Kind::Fn) && a.name != b.name)
        return false;
    if (a.kind == Kind::Pow && a.exponent != b.exponent) return false;
    if (bool(a.a) != bool(b.a) || bool(a.b) != bool(b.b)) return false;
    if (a.a && !equal_nodes(*a.a, *b.a)) return false;
    if (a.b && !equal_nodes(*a.b, *b.b)) return false;
    return true;
}

}  // namespace

Expr Expr::parse(const std::string& text) {
    Parser p(text);
    NodePtr root = p.expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("unexpected trailing input", p.pos);
    return Expr(root);
}

Cplx Expr::eval(double t, Cplx x, Cplx z1, Cplx z2) const {
    if (!root_) throw Error("empty expression");
    return eval_node(*root_, t, x, z1, z2);
}

std::string Expr::str() const {
    if (!root_) return "";
    std::ostringstream os;
    print_node(*root_, os, 0);
    return os.str();
}

std::set<std::string> Expr::free_vars() const {
    std::set<std::string> out;
    if (root_) collect_vars(*root_, out);
    return out;
}

bool operator==(const Expr& a, const Expr& b) {
    if (!a.root_ || !b.root_) return bool(a.root_) == bool(b.root_);
    return equal_nodes(*a.root_, *b.root_);
}

}  // namespace bbpde
