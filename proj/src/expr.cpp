#include "mtlab/expr.hpp"

#include <cctype>
#include <cmath>

#include "mtlab/errors.hpp"

namespace mtlab {

namespace {
const double kPi = 3.14159265358979323846;
}

struct Expression::Node {
    enum class Kind { Number, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Log };
    Kind kind;
    double number = 0.0;
    int var = 0;  // 0..4 for x y X Y Z
    std::unique_ptr<Node> a, b;

    double eval(const double* vars) const {
        switch (kind) {
            case Kind::Number: return number;
            case Kind::Var: return vars[var];
            case Kind::Add: return a->eval(vars) + b->eval(vars);
            case Kind::Sub: return a->eval(vars) - b->eval(vars);
            case Kind::Mul: return a->eval(vars) * b->eval(vars);
            case Kind::Div: return a->eval(vars) / b->eval(vars);
            case Kind::Pow: return std::pow(a->eval(vars), b->eval(vars));
            case Kind::Neg: return -a->eval(vars);
            case Kind::Sin: return std::sin(a->eval(vars));
            case Kind::Cos: return std::cos(a->eval(vars));
            case Kind::Exp: return std::exp(a->eval(vars));
            case Kind::Log: return std::log(a->eval(vars));
        }
        return 0.0;
    }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::unique_ptr<Node>;

struct Parser {
    const std::string& s;
    std::size_t pos = 0;

    explicit Parser(const std::string& text) : s(text) {}

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    bool eat(char c) {
        if (peek() == c) {
            ++pos;
            return true;
        }
        return false;
    }

    NodePtr make(Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
        auto n = std::make_unique<Node>();
        n->kind = k;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        while (true) {
            if (eat('+'))
                lhs = make(Node::Kind::Add, std::move(lhs), parse_term());
            else if (eat('-'))
                lhs = make(Node::Kind::Sub, std::move(lhs), parse_term());
            else
                return lhs;
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_factor();
        while (true) {
            if (eat('*'))
                lhs = make(Node::Kind::Mul, std::move(lhs), parse_factor());
            else if (eat('/'))
                lhs = make(Node::Kind::Div, std::move(lhs), parse_factor());
            else
                return lhs;
        }
    }

    // '^' binds tighter than unary minus (-x^2 = -(x^2)) and right-associates
    NodePtr parse_factor() { return parse_unary(); }

    NodePtr parse_unary() {
        if (eat('-')) return make(Node::Kind::Neg, parse_unary());
        if (eat('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (eat('^')) return make(Node::Kind::Pow, std::move(base), parse_unary());
        return base;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos >= s.size()) throw ParseError("unexpected end of expression", pos);
        const char c = s[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        if (c == '(') {
            ++pos;
            NodePtr inner = parse_expr();
            if (!eat(')')) throw ParseError("expected ')'", pos);
            return inner;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos);
    }

    NodePtr parse_number() {
        const std::size_t start = pos;
        std::size_t len = 0;
        double v = 0.0;
        try {
            v = std::stod(s.substr(start), &len);
        } catch (const std::exception&) {
            throw ParseError("malformed number", start);
        }
        pos = start + len;
        auto n = std::make_unique<Node>();
        n->kind = Node::Kind::Number;
        n->number = v;
        return n;
    }

    NodePtr parse_ident() {
        const std::size_t start = pos;
        while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) ++pos;
        const std::string name = s.substr(start, pos - start);
        if (name == "pi") {
            auto n = std::make_unique<Node>();
            n->kind = Node::Kind::Number;
            n->number = kPi;
            return n;
        }
        static const char* vars[5] = {"x", "y", "X", "Y", "Z"};
        for (int v = 0; v < 5; ++v) {
            if (name == vars[v]) {
                auto n = std::make_unique<Node>();
                n->kind = Node::Kind::Var;
                n->var = v;
                return n;
            }
        }
        Node::Kind fk;
        if (name == "sin")
            fk = Node::Kind::Sin;
        else if (name == "cos")
            fk = Node::Kind::Cos;
        else if (name == "exp")
            fk = Node::Kind::Exp;
        else if (name == "log")
            fk = Node::Kind::Log;
        else
            throw ParseError("unknown identifier '" + name + "'", start);
        if (!eat('(')) throw ParseError("expected '(' after function name", pos);
        NodePtr arg = parse_expr();
        if (!eat(')')) throw ParseError("expected ')'", pos);
        return make(fk, std::move(arg));
    }
};

}  // namespace

Expression::Expression() = default;
Expression::~Expression() = default;
Expression::Expression(Expression&&) noexcept = default;
Expression& Expression::operator=(Expression&&) noexcept = default;

Expression Expression::parse(const std::string& text) {
    Parser p(text);
    Expression e;
    e.root_ = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) throw ParseError("trailing characters", p.pos);
    e.text_ = text;
    return e;
}

double Expression::eval_torus(double x, double y) const {
    const double vars[5] = {x, y, 0.0, 0.0, 0.0};
    return root_->eval(vars);
}

double Expression::eval_sphere(double X, double Y, double Z) const {
    const double vars[5] = {0.0, 0.0, X, Y, Z};
    return root_->eval(vars);
}

ScalarField Expression::evaluate(const SurfaceMesh& mesh) const {
    ScalarField f;
    f.values.resize(std::size_t(mesh.node_count()));
    const bool torus = mesh.is_torus();
    for (int i = 0; i < mesh.node_count(); ++i) {
        const auto& p = mesh.nodes[std::size_t(i)];
        const double v = torus ? eval_torus(p[0], p[1]) : eval_sphere(p[0], p[1], p[2]);
        if (!std::isfinite(v))
            throw EvalDomainError("expression '" + text_ + "' is non-finite at node " +
                                  std::to_string(i));
        f.values[std::size_t(i)] = v;
    }
    f.mesh_id = mesh.id;
    return f;
}

}  // namespace mtlab
