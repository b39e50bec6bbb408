#pragma once

#include "algmech/core.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string_view>

namespace algmech {

class ExpressionError : public InputError {
public:
    ExpressionError(const std::string& msg, int line, int column)
        : InputError(std::to_string(line) + ":" + std::to_string(column) + ": " + msg), line(line), column(column) {}
    int line;
    int column;
};

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    enum class Kind { Number, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };
    Kind kind = Kind::Number;
    double value = 0.0;
    std::string name;  ///< variable or function name
    int slot = -1;     ///< variable index after binding
    ExprPtr a, b;
};

namespace expr {

inline const std::vector<std::string>& functions() {
    static const std::vector<std::string> f = {"sin", "cos", "sinh", "cosh", "tanh", "exp", "log"};
    return f;
}

inline ExprPtr number(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Number;
    n->value = v;
    return n;
}

inline ExprPtr variable(std::string name, int slot = -1) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Variable;
    n->name = std::move(name);
    n->slot = slot;
    return n;
}

inline ExprPtr call(std::string f, ExprPtr arg) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Call;
    n->name = std::move(f);
    n->a = std::move(arg);
    return n;
}

inline bool is_number(const ExprPtr& e, double v) { return e->kind == ExprNode::Kind::Number && e->value == v; }

/// Node constructor with constant folding of the trivial cases.
inline ExprPtr make(ExprNode::Kind k, ExprPtr a, ExprPtr b = nullptr) {
    using K = ExprNode::Kind;
    if (k == K::Negate) {
        if (a->kind == K::Number) return number(-a->value);
    } else if (a->kind == K::Number && b->kind == K::Number && k != K::Pow) {
        switch (k) {
            case K::Add: return number(a->value + b->value);
            case K::Sub: return number(a->value - b->value);
            case K::Mul: return number(a->value * b->value);
            default: break;
        }
    }
    if (k == K::Add) {
        if (is_number(a, 0.0)) return b;
        if (is_number(b, 0.0)) return a;
    }
    if (k == K::Sub) {
        if (is_number(b, 0.0)) return a;
        if (is_number(a, 0.0)) return make(K::Negate, b);
    }
    if (k == K::Mul) {
        if (is_number(a, 0.0) || is_number(b, 0.0)) return number(0.0);
        if (is_number(a, 1.0)) return b;
        if (is_number(b, 1.0)) return a;
    }
    if (k == K::Div && is_number(b, 1.0)) return a;
    if (k == K::Pow && is_number(b, 1.0)) return a;
    if (k == K::Pow && is_number(b, 0.0)) return number(1.0);
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    ExprPtr parse() {
        ExprPtr e = parse_sum();
        skip_space();
        if (pos_ < s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    using K = ExprNode::Kind;

    [[noreturn]] void fail(const std::string& msg) const {
        int line = 1, col = 1;
        for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) {
            if (s_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ExpressionError(msg, line, col);
    }

    void skip_space() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    ExprPtr parse_sum() {
        ExprPtr e = parse_product();
        while (true) {
            if (accept('+'))
                e = make(K::Add, e, parse_product());
            else if (accept('-'))
                e = make(K::Sub, e, parse_product());
            else
                return e;
        }
    }

    ExprPtr parse_product() {
        ExprPtr e = parse_unary();
        while (true) {
            if (accept('*'))
                e = make(K::Mul, e, parse_unary());
            else if (accept('/'))
                e = make(K::Div, e, parse_unary());
            else
                return e;
        }
    }

    ExprPtr parse_unary() {
        if (accept('-')) return make(K::Negate, parse_unary());
        return parse_power();
    }

    // Right associative; the exponent may carry a unary minus.
    ExprPtr parse_power() {
        ExprPtr base = parse_primary();
        if (accept('^')) return make(K::Pow, base, parse_unary());
        return base;
    }

    ExprPtr parse_primary() {
        skip_space();
        if (pos_ >= s_.size()) fail("expected an expression, found end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            ExprPtr e = parse_sum();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            std::string id(s_.substr(start, pos_ - start));
            const bool is_fn = std::find(functions().begin(), functions().end(), id) != functions().end();
            skip_space();
            if (is_fn) {
                if (!accept('(')) fail("expected '(' after function " + id);
                ExprPtr arg = parse_sum();
                if (!accept(')')) fail("expected ')'");
                return call(id, arg);
            }
            return variable(id);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    ExprPtr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
            if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
                pos_ = p;
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            }
        }
        const std::string tok(s_.substr(start, pos_ - start));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            pos_ = start;
            fail("malformed number '" + tok + "'");
        }
        if (used != tok.size()) {
            pos_ = start;
            fail("malformed number '" + tok + "'");
        }
        return number(v);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

inline double apply_function(const std::string& f, double x) {
    if (f == "sin") return std::sin(x);
    if (f == "cos") return std::cos(x);
    if (f == "sinh") return std::sinh(x);
    if (f == "cosh") return std::cosh(x);
    if (f == "tanh") return std::tanh(x);
    if (f == "exp") return std::exp(x);
    if (f == "log") return std::log(x);
    throw StructuralError("unknown function " + f);
}

inline double eval(const ExprNode& n, std::span<const double> vars) {
    using K = ExprNode::Kind;
    switch (n.kind) {
        case K::Number: return n.value;
        case K::Variable:
            if (n.slot < 0) throw StructuralError("expression variable '" + n.name + "' is not bound");
            return vars[static_cast<std::size_t>(n.slot)];
        case K::Negate: return -eval(*n.a, vars);
        case K::Add: return eval(*n.a, vars) + eval(*n.b, vars);
        case K::Sub: return eval(*n.a, vars) - eval(*n.b, vars);
        case K::Mul: return eval(*n.a, vars) * eval(*n.b, vars);
        case K::Div: return eval(*n.a, vars) / eval(*n.b, vars);
        case K::Pow: return std::pow(eval(*n.a, vars), eval(*n.b, vars));
        case K::Call: return apply_function(n.name, eval(*n.a, vars));
    }
    return 0.0;
}

inline void collect(const ExprNode& n, std::set<std::string>& out) {
    if (n.kind == ExprNode::Kind::Variable) out.insert(n.name);
    if (n.a) collect(*n.a, out);
    if (n.b) collect(*n.b, out);
}

inline bool depends_on(const ExprNode& n, const std::string& v) {
    if (n.kind == ExprNode::Kind::Variable) return n.name == v;
    return (n.a && depends_on(*n.a, v)) || (n.b && depends_on(*n.b, v));
}

inline ExprPtr diff(const ExprPtr& e, const std::string& v) {
    using K = ExprNode::Kind;
    const ExprNode& n = *e;
    switch (n.kind) {
        case K::Number: return number(0.0);
        case K::Variable: return number(n.name == v ? 1.0 : 0.0);
        case K::Negate: return make(K::Negate, diff(n.a, v));
        case K::Add: return make(K::Add, diff(n.a, v), diff(n.b, v));
        case K::Sub: return make(K::Sub, diff(n.a, v), diff(n.b, v));
        case K::Mul: return make(K::Add, make(K::Mul, diff(n.a, v), n.b), make(K::Mul, n.a, diff(n.b, v)));
        case K::Div:
            return make(K::Div, make(K::Sub, make(K::Mul, diff(n.a, v), n.b), make(K::Mul, n.a, diff(n.b, v))),
                        make(K::Pow, n.b, number(2.0)));
        case K::Pow: {
            if (!depends_on(*n.b, v)) {
                const ExprPtr lowered = n.b->kind == K::Number ? number(n.b->value - 1.0) : make(K::Sub, n.b, number(1.0));
                return make(K::Mul, make(K::Mul, n.b, make(K::Pow, n.a, lowered)), diff(n.a, v));
            }
            // d(a^b) = a^b (b' log a + b a' / a)
            return make(K::Mul, e,
                        make(K::Add, make(K::Mul, diff(n.b, v), call("log", n.a)),
                             make(K::Div, make(K::Mul, n.b, diff(n.a, v)), n.a)));
        }
        case K::Call: {
            const ExprPtr da = diff(n.a, v);
            if (is_number(da, 0.0)) return number(0.0);
            ExprPtr outer;
            if (n.name == "sin") outer = call("cos", n.a);
            else if (n.name == "cos") outer = make(K::Negate, call("sin", n.a));
            else if (n.name == "sinh") outer = call("cosh", n.a);
            else if (n.name == "cosh") outer = call("sinh", n.a);
            else if (n.name == "tanh") outer = make(K::Div, number(1.0), make(K::Pow, call("cosh", n.a), number(2.0)));
            else if (n.name == "exp") outer = e;
            else if (n.name == "log") outer = make(K::Div, number(1.0), n.a);
            else throw StructuralError("no derivative rule for " + n.name);
            return make(K::Mul, outer, da);
        }
    }
    return number(0.0);
}

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    return v < 0 || s.front() == '-' ? "(" + s + ")" : s;
}

inline void print(const ExprNode& n, std::string& out) {
    using K = ExprNode::Kind;
    auto binary = [&](const char* op) {
        out += '(';
        print(*n.a, out);
        out += op;
        print(*n.b, out);
        out += ')';
    };
    switch (n.kind) {
        case K::Number: out += format_number(n.value); break;
        case K::Variable: out += n.name; break;
        case K::Negate:
            out += "(-";
            print(*n.a, out);
            out += ')';
            break;
        case K::Add: binary(" + "); break;
        case K::Sub: binary(" - "); break;
        case K::Mul: binary(" * "); break;
        case K::Div: binary(" / "); break;
        case K::Pow: binary(" ^ "); break;
        case K::Call:
            out += n.name + "(";
            print(*n.a, out);
            out += ')';
            break;
    }
}

inline ExprPtr bind(const ExprPtr& e, const std::vector<std::string>& names) {
    if (e->kind == ExprNode::Kind::Variable) {
        const auto it = std::find(names.begin(), names.end(), e->name);
        if (it == names.end()) throw StructuralError("bind: unknown variable " + e->name);
        return variable(e->name, static_cast<int>(it - names.begin()));
    }
    if (!e->a) return e;
    auto n = std::make_shared<ExprNode>(*e);
    n->a = bind(e->a, names);
    if (e->b) n->b = bind(e->b, names);
    return n;
}

}  // namespace expr

/// Arithmetic expression over named variables.
class Expression {
public:
    Expression() = default;
    explicit Expression(ExprPtr root, std::vector<std::string> names = {}) : root_(std::move(root)), names_(std::move(names)) {}

    /// Variables referenced by the expression.
    std::set<std::string> variables() const {
        std::set<std::string> v;
        expr::collect(*root_, v);
        return v;
    }

    /// Resolves variables to positions in `names`; evaluation then takes values in that order.
    Expression bind(const std::vector<std::string>& names) const { return Expression(expr::bind(root_, names), names); }

    const std::vector<std::string>& bound_names() const { return names_; }

    double evaluate(std::span<const double> values) const {
        if (values.size() != names_.size()) throw StructuralError("expression: wrong number of values");
        return expr::eval(*root_, values);
    }

    double evaluate(const std::map<std::string, double>& values) const {
        std::vector<std::string> names;
        std::vector<double> vals;
        for (const auto& [k, v] : values) {
            names.push_back(k);
            vals.push_back(v);
        }
        for (const auto& v : variables())
            if (!values.count(v)) throw InputError("expression: no value for variable '" + v + "'");
        return expr::eval(*expr::bind(root_, names), vals);
    }

    Expression derivative(const std::string& var) const {
        ExprPtr d = expr::diff(root_, var);
        return names_.empty() ? Expression(d) : Expression(expr::bind(d, names_), names_);
    }

    /// Fully parenthesized; numbers in %.17g.
    std::string print() const {
        std::string s;
        expr::print(*root_, s);
        return s;
    }

    const ExprPtr& root() const { return root_; }

private:
    ExprPtr root_;
    std::vector<std::string> names_;
};

/// Parses `text`; when `bound` is non-empty every identifier must be one of its entries.
inline Expression parse_expression(std::string_view text, const std::vector<std::string>& bound = {}) {
    Expression e(expr::Parser(text).parse());
    if (!bound.empty()) {
        for (const auto& v : e.variables()) {
            if (std::find(bound.begin(), bound.end(), v) != bound.end()) continue;
            std::string list;
            for (const auto& b : bound) list += (list.empty() ? "" : ", ") + b;
            // Report the first occurrence of the identifier.
            std::size_t pos = 0;
            while ((pos = text.find(v, pos)) != std::string_view::npos) {
                const bool left = pos == 0 || !(std::isalnum(static_cast<unsigned char>(text[pos - 1])) || text[pos - 1] == '_');
                const std::size_t end = pos + v.size();
                const bool right = end >= text.size() || !(std::isalnum(static_cast<unsigned char>(text[end])) || text[end] == '_');
                if (left && right) break;
                ++pos;
            }
            int line = 1, col = 1;
            for (std::size_t i = 0; i < pos && i < text.size(); ++i) {
                if (text[i] == '\n') {
                    line++;
                    col = 1;
                } else {
                    ++col;
                }
            }
            throw ExpressionError("unknown identifier '" + v + "'; bound variables: " + list, line, col);
        }
        return e.bind(bound);
    }
    return e;
}

}  // namespace algmech
