/// @file expr.hpp
/// @brief Minimal arithmetic expression parser for config-supplied functions
///        of (t, x): +, -, *, /, ^, parentheses, the usual transcendental
///        functions, and the constants pi and e.

#pragma once

#include <cmath>
#include <cctype>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kwc {

class ExprError : public std::runtime_error {
public:
    explicit ExprError(const std::string& msg) : std::runtime_error("expression: " + msg) {}
};

namespace expr_detail {

struct Node {
    enum class Kind { constant, var_t, var_x, unary, binary } kind;
    double value = 0.0;                  // constant
    char op = 0;                         // binary: + - * / ^
    double (*fn)(double) = nullptr;      // unary
    std::unique_ptr<Node> lhs, rhs;

    double eval(double t, double x) const {
        switch (kind) {
        case Kind::constant: return value;
        case Kind::var_t: return t;
        case Kind::var_x: return x;
        case Kind::unary: return fn(lhs->eval(t, x));
        case Kind::binary: {
            const double a = lhs->eval(t, x), b = rhs->eval(t, x);
            switch (op) {
            case '+': return a + b;
            case '-': return a - b;
            case '*': return a * b;
            case '/': return a / b;
            default: return std::pow(a, b);
            }
        }
        }
        return 0.0;
    }
};

using NodePtr = std::unique_ptr<Node>;

inline NodePtr make_const(double v) {
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::constant;
    n->value = v;
    return n;
}

inline NodePtr make_binary(char op, NodePtr a, NodePtr b) {
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::binary;
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

class Parser {
public:
    explicit Parser(std::string s) : src_(std::move(s)) {}

    NodePtr parse() {
        NodePtr e = sum();
        skip_ws();
        if (pos_ != src_.size())
            throw ExprError("unexpected trailing input at '" + src_.substr(pos_) + "'");
        return e;
    }

private:
    NodePtr sum() {
        NodePtr e = product();
        for (;;) {
            skip_ws();
            if (consume('+')) e = make_binary('+', std::move(e), product());
            else if (consume('-')) e = make_binary('-', std::move(e), product());
            else return e;
        }
    }

    NodePtr product() {
        NodePtr e = unary();
        for (;;) {
            skip_ws();
            if (consume('*')) e = make_binary('*', std::move(e), unary());
            else if (consume('/')) e = make_binary('/', std::move(e), unary());
            else return e;
        }
    }

    NodePtr unary() {
        skip_ws();
        if (consume('-')) {
            auto n = std::make_unique<Node>();
            n->kind = Node::Kind::unary;
            n->fn = [](double v) { return -v; };
            n->lhs = unary();
            return n;
        }
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        skip_ws();
        if (consume('^')) return make_binary('^', std::move(base), unary());
        return base;
    }

    NodePtr atom() {
        skip_ws();
        if (pos_ >= src_.size()) throw ExprError("unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = sum();
            skip_ws();
            if (!consume(')')) throw ExprError("missing ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        throw ExprError(std::string("unexpected character '") + c + "'");
    }

    NodePtr number() {
        size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(src_.substr(pos_), &used);
        } catch (const std::exception&) {
            throw ExprError("bad number at '" + src_.substr(pos_) + "'");
        }
        pos_ += used;
        return make_const(v);
    }

    NodePtr identifier() {
        const size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string name = src_.substr(start, pos_ - start);
        if (name == "t") {
            auto n = std::make_unique<Node>();
            n->kind = Node::Kind::var_t;
            return n;
        }
        if (name == "x") {
            auto n = std::make_unique<Node>();
            n->kind = Node::Kind::var_x;
            return n;
        }
        if (name == "pi") return make_const(std::numbers::pi);
        if (name == "e") return make_const(std::numbers::e);

        static const std::pair<const char*, double (*)(double)> fns[] = {
            {"sin", [](double v) { return std::sin(v); }},
            {"cos", [](double v) { return std::cos(v); }},
            {"tan", [](double v) { return std::tan(v); }},
            {"sinh", [](double v) { return std::sinh(v); }},
            {"cosh", [](double v) { return std::cosh(v); }},
            {"tanh", [](double v) { return std::tanh(v); }},
            {"exp", [](double v) { return std::exp(v); }},
            {"log", [](double v) { return std::log(v); }},
            {"sqrt", [](double v) { return std::sqrt(v); }},
            {"abs", [](double v) { return std::abs(v); }},
        };
        for (const auto& [fname, fp] : fns) {
            if (name == fname) {
                skip_ws();
                if (!consume('(')) throw ExprError(name + " expects '('");
                NodePtr arg = sum();
                skip_ws();
                if (!consume(')')) throw ExprError("missing ')' after " + name);
                auto n = std::make_unique<Node>();
                n->kind = Node::Kind::unary;
                n->fn = fp;
                n->lhs = std::move(arg);
                return n;
            }
        }
        throw ExprError("unknown identifier '" + name + "'");
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string src_;
    size_t pos_ = 0;
};

} // namespace expr_detail

/// Parsed expression in the variables t and x. Copyable, thread-safe to
/// evaluate.
class Expression {
public:
    explicit Expression(const std::string& text)
        : root_(std::shared_ptr<const expr_detail::Node>(
              expr_detail::Parser(text).parse().release())),
          text_(text) {}

    double operator()(double t, double x) const { return root_->eval(t, x); }
    const std::string& text() const { return text_; }

private:
    std::shared_ptr<const expr_detail::Node> root_;
    std::string text_;
};

} // namespace kwc
