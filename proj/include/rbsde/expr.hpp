#pragma once

#include "rbsde/common.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace rbsde::dsl {

// Expression language for drivers, barriers and payoffs.
//
//   expr    := term (('+'|'-') term)*
//   term    := unary (('*'|'/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?            (right associative)
//   primary := number | var | func '(' expr (',' expr)? ')' | '(' expr ')'
//
// Variables: t, y, z, x. Functions: abs, exp, log, sqrt, pos, sin, cos
// (unary) and min, max (binary). ASCII only, whitespace insensitive.

struct SyntaxError : Error {
    SyntaxError(std::size_t offset, const std::string& what)
        : Error("syntax error at byte " + std::to_string(offset) + ": " + what),
          offset(offset) {}
    std::size_t offset;
};

struct UnknownIdentifier : Error {
    UnknownIdentifier(std::size_t offset, const std::string& name)
        : Error("unknown identifier '" + name + "' at byte " + std::to_string(offset)),
          offset(offset), name(name) {}
    std::size_t offset;
    std::string name;
};

struct UnboundVariable : Error {
    explicit UnboundVariable(const std::string& name)
        : Error("unbound variable '" + name + "'"), name(name) {}
    std::string name;
};

struct DomainError : Error {
    using Error::Error;
};

enum class NodeKind { literal, variable, negate, binary, call };
enum class BinaryOp { add, sub, mul, div, pow };
enum class Func { abs, exp, log, sqrt, pos, sin, cos, min, max };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    NodeKind kind;
    double literal = 0.0;     // kind == literal
    char variable = 0;        // kind == variable: one of t,y,z,x
    BinaryOp op = BinaryOp::add;
    Func func = Func::abs;
    Expr a, b;                // operands (b unused for unary forms)
};

/// Variable bindings for evaluation; unset slots are unbound.
struct Env {
    std::optional<double> t, y, z, x;

    static Env tyz(double t, double y, double z) {
        Env e;
        e.t = t; e.y = y; e.z = z;
        return e;
    }
    static Env tx(double t, double x) {
        Env e;
        e.t = t; e.x = x;
        return e;
    }
    static Env just_x(double x) {
        Env e;
        e.x = x;
        return e;
    }
};

Expr parse(std::string_view source);
double eval(const Expr& e, const Env& env);
std::set<char> free_vars(const Expr& e);

/// Prints with minimal parentheses; parse(pretty_print(e)) is structurally
/// identical to e.
std::string pretty_print(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

} // namespace rbsde::dsl
