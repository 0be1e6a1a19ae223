#include "rbsde/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>

namespace rbsde::dsl {

namespace {

Expr make_literal(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::literal;
    n->literal = v;
    return n;
}

Expr make_variable(char name) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::variable;
    n->variable = name;
    return n;
}

Expr make_negate(Expr a) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::negate;
    n->a = std::move(a);
    return n;
}

Expr make_binary(BinaryOp op, Expr a, Expr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::binary;
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

Expr make_call(Func f, Expr a, Expr b = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::call;
    n->func = f;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

const std::map<std::string, Func, std::less<>>& function_table() {
    static const std::map<std::string, Func, std::less<>> table{
        {"abs", Func::abs}, {"exp", Func::exp}, {"log", Func::log},
        {"sqrt", Func::sqrt}, {"pos", Func::pos}, {"sin", Func::sin},
        {"cos", Func::cos}, {"min", Func::min}, {"max", Func::max},
    };
    return table;
}

bool is_variable_name(std::string_view s) {
    return s.size() == 1 && (s[0] == 't' || s[0] == 'y' || s[0] == 'z' || s[0] == 'x');
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Expr run() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != src_.size())
            throw SyntaxError(pos_, "expected end of input or operator");
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size()) {
            const unsigned char c = static_cast<unsigned char>(src_[pos_]);
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
                ++pos_;
            } else if (c >= 0x80) {
                throw SyntaxError(pos_, "non-ASCII byte");
            } else {
                break;
            }
        }
    }

    int peek() {
        skip_ws();
        return pos_ < src_.size() ? static_cast<unsigned char>(src_[pos_]) : -1;
    }

    bool consume(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c, const char* what) {
        if (!consume(c)) throw SyntaxError(pos_, std::string("expected ") + what);
    }

    Expr parse_expr() {
        Expr e = parse_term();
        for (;;) {
            if (consume('+')) {
                e = make_binary(BinaryOp::add, e, parse_term());
            } else if (consume('-')) {
                e = make_binary(BinaryOp::sub, e, parse_term());
            } else {
                return e;
            }
        }
    }

    Expr parse_term() {
        Expr e = parse_unary();
        for (;;) {
            if (consume('*')) {
                e = make_binary(BinaryOp::mul, e, parse_unary());
            } else if (consume('/')) {
                e = make_binary(BinaryOp::div, e, parse_unary());
            } else {
                return e;
            }
        }
    }

    Expr parse_unary() {
        if (consume('-')) return make_negate(parse_unary());
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (consume('^')) return make_binary(BinaryOp::pow, base, parse_unary());
        return base;
    }

    Expr parse_primary() {
        const int c = peek();
        if (c < 0) throw SyntaxError(pos_, "expected expression");
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            expect(')', "')'");
            return e;
        }
        if (std::isdigit(c)) return parse_number();
        if (std::isalpha(c) || c == '_') return parse_identifier();
        throw SyntaxError(pos_, "expected number, variable, function or '('");
    }

    Expr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_])))
                throw SyntaxError(pos_, "expected digit after decimal point");
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            } else {
                pos_ = mark; // 'e' belongs to something else; not a valid exponent
            }
        }
        const std::string text(src_.substr(start, pos_ - start));
        return make_literal(std::stod(text));
    }

    Expr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);
        if (peek() == '(') {
            auto it = function_table().find(name);
            if (it == function_table().end())
                throw UnknownIdentifier(start, std::string(name));
            ++pos_; // '('
            Expr a = parse_expr();
            const bool binary = (it->second == Func::min || it->second == Func::max);
            Expr b;
            if (binary) {
                expect(',', "',' (min/max take two arguments)");
                b = parse_expr();
            }
            expect(')', "')'");
            return make_call(it->second, std::move(a), std::move(b));
        }
        if (!is_variable_name(name)) throw UnknownIdentifier(start, std::string(name));
        return make_variable(name[0]);
    }
};

double lookup(const Env& env, char name) {
    const std::optional<double>* slot = nullptr;
    switch (name) {
        case 't': slot = &env.t; break;
        case 'y': slot = &env.y; break;
        case 'z': slot = &env.z; break;
        case 'x': slot = &env.x; break;
        default: break;
    }
    if (!slot || !slot->has_value()) throw UnboundVariable(std::string(1, name));
    return **slot;
}

void collect_vars(const Expr& e, std::set<char>& out) {
    if (!e) return;
    if (e->kind == NodeKind::variable) out.insert(e->variable);
    collect_vars(e->a, out);
    collect_vars(e->b, out);
}

// Precedence levels used by the printer: add/sub 1, mul/div 2, unary 3, pow 4.
int precedence(const Expr& e) {
    switch (e->kind) {
        case NodeKind::binary:
            switch (e->op) {
                case BinaryOp::add:
                case BinaryOp::sub: return 1;
                case BinaryOp::mul:
                case BinaryOp::div: return 2;
                case BinaryOp::pow: return 4;
            }
            return 0;
        case NodeKind::negate: return 3;
        default: return 5; // atoms and calls never need parentheses
    }
}

std::string format_literal(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const char* func_name(Func f) {
    switch (f) {
        case Func::abs: return "abs";
        case Func::exp: return "exp";
        case Func::log: return "log";
        case Func::sqrt: return "sqrt";
        case Func::pos: return "pos";
        case Func::sin: return "sin";
        case Func::cos: return "cos";
        case Func::min: return "min";
        case Func::max: return "max";
    }
    return "?";
}

void print(const Expr& e, std::string& out) {
    auto child = [&](const Expr& c, bool needs_parens) {
        if (needs_parens) {
            out += '(';
            print(c, out);
            out += ')';
        } else {
            print(c, out);
        }
    };
    switch (e->kind) {
        case NodeKind::literal:
            out += format_literal(e->literal);
            return;
        case NodeKind::variable:
            out += e->variable;
            return;
        case NodeKind::negate:
            out += '-';
            // unary minus binds looser than ^: -(a^b) prints as -a^b
            child(e->a, precedence(e->a) < 3);
            return;
        case NodeKind::call:
            out += func_name(e->func);
            out += '(';
            print(e->a, out);
            if (e->b) {
                out += ", ";
                print(e->b, out);
            }
            out += ')';
            return;
        case NodeKind::binary: {
            const int prec = precedence(e);
            const char* sym = e->op == BinaryOp::add ? " + "
                            : e->op == BinaryOp::sub ? " - "
                            : e->op == BinaryOp::mul ? "*"
                            : e->op == BinaryOp::div ? "/"
                                                     : "^";
            if (e->op == BinaryOp::pow) {
                // right associative; also 2^-3 needs no parens (unary allowed on rhs)
                child(e->a, precedence(e->a) <= prec);
                out += sym;
                child(e->b, precedence(e->b) < 3);
            } else {
                child(e->a, precedence(e->a) < prec);
                out += sym;
                child(e->b, precedence(e->b) <= prec);
            }
            return;
        }
    }
}

} // namespace

Expr parse(std::string_view source) { return Parser(source).run(); }

double eval(const Expr& e, const Env& env) {
    switch (e->kind) {
        case NodeKind::literal: return e->literal;
        case NodeKind::variable: return lookup(env, e->variable);
        case NodeKind::negate: return -eval(e->a, env);
        case NodeKind::binary: {
            const double a = eval(e->a, env);
            const double b = eval(e->b, env);
            switch (e->op) {
                case BinaryOp::add: return a + b;
                case BinaryOp::sub: return a - b;
                case BinaryOp::mul: return a * b;
                case BinaryOp::div:
                    if (b == 0.0) throw DomainError("division by zero");
                    return a / b;
                case BinaryOp::pow: {
                    const double r = std::pow(a, b);
                    if (std::isnan(r)) throw DomainError("pow out of domain");
                    return r;
                }
            }
            throw DomainError("unreachable binary op");
        }
        case NodeKind::call: {
            const double a = eval(e->a, env);
            switch (e->func) {
                case Func::abs: return std::fabs(a);
                case Func::exp: return std::exp(a);
                case Func::log:
                    if (a <= 0.0) throw DomainError("log of non-positive argument");
                    return std::log(a);
                case Func::sqrt:
                    if (a < 0.0) throw DomainError("sqrt of negative argument");
                    return std::sqrt(a);
                case Func::pos: return a > 0.0 ? a : 0.0;
                case Func::sin: return std::sin(a);
                case Func::cos: return std::cos(a);
                case Func::min: return std::fmin(a, eval(e->b, env));
                case Func::max: return std::fmax(a, eval(e->b, env));
            }
            throw DomainError("unreachable call");
        }
    }
    throw DomainError("unreachable node kind");
}

std::set<char> free_vars(const Expr& e) {
    std::set<char> out;
    collect_vars(e, out);
    return out;
}

std::string pretty_print(const Expr& e) {
    std::string out;
    print(e, out);
    return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case NodeKind::literal: return a->literal == b->literal;
        case NodeKind::variable: return a->variable == b->variable;
        case NodeKind::negate: return structurally_equal(a->a, b->a);
        case NodeKind::binary:
            return a->op == b->op && structurally_equal(a->a, b->a) &&
                   structurally_equal(a->b, b->b);
        case NodeKind::call:
            return a->func == b->func && structurally_equal(a->a, b->a) &&
                   structurally_equal(a->b, b->b);
    }
    return false;
}

} // namespace rbsde::dsl
