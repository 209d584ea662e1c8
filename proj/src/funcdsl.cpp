#include "masterop/funcdsl.hpp"

#include "masterop/errors.hpp"
#include "masterop/families.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace masterop {

namespace {

enum class Tok { Number, Ident, Op, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    double number = 0.0;
    int column = 1;
};

std::vector<Token> tokenize(const std::string& s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        const int col = static_cast<int>(i) + 1;
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t j = i;
            while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
            if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
                if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
                    j = k;
                    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
                }
            }
            Token t;
            t.kind = Tok::Number;
            t.text = s.substr(i, j - i);
            t.column = col;
            const auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
            if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size())
                throw ParseError("malformed number '" + t.text + "'", col);
            out.push_back(t);
            i = j;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            out.push_back({Tok::Ident, s.substr(i, j - i), 0.0, col});
            i = j;
            continue;
        }
        if (std::string("+-*/^(),").find(c) != std::string::npos) {
            out.push_back({Tok::Op, std::string(1, c), 0.0, col});
            ++i;
            continue;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", col);
    }
    out.push_back({Tok::End, "", 0.0, static_cast<int>(s.size()) + 1});
    return out;
}

const std::map<std::string, Expr::Op>& unary_functions() {
    static const std::map<std::string, Expr::Op> table = {
        {"exp", Expr::Op::Exp}, {"cos", Expr::Op::Cos}, {"sin", Expr::Op::Sin},   {"abs", Expr::Op::Abs},
        {"pos", Expr::Op::Pos}, {"sqrt", Expr::Op::Sqrt}, {"bump", Expr::Op::Bump}};
    return table;
}

const char* op_name(Expr::Op op) {
    switch (op) {
    case Expr::Op::Exp: return "exp";
    case Expr::Op::Cos: return "cos";
    case Expr::Op::Sin: return "sin";
    case Expr::Op::Abs: return "abs";
    case Expr::Op::Pos: return "pos";
    case Expr::Op::Sqrt: return "sqrt";
    case Expr::Op::Bump: return "bump";
    case Expr::Op::Add: return "+";
    case Expr::Op::Sub: return "-";
    case Expr::Op::Mul: return "*";
    case Expr::Op::Div: return "/";
    case Expr::Op::Pow: return "^";
    case Expr::Op::Neg: return "-";
    }
    return "?";
}

class Parser {
public:
    explicit Parser(const std::string& text) : toks_(tokenize(text)) {}

    ExprPtr run() {
        if (toks_.size() == 1) throw ParseError("empty expression", 1);
        auto e = expr();
        if (peek().kind != Tok::End) throw ParseError("unexpected '" + peek().text + "'", peek().column);
        return e;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    Token take() { return toks_[pos_++]; }
    bool is_op(const char* s) const { return peek().kind == Tok::Op && peek().text == s; }

    void expect(const char* s) {
        if (!is_op(s)) {
            const Token& t = peek();
            throw ParseError(std::string("expected '") + s + "'" + (t.kind == Tok::End ? " before end of input" : ""),
                             t.column);
        }
        ++pos_;
    }

    static ExprPtr binary(Expr::Op op, ExprPtr a, ExprPtr b, int col) {
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::Binary;
        e->op = op;
        e->children = {std::move(a), std::move(b)};
        e->column = col;
        return e;
    }

    ExprPtr expr() {
        auto lhs = term();
        while (is_op("+") || is_op("-")) {
            const Token t = take();
            lhs = binary(t.text == "+" ? Expr::Op::Add : Expr::Op::Sub, lhs, term(), lhs->column);
        }
        return lhs;
    }

    ExprPtr term() {
        auto lhs = unary();
        while (is_op("*") || is_op("/")) {
            const Token t = take();
            lhs = binary(t.text == "*" ? Expr::Op::Mul : Expr::Op::Div, lhs, unary(), lhs->column);
        }
        return lhs;
    }

    ExprPtr unary() {
        if (is_op("-")) {
            const Token t = take();
            auto e = std::make_shared<Expr>();
            e->kind = Expr::Kind::Unary;
            e->op = Expr::Op::Neg;
            e->children = {unary()};
            e->column = t.column;
            return e;
        }
        return power();
    }

    double signed_literal(const char* what) {
        bool neg = false;
        if (is_op("-")) {
            take();
            neg = true;
        }
        if (peek().kind != Tok::Number) throw ParseError(std::string(what) + " must be a numeric literal", peek().column);
        const double v = take().number;
        return neg ? -v : v;
    }

    ExprPtr power() {
        auto base = primary();
        if (is_op("^")) {
            const Token t = take();
            auto lit = std::make_shared<Expr>();
            lit->column = peek().column;
            lit->value = signed_literal("exponent");
            if (is_op("^")) throw ParseError("chained exponents are not supported; parenthesize", peek().column);
            return binary(Expr::Op::Pow, base, lit, base->column);
        }
        return base;
    }

    ExprPtr primary() {
        const Token t = peek();
        if (t.kind == Tok::Number) {
            take();
            auto e = std::make_shared<Expr>();
            e->value = t.number;
            e->column = t.column;
            return e;
        }
        if (is_op("(")) {
            take();
            auto e = expr();
            expect(")");
            return e;
        }
        if (t.kind == Tok::Ident) {
            take();
            if (t.text == "t" || t.text == "x1" || t.text == "x2" || t.text == "x3") {
                auto e = std::make_shared<Expr>();
                e->kind = Expr::Kind::Variable;
                e->variable = t.text == "t" ? 3 : t.text[1] - '1';
                e->column = t.column;
                return e;
            }
            const auto& fns = unary_functions();
            if (auto it = fns.find(t.text); it != fns.end()) {
                expect("(");
                auto arg = expr();
                expect(")");
                auto e = std::make_shared<Expr>();
                e->kind = Expr::Kind::Unary;
                e->op = it->second;
                e->children = {arg};
                e->column = t.column;
                return e;
            }
            if (t.text == "phi" || t.text == "psi" || t.text == "w") {
                expect("(");
                auto e = std::make_shared<Expr>();
                e->kind = Expr::Kind::Family;
                e->family = t.text;
                e->column = t.column;
                const std::size_t arity = t.text == "w" ? 2 : 3;
                for (std::size_t k = 0; k < arity; ++k) {
                    if (k) expect(",");
                    e->args.push_back(signed_literal("family argument"));
                }
                expect(")");
                const double j = e->args[0];
                if (!(j >= 1.0) || j != std::floor(j) || j > 1e9)
                    throw ParseError("family index must be a positive integer", t.column);
                return e;
            }
            throw ParseError("unknown identifier '" + t.text + "'", t.column);
        }
        if (t.kind == Tok::End) throw ParseError("unexpected end of input", t.column);
        throw ParseError("unexpected '" + t.text + "'", t.column);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

std::string literal_text(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

ExprPtr parse(const std::string& text) { return Parser(text).run(); }

std::string print(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::Literal: return literal_text(e.value);
    case Expr::Kind::Variable: return e.variable == 3 ? "t" : "x" + std::to_string(e.variable + 1);
    case Expr::Kind::Unary:
        if (e.op == Expr::Op::Neg) return "(-" + print(*e.children[0]) + ")";
        return std::string(op_name(e.op)) + "(" + print(*e.children[0]) + ")";
    case Expr::Kind::Binary:
        if (e.op == Expr::Op::Pow) return "(" + print(*e.children[0]) + "^" + literal_text(e.children[1]->value) + ")";
        return "(" + print(*e.children[0]) + " " + op_name(e.op) + " " + print(*e.children[1]) + ")";
    case Expr::Kind::Family: {
        std::string s = e.family + "(";
        for (std::size_t k = 0; k < e.args.size(); ++k) s += (k ? ", " : "") + literal_text(e.args[k]);
        return s + ")";
    }
    }
    return "";
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case Expr::Kind::Literal: return a.value == b.value;
    case Expr::Kind::Variable: return a.variable == b.variable;
    case Expr::Kind::Family: return a.family == b.family && a.args == b.args;
    default: break;
    }
    if (a.op != b.op || a.children.size() != b.children.size()) return false;
    for (std::size_t k = 0; k < a.children.size(); ++k)
        if (!structurally_equal(*a.children[k], *b.children[k])) return false;
    return true;
}

void validate(const Expr& e, int dim) {
    if (dim < 1 || dim > 3) throw DomainError("dimension must be 1, 2 or 3");
    if (e.kind == Expr::Kind::Variable && e.variable < 3 && e.variable >= dim)
        throw ParseError("variable x" + std::to_string(e.variable + 1) + " exceeds dimension " + std::to_string(dim),
                         e.column);
    for (const auto& c : e.children) validate(*c, dim);
}

namespace {

using Fn = FunctionHandle::Evaluator;

struct Uses {
    bool x = false;
    bool t = false;
    bool pos_in_t = false;
    std::vector<double> breaks;
    double feature_length = std::numeric_limits<double>::infinity();
    double feature_time = std::numeric_limits<double>::infinity();
};

/// a t + b when e is affine in t with literal coefficients.
std::optional<std::pair<double, double>> affine_in_t(const Expr& e) {
    using P = std::pair<double, double>;
    switch (e.kind) {
    case Expr::Kind::Literal: return P{0.0, e.value};
    case Expr::Kind::Variable:
        if (e.variable == 3) return P{1.0, 0.0};
        return std::nullopt;
    case Expr::Kind::Family: return std::nullopt;
    case Expr::Kind::Unary: {
        if (e.op != Expr::Op::Neg) return std::nullopt;
        auto c = affine_in_t(*e.children[0]);
        if (!c) return std::nullopt;
        return P{-c->first, -c->second};
    }
    case Expr::Kind::Binary: {
        auto a = affine_in_t(*e.children[0]);
        if (e.op == Expr::Op::Pow) {
            if (a && a->first == 0.0) return P{0.0, std::pow(a->second, e.children[1]->value)};
            return std::nullopt;
        }
        auto b = affine_in_t(*e.children[1]);
        if (!a || !b) return std::nullopt;
        switch (e.op) {
        case Expr::Op::Add: return P{a->first + b->first, a->second + b->second};
        case Expr::Op::Sub: return P{a->first - b->first, a->second - b->second};
        case Expr::Op::Mul:
            if (a->first == 0.0) return P{a->second * b->first, a->second * b->second};
            if (b->first == 0.0) return P{b->second * a->first, b->second * a->second};
            return std::nullopt;
        case Expr::Op::Div:
            if (b->first == 0.0 && b->second != 0.0) return P{a->first / b->second, a->second / b->second};
            return std::nullopt;
        default: return std::nullopt;
        }
    }
    }
    return std::nullopt;
}

FunctionHandle family_handle(const Expr& e, const HandleOptions& opt) {
    const int j = static_cast<int>(e.args[0]);
    if (e.family == "phi") return phi_family(j, e.args[1], e.args[2], opt.dim);
    if (e.family == "psi") {
        FunctionHandle h = psi_family(j, e.args[1], e.args[2]);
        h.dim = opt.dim;
        return h;
    }
    return w_family(j, e.args[1], opt.s, opt.dim, opt.normalization);
}

Fn compile(const ExprPtr& e, const HandleOptions& opt, Uses& uses) {
    switch (e->kind) {
    case Expr::Kind::Literal: {
        const double v = e->value;
        return [v](std::span<const double>, double) { return v; };
    }
    case Expr::Kind::Variable: {
        const int k = e->variable;
        if (k == 3) {
            uses.t = true;
            return [](std::span<const double>, double t) { return t; };
        }
        uses.x = true;
        return [k](std::span<const double> x, double) { return x[k]; };
    }
    case Expr::Kind::Family: {
        FunctionHandle h = family_handle(*e, opt);
        if (h.dependence != Dependence::TimeOnly) uses.x = true;
        if (h.dependence != Dependence::SpaceOnly) uses.t = true;
        uses.feature_length = std::min(uses.feature_length, h.feature_length);
        uses.feature_time = std::min(uses.feature_time, h.feature_time);
        uses.breaks.insert(uses.breaks.end(), h.time_breaks.begin(), h.time_breaks.end());
        if (h.c1_limited_in_time) uses.pos_in_t = true;
        return h.evaluator;
    }
    case Expr::Kind::Unary: {
        Fn c = compile(e->children[0], opt, uses);
        switch (e->op) {
        case Expr::Op::Neg: return [c](std::span<const double> x, double t) { return -c(x, t); };
        case Expr::Op::Exp: return [c](std::span<const double> x, double t) { return std::exp(c(x, t)); };
        case Expr::Op::Cos: return [c](std::span<const double> x, double t) { return std::cos(c(x, t)); };
        case Expr::Op::Sin: return [c](std::span<const double> x, double t) { return std::sin(c(x, t)); };
        case Expr::Op::Abs: return [c](std::span<const double> x, double t) { return std::abs(c(x, t)); };
        case Expr::Op::Sqrt: return [c](std::span<const double> x, double t) { return std::sqrt(c(x, t)); };
        case Expr::Op::Bump: return [c](std::span<const double> x, double t) { return standard_bump(c(x, t)); };
        case Expr::Op::Pos: {
            Uses inner;
            compile(e->children[0], opt, inner);
            if (inner.t) {
                uses.pos_in_t = true;
                if (auto aff = affine_in_t(*e->children[0]); aff && aff->first != 0.0)
                    uses.breaks.push_back(-aff->second / aff->first);
            }
            return [c](std::span<const double> x, double t) {
                const double v = c(x, t);
                return v > 0.0 ? v : 0.0;
            };
        }
        default: break;
        }
        break;
    }
    case Expr::Kind::Binary: {
        Fn a = compile(e->children[0], opt, uses);
        if (e->op == Expr::Op::Pow) {
            const double p = e->children[1]->value;
            if (p == 2.0) return [a](std::span<const double> x, double t) {
                    const double v = a(x, t);
                    return v * v;
                };
            return [a, p](std::span<const double> x, double t) { return std::pow(a(x, t), p); };
        }
        Fn b = compile(e->children[1], opt, uses);
        switch (e->op) {
        case Expr::Op::Add: return [a, b](std::span<const double> x, double t) { return a(x, t) + b(x, t); };
        case Expr::Op::Sub: return [a, b](std::span<const double> x, double t) { return a(x, t) - b(x, t); };
        case Expr::Op::Mul: return [a, b](std::span<const double> x, double t) { return a(x, t) * b(x, t); };
        case Expr::Op::Div: return [a, b](std::span<const double> x, double t) { return a(x, t) / b(x, t); };
        default: break;
        }
        break;
    }
    }
    throw ParseError("unsupported expression node", e->column);
}

} // namespace

FunctionHandle to_handle(const ExprPtr& e, const HandleOptions& opt) {
    validate(*e, opt.dim);
    Uses uses;
    FunctionHandle h;
    h.evaluator = compile(e, opt, uses);
    h.dim = opt.dim;
    if (e->kind == Expr::Kind::Family) {
        FunctionHandle fam = family_handle(*e, opt);
        fam.evaluator = h.evaluator;
        h = fam;
    } else {
        if (uses.x && uses.t)
            h.dependence = Dependence::SpaceTime;
        else if (uses.x)
            h.dependence = Dependence::SpaceOnly;
        else if (uses.t)
            h.dependence = Dependence::TimeOnly;
        else
            h.dependence = Dependence::Constant;
        if (h.dependence == Dependence::Constant) {
            std::vector<double> zero(opt.dim, 0.0);
            h = constant_function(opt.dim, h.evaluator(zero, 0.0));
        }
        if (std::isfinite(uses.feature_length)) h.feature_length = uses.feature_length;
        if (std::isfinite(uses.feature_time)) h.feature_time = uses.feature_time;
        if (h.dependence == Dependence::SpaceOnly) h.feature_time = std::numeric_limits<double>::infinity();
        h.time_breaks = uses.breaks;
        std::sort(h.time_breaks.begin(), h.time_breaks.end());
        h.time_breaks.erase(std::unique(h.time_breaks.begin(), h.time_breaks.end()), h.time_breaks.end());
        h.c1_limited_in_time = uses.pos_in_t;
    }
    if (opt.support) h.support = opt.support;
    if (opt.feature_length) h.feature_length = *opt.feature_length;
    if (opt.feature_time) h.feature_time = *opt.feature_time;
    return h;
}

} // namespace masterop
