#include "generators.hpp"

#include "masterop/errors.hpp"
#include "masterop/families.hpp"
#include "masterop/funcdsl.hpp"
#include "masterop/operators.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>

using namespace masterop;

namespace {

using V = std::vector<double>;

HandleOptions opts(int dim, double s = 0.5) {
    HandleOptions o;
    o.dim = dim;
    o.s = s;
    return o;
}

double eval(const std::string& text, V x, double t, int dim = 1) {
    return to_handle(parse(text), opts(dim))(x, t);
}

int error_column(const std::string& text) {
    try {
        parse(text);
    } catch (const ParseError& e) {
        return e.column();
    }
    return 0;
}

// random AST in the printable subset
ExprPtr random_expr(gen::Source& g, int depth) {
    auto e = std::make_shared<Expr>();
    const int pick = depth <= 0 ? g.integer(0, 1) : g.integer(0, 5);
    if (pick == 0) {
        e->value = g.integer(0, 3) == 0 ? double(g.integer(0, 9)) : g.log_uniform(1e-3, 1e3);
    } else if (pick == 1) {
        e->kind = Expr::Kind::Variable;
        e->variable = g.integer(0, 1) ? 3 : g.integer(0, 2);
    } else if (pick == 2) {
        e->kind = Expr::Kind::Unary;
        static const Expr::Op ops[] = {Expr::Op::Neg, Expr::Op::Exp, Expr::Op::Cos, Expr::Op::Sin,
                                       Expr::Op::Abs, Expr::Op::Pos, Expr::Op::Sqrt, Expr::Op::Bump};
        e->op = ops[g.integer(0, 7)];
        e->children = {random_expr(g, depth - 1)};
    } else if (pick == 3) {
        e->kind = Expr::Kind::Binary;
        e->op = Expr::Op::Pow;
        auto lit = std::make_shared<Expr>();
        lit->value = g.integer(0, 1) ? double(g.integer(-3, 3)) : g.uniform(-2.0, 2.0);
        e->children = {random_expr(g, depth - 1), lit};
    } else if (pick == 4) {
        e->kind = Expr::Kind::Family;
        const int f = g.integer(0, 2);
        e->family = f == 0 ? "phi" : f == 1 ? "psi" : "w";
        e->args = {double(g.integer(1, 32)), g.uniform(0.6, 2.0)};
        if (f < 2) e->args.push_back(g.uniform(0.1, 2.0));
    } else {
        e->kind = Expr::Kind::Binary;
        static const Expr::Op ops[] = {Expr::Op::Add, Expr::Op::Sub, Expr::Op::Mul, Expr::Op::Div};
        e->op = ops[g.integer(0, 3)];
        e->children = {random_expr(g, depth - 1), random_expr(g, depth - 1)};
    }
    return e;
}

} // namespace

TEST_CASE("evaluation") {
    CHECK(eval("cos(x1)*exp(-t)", V{0.0}, 0.0) == 1.0);
    CHECK(eval("2+3*x1^2", V{2.0}, 0.0) == 14.0);
    CHECK(eval("-x1^2", V{3.0}, 0.0) == -9.0);
    CHECK(eval("2^-1", V{0.0}, 0.0) == 0.5);
    CHECK(eval("8/4/2", V{0.0}, 0.0) == 1.0);
    CHECK(eval("1-2-3", V{0.0}, 0.0) == -4.0);
    CHECK(eval("sqrt(abs(x1)) + sin(0)", V{-4.0}, 0.0) == 2.0);
    CHECK(eval("bump(x1)", V{2.5}, 0.0) == doctest::Approx(std::exp(-4.0)).epsilon(1e-15));
    CHECK(eval(" x1 +  x2 * x3 ", V{1.0, 2.0, 3.0}, 0.0, 3) == 7.0);
    CHECK(eval("1.5e2 + .5", V{0.0}, 0.0) == 150.5);
}

TEST_CASE("eta profile from pos") {
    const auto h = to_handle(parse("pos(t)^2 + 1"), opts(1));
    for (double t : {-2.0, -0.1, 0.0, 0.3, 2.0}) CHECK(h(V{0.0}, t) == eta_profile(t));
    CHECK(h.c1_limited_in_time);
    REQUIRE(h.time_breaks.size() == 1);
    CHECK(h.time_breaks[0] == 0.0);
    CHECK(h.dependence == Dependence::TimeOnly);
    const auto shifted = to_handle(parse("pos(2*t - 1)"), opts(1));
    REQUIRE(shifted.time_breaks.size() == 1);
    CHECK(shifted.time_breaks[0] == 0.5);
    CHECK_FALSE(to_handle(parse("pos(x1)"), opts(1)).c1_limited_in_time);
}

TEST_CASE("syntax errors carry columns") {
    CHECK(error_column("cos(") == 5);
    CHECK(error_column("cos(x") == 5);
    CHECK(error_column("cos(x1") == 7);
    CHECK(error_column("1 + ") == 5);
    CHECK(error_column("foo(1)") == 1);
    CHECK(error_column("2 $ 3") == 3);
    CHECK(error_column("x1^t") == 4);
    CHECK(error_column("phi(0.5,1,1)") == 1);
    CHECK(error_column("phi(2,1)") == 8);
    CHECK(error_column("(1+2") == 5);
    CHECK(error_column("1 2") == 3);
    CHECK(error_column("") == 1);
}

TEST_CASE("dimension validation") {
    CHECK_NOTHROW(validate(*parse("x1 + t"), 1));
    try {
        validate(*parse("t + x3"), 2);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.column() == 5);
    }
    CHECK_THROWS_AS(to_handle(parse("x2"), opts(1)), ParseError);
}

TEST_CASE("handles and metadata") {
    const auto phi = to_handle(parse("phi(4,1,1)"), opts(1));
    REQUIRE(phi.support);
    CHECK(phi.support->radius == 12.0);
    CHECK(phi.dependence == Dependence::SpaceOnly);

    const auto zero = to_handle(parse("0"), opts(1));
    CHECK(zero.dependence == Dependence::Constant);
    CHECK(master_op(zero, SpaceTimePoint{{0.3}, 0.1}, kernel_constants(1, 0.5)).value == 0.0);

    const auto w = to_handle(parse("w(8,1)"), opts(1, 0.5));
    const auto ref = w_family(8, 1.0, 0.5);
    gen::for_cases(500, 107, [&](gen::Source& g, int) {
        const V x{g.uniform(-30.0, 30.0)};
        const double t = g.uniform(-100.0, 100.0);
        CHECK(w(x, t) == ref(x, t));
    });
    REQUIRE(w.support);
    CHECK(w.support->radius == ref.support->radius);
    CHECK(w.c1_limited_in_time);

    const auto mixed = to_handle(parse("cos(x1) * exp(t)"), opts(1));
    CHECK(mixed.dependence == Dependence::SpaceTime);
    CHECK_FALSE(mixed.support.has_value());

    HandleOptions o = opts(1);
    o.support = SupportBox{5.0, -1.0, 1.0};
    o.feature_length = 0.25;
    const auto over = to_handle(parse("x1"), o);
    REQUIRE(over.support);
    CHECK(over.support->radius == 5.0);
    CHECK(over.feature_length == 0.25);
}

TEST_CASE("property: print round-trips") {
    gen::for_cases(2000, 109, [](gen::Source& g, int) {
        const auto e = random_expr(g, 4);
        const std::string text = print(*e);
        const auto back = parse(text);
        CHECK(structurally_equal(*e, *back));
        CHECK(print(*back) == text);
    });
}

TEST_CASE("property: evaluation is pure") {
    gen::for_cases(300, 113, [](gen::Source& g, int) {
        const auto h = to_handle(random_expr(g, 4), opts(3));
        const V x = g.vec(3, -5.0, 5.0);
        const double t = g.uniform(-5.0, 5.0);
        const double a = h(x, t), b = h(x, t);
        CHECK(std::memcmp(&a, &b, sizeof a) == 0);
    });
}
