#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "spinorbit/jet.hpp"

using namespace spinorbit;

TEST_CASE("jet arithmetic against pointwise evaluation") {
    const int D = 8;
    const Jet x = Jet::variable(0, 0.3, D);
    const Jet y = Jet::variable(1, -0.2, D);
    const Jet f = (x * y + 2.0) * x - y * y * 0.5 + 1.0;
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> dd(-0.1, 0.1);
    for (int it = 0; it < 50; ++it) {
        const std::array<double, 4> h{dd(rng), dd(rng), 0.0, 0.0};
        const double xa = 0.3 + h[0], ya = -0.2 + h[1];
        const double exact = (xa * ya + 2.0) * xa - ya * ya * 0.5 + 1.0;
        CHECK(f.eval(h) == doctest::Approx(exact).epsilon(1e-14));
    }
}

TEST_CASE("jet analytic functions match finite expansion") {
    const int D = 12;
    const Jet x = Jet::variable(2, 0.0, D);
    const Jet g = sin(2.0 * x) * sin(2.0 * x) + cos(2.0 * x) * cos(2.0 * x);
    CHECK(g.constant_part() == doctest::Approx(1.0).epsilon(1e-15));
    // all non-constant coefficients cancel
    double resid = 0.0;
    for (const auto& t : g.terms())
        if (jdetail::jdeg(t.key) > 0) resid = std::max(resid, std::abs(t.coeff));
    CHECK(resid < 1e-14);

    const Jet s = Jet::variable(0, 2.0, D);
    const Jet r = sqrt(s * s);  // = |s| = s near 2
    for (const auto& t : r.terms()) {
        int a, b, c, d;
        jdetail::junpack(t.key, a, b, c, d);
        if (a == 0) CHECK(t.coeff == doctest::Approx(2.0).epsilon(1e-14));
        if (a == 1) CHECK(t.coeff == doctest::Approx(1.0).epsilon(1e-13));
        if (a > 1) CHECK(std::abs(t.coeff) < 1e-13);
    }

    const Jet q = recip(s);  // 1/(2+x) coefficients (-1)^m / 2^{m+1}
    for (const auto& t : q.terms()) {
        int a, b, c, d;
        jdetail::junpack(t.key, a, b, c, d);
        const double expect = std::pow(-1.0, a) / std::pow(2.0, a + 1);
        CHECK(t.coeff == doctest::Approx(expect).epsilon(1e-13));
    }
    CHECK_THROWS_AS(recip(Jet::variable(0, 0.0, 4)), DomainError);
    CHECK_THROWS_AS(sqrt(Jet::variable(0, -1.0, 4)), DomainError);
}

TEST_CASE("jet truncation discards above-degree products") {
    const int D = 3;
    const Jet x = Jet::variable(0, 0.0, D);
    Jet p = x;
    for (int k = 0; k < 5; ++k) p = p * x;  // x^6 -> empty at degree 3
    CHECK(p.empty());
}

TEST_CASE("dual numbers: gradients of composite expressions") {
    auto f = [](auto x, auto y) {
        using std::cos;
        using std::sin;
        using std::sqrt;
        return sin(x) * cos(y) + sqrt(1.0 + x * x) / (2.0 + y);
    };
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> dd(-1.0, 1.0);
    for (int it = 0; it < 100; ++it) {
        const double x0 = dd(rng), y0 = dd(rng);
        const Dual4 fx = f(Dual4::variable(0, x0), Dual4::variable(1, y0));
        const double h = 1e-6;
        const double gx = (f(x0 + h, y0) - f(x0 - h, y0)) / (2 * h);
        const double gy = (f(x0, y0 + h) - f(x0, y0 - h)) / (2 * h);
        CHECK(fx.v == doctest::Approx(f(x0, y0)).epsilon(1e-14));
        CHECK(fx.d[0] == doctest::Approx(gx).epsilon(1e-8));
        CHECK(fx.d[1] == doctest::Approx(gy).epsilon(1e-8));
    }
}
