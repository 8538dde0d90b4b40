#include <catch2/catch_amalgamated.hpp>

#include "skrec/poly.hpp"
#include "skrec/series.hpp"

using namespace skrec;

namespace {
double adiff(cplx a, cplx b) { return std::abs(a - b); }
} // namespace

TEST_CASE("polynomial roots round-trip through from_roots") {
    std::vector<cplx> roots = {cplx{1.0, 0.0}, cplx{-2.0, 0.5}, cplx{0.0, -1.5}, cplx{3.0, 3.0}};
    Poly p = Poly::from_roots(roots, cplx{2.0, -1.0});
    REQUIRE(p.degree() == 4);
    for (cplx r : roots) REQUIRE(std::abs(p.eval(r)) < 1e-12 * std::abs(p.coeff(4)) * 100);
    auto back = p.roots();
    REQUIRE(back.size() == 4);
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    for (size_t i = 0; i < 4; ++i) REQUIRE(adiff(back[i], roots[i]) < 1e-10);
}

TEST_CASE("translate produces Taylor coefficients at the shift point") {
    Poly p({cplx{1.0}, cplx{-3.0}, cplx{0.0}, cplx{2.0}}); // 1 - 3x + 2x^3
    cplx a{0.7, -0.3};
    Poly q = p.translate(a);
    for (cplx s : {cplx{0.1, 0.2}, cplx{-1.0, 0.5}, cplx{2.0, 0.0}})
        REQUIRE(adiff(q.eval(s), p.eval(s + a)) < 1e-12);
    // degree preserved, leading coefficient unchanged
    REQUIRE(q.degree() == 3);
    REQUIRE(adiff(q.coeff(3), p.coeff(3)) < 1e-15);
}

TEST_CASE("polynomial arithmetic and derivative") {
    Poly p({cplx{1.0}, cplx{2.0}}), q({cplx{0.0}, cplx{0.0}, cplx{1.0}});
    cplx x{0.3, 0.4};
    REQUIRE(adiff((p * q).eval(x), p.eval(x) * q.eval(x)) < 1e-14);
    REQUIRE(adiff((p + q).eval(x), p.eval(x) + q.eval(x)) < 1e-14);
    REQUIRE(adiff((p - q).eval(x), p.eval(x) - q.eval(x)) < 1e-14);
    REQUIRE(adiff(q.derivative().eval(x), 2.0 * x) < 1e-14);
    REQUIRE(Poly().is_zero());
    REQUIRE(Poly().degree() == -1);
}

TEST_CASE("power series reciprocal, sqrt, compose, reversion") {
    // f = 1 + s + s^2/2 + ... (exp-like but arbitrary)
    PowerSeries f({cplx{1.0}, cplx{1.0}, cplx{0.5}, cplx{-0.2}, cplx{0.05}, cplx{0.3}});
    auto r = f.reciprocal();
    auto one = f * r;
    REQUIRE(adiff(one[0], cplx{1.0}) < 1e-14);
    for (int k = 1; k < one.size(); ++k) REQUIRE(std::abs(one[k]) < 1e-13);

    auto s = f.sqrt_branch(cplx{1.0});
    auto sq = s * s;
    for (int k = 0; k < sq.size(); ++k) REQUIRE(adiff(sq[k], f[k]) < 1e-13);
    REQUIRE_THROWS_AS(f.sqrt_branch(cplx{2.0}), SeriesDivergenceError);

    PowerSeries g({cplx{0.0}, cplx{2.0}, cplx{-1.0}, cplx{0.3}, cplx{0.0}, cplx{0.1}});
    auto ginv = g.reversion();
    auto id = g.compose(ginv);
    REQUIRE(std::abs(id[0]) < 1e-13);
    REQUIRE(adiff(id[1], cplx{1.0}) < 1e-13);
    for (int k = 2; k < id.size(); ++k) REQUIRE(std::abs(id[k]) < 1e-12);
}

TEST_CASE("power series derivative, integral, sign flip") {
    PowerSeries f({cplx{3.0}, cplx{1.0}, cplx{-2.0}, cplx{0.5}});
    auto d = f.derivative();
    REQUIRE(adiff(d[0], cplx{1.0}) < 1e-15);
    REQUIRE(adiff(d[1], cplx{-4.0}) < 1e-15);
    auto i = d.integral();
    for (int k = 1; k < f.size(); ++k) REQUIRE(adiff(i[k], f[k]) < 1e-15);
    auto m = f.flip_sign_arg();
    REQUIRE(adiff(m[1], -f[1]) < 1e-15);
    REQUIRE(adiff(m[2], f[2]) < 1e-15);
}

TEST_CASE("Laurent bands track trusted windows") {
    // f = s^{-2} + 2 s^{-1} + 3 + 4 s
    LaurentBand f(-2, {cplx{1.0}, cplx{2.0}, cplx{3.0}, cplx{4.0}});
    REQUIRE(f.lo() == -2);
    REQUIRE(f.hi() == 1);
    REQUIRE(adiff(f.residue(), cplx{2.0}) < 1e-15);
    REQUIRE(adiff(f.coeff(-5), cplx{0.0}) < 1e-15); // below lo: exactly zero
    REQUIRE_THROWS_AS(f.coeff(2), JetOrderError);   // above hi: unknown

    // product window: lo adds, length is the shorter factor's length
    LaurentBand g(1, {cplx{1.0}, cplx{-1.0}});
    auto h = f * g;
    REQUIRE(h.lo() == -1);
    REQUIRE(adiff(h.coeff(-1), cplx{1.0}) < 1e-15);
    REQUIRE(adiff(h.coeff(0), cplx{1.0}) < 1e-15); // 2 - 1

    auto fl = f.flip_sign_arg();
    REQUIRE(adiff(fl.coeff(-2), cplx{1.0}) < 1e-15);
    REQUIRE(adiff(fl.coeff(-1), cplx{-2.0}) < 1e-15);

    auto sh = f.shifted(3);
    REQUIRE(sh.lo() == 1);
    REQUIRE(adiff(sh.coeff(1), cplx{1.0}) < 1e-15);

    // reciprocal: f * (1/f) = 1 on the overlapping window
    auto rec = f.reciprocal();
    auto prod = f * rec;
    REQUIRE(adiff(prod.coeff(0), cplx{1.0}) < 1e-13);
    for (int e = 1; e <= prod.hi(); ++e) REQUIRE(std::abs(prod.coeff(e)) < 1e-13);
}

TEST_CASE("Laurent sum aligns windows conservatively") {
    LaurentBand a(-1, {cplx{1.0}, cplx{1.0}, cplx{1.0}}); // s^-1 + 1 + s
    LaurentBand b(0, {cplx{2.0}, cplx{2.0}});             // 2 + 2s
    auto c = a + b;
    REQUIRE(c.lo() == -1);
    REQUIRE(c.hi() == 1);
    REQUIRE(adiff(c.coeff(-1), cplx{1.0}) < 1e-15);
    REQUIRE(adiff(c.coeff(0), cplx{3.0}) < 1e-15);
    REQUIRE(adiff(c.coeff(1), cplx{3.0}) < 1e-15);
}
