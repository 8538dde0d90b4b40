#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "skrec/bergman.hpp"
#include "skrec/contour.hpp"
#include "skrec/curves.hpp"
#include "skrec/errors.hpp"
#include "skrec/theta.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

using namespace skrec;
using skrec_test::hyp_point;
using skrec_test::Pipeline;

namespace {

const Pipeline& quartic() { return skrec_test::pipeline("genus1_quartic_roots"); }
const Pipeline& legendre() { return skrec_test::pipeline("genus1_legendre"); }
const Pipeline& sextic() { return skrec_test::pipeline("genus2_sextic"); }
const Pipeline& tower() { return skrec_test::pipeline("tower_gl2_genus2"); }

struct KernelBundle {
    std::vector<LocalFrame> frames;
    KleinKernel kk;
};

KernelBundle make_bundle(const Pipeline& p) {
    KernelBundle b;
    b.frames = local_frames(p.m, p.val, 40);
    b.kk = make_klein_kernel(p.m, p.val, p.fr, p.pd);
    return b;
}

const KernelBundle& quartic_kernel() {
    static KernelBundle b = make_bundle(quartic());
    return b;
}

const KernelBundle& sextic_kernel() {
    static KernelBundle b = make_bundle(sextic());
    return b;
}

} // namespace

TEST_CASE("weierstrass oracle is doubly periodic and has the right pole") {
    const cplx tau{0.31, 1.27};
    const cplx z{0.23, 0.11};
    const cplx p0 = skrec_test::weierstrass_p(z, tau);
    CHECK(std::abs(skrec_test::weierstrass_p(z + 1.0, tau) - p0) < 1e-10 * std::abs(p0));
    CHECK(std::abs(skrec_test::weierstrass_p(z + tau, tau) - p0) < 1e-10 * std::abs(p0));
    const cplx eps{1e-4, 0.5e-4};
    const cplx near0 = skrec_test::weierstrass_p(eps, tau);
    CHECK(std::abs(near0 - 1.0 / (eps * eps)) < 1e-2);
}

TEST_CASE("odd characteristic selection: theta vanishes at 0 with nonzero gradient") {
    for (const Pipeline* p : {&quartic(), &sextic(), &tower()}) {
        ThetaContext ctx = select_odd_characteristic(p->pd.tau);
        ThetaEval at0 = theta_eval(ctx, Eigen::VectorXcd::Zero(ctx.genus));
        INFO("genus " << ctx.genus);
        CHECK(std::abs(at0.value) < 1e-12 * std::max(1.0, at0.term_scale));
        CHECK(at0.grad.norm() > 1e-6);
    }
}

TEST_CASE("log-theta Hessian is invariant under full lattice shifts") {
    for (const Pipeline* p : {&quartic(), &sextic()}) {
        ThetaContext ctx = select_odd_characteristic(p->pd.tau);
        const int g = ctx.genus;
        Eigen::VectorXcd z(g);
        for (int i = 0; i < g; ++i) z[i] = cplx(0.137 + 0.05 * i, 0.083 - 0.02 * i);
        Eigen::VectorXd n(g), mm(g);
        for (int i = 0; i < g; ++i) {
            n[i] = (i % 2 == 0) ? 2.0 : -1.0;
            mm[i] = (i % 2 == 0) ? -1.0 : 3.0;
        }
        const Eigen::MatrixXcd h0 = theta_log_hessian(ctx, z);
        const Eigen::MatrixXcd h1 =
            theta_log_hessian(ctx, z + ctx.tau * n.cast<cplx>() + mm.cast<cplx>());
        CHECK((h1 - h0).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, h0.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("kernel a-periods vanish at fresh probe points") {
    for (auto [pp, bb] : {std::pair{&quartic(), &quartic_kernel()},
                          std::pair{&sextic(), &sextic_kernel()}}) {
        const Pipeline& p = *pp;
        const KernelBundle& b = *bb;
        const int g = p.val.genus;
        // Probe away from the construction circle, on the other sheet too.
        const CurvePoint p2 = hyp_point(p.m, cplx{0.37, 2.31}, 1);
        for (int i = 0; i < g; ++i) {
            VectorIntegrand f = [&](const CurvePoint& q, std::vector<cplx>& out) {
                out[0] = b.kk.eval_dx(p.m, p.val, q, p2);
            };
            const std::vector<cplx> per = integrate_over_cycle(p.m, p.fr, i, 1, f, 1e-12);
            INFO("genus " << g << " a-cycle " << i);
            CHECK(std::abs(per[0]) < 1e-9);
        }
    }
}

TEST_CASE("kernel b-periods reproduce normalized differentials") {
    const Pipeline& p = sextic();
    const KernelBundle& b = sextic_kernel();
    const int g = p.val.genus;
    const CurvePoint p2 = hyp_point(p.m, cplx{-0.62, 1.83}, 0);
    const std::vector<cplx> w = normalized_dx(p.m, p.val, p.pd.C, p2);
    for (int i = 0; i < g; ++i) {
        VectorIntegrand f = [&](const CurvePoint& q, std::vector<cplx>& out) {
            out[0] = b.kk.eval_dx(p.m, p.val, q, p2);
        };
        const std::vector<cplx> per = integrate_over_cycle(p.m, p.fr, g + i, 1, f, 1e-12);
        const cplx want = TWO_PI_I * w[size_t(i)];
        INFO("b-cycle " << i);
        CHECK(std::abs(per[0] - want) < 1e-8 * std::max(1.0, std::abs(want)));
    }
}

TEST_CASE("kernel diagonal normalization and anti-diagonal regularity") {
    const Pipeline& p = sextic();
    const KernelBundle& b = sextic_kernel();
    const cplx x{0.41, 0.77};

    const CurvePoint p1 = hyp_point(p.m, x, 0);
    const cplx h{1e-4, 0.4e-4};
    const CurvePoint p2 = nearest_point(p.m, x + h, fiber_from_point(p.m, p1));
    CHECK(std::abs(b.kk.eval_dx(p.m, p.val, p1, p2) * h * h - 1.0) < 1e-6);

    // Against the involuted point the kernel stays bounded: values at
    // shrinking offsets converge instead of blowing up.
    const cplx e1{1e-3, 0.0}, e2{1e-5, 0.0};
    const CurvePoint q1 = hyp_point(p.m, x + e1, 1);
    const CurvePoint q2 = hyp_point(p.m, x + e2, 1);
    const cplx v1 = b.kk.eval_dx(p.m, p.val, p1, q1);
    const cplx v2 = b.kk.eval_dx(p.m, p.val, p1, q2);
    CHECK(std::abs(v1 - v2) < 1e-2 * std::max(1.0, std::abs(v2)));
    CHECK(std::abs(v2) < 1e3);
}

TEST_CASE("kernel has no residue at infinity") {
    const Pipeline& p = sextic();
    const KernelBundle& b = sextic_kernel();
    const CurvePoint p2 = hyp_point(p.m, cplx{0.2, 1.1}, 0);
    XPath loop = circle_loop(cplx{0.0}, 40.0 * p.val.x_scale, 0.0);
    ContinuedPath cp(p.m, loop, principal_fiber(p.m, loop.front().at(0.0)));
    REQUIRE(cp.closed_lift());
    VectorIntegrand f = [&](const CurvePoint& q, std::vector<cplx>& out) {
        out[0] = b.kk.eval_dx(p.m, p.val, q, p2);
    };
    const std::vector<cplx> res = integrate_differentials(p.m, cp, 1, f, 1e-11);
    CHECK(std::abs(res[0]) < 1e-8);
}

TEST_CASE("genus-1 kernel matches the flat-torus oracle") {
    for (const Pipeline* pp : {&quartic(), &legendre()}) {
        const Pipeline& p = *pp;
        KernelBundle b = make_bundle(p);
        const cplx tau = p.pd.tau(0, 0);
        const cplx eta1 = skrec_test::torus_eta1(tau);
        const CurvePoint a1 = hyp_point(p.m, cplx{0.33, 0.71}, 0);
        const CurvePoint a2 = hyp_point(p.m, cplx{-0.58, 1.12}, 0);
        const CurvePoint a3 = hyp_point(p.m, cplx{0.12, -0.94}, 1);
        for (auto [p1, p2] : {std::pair{a1, a2}, std::pair{a1, a3}, std::pair{a2, a3}}) {
            const cplx z = abel_map(p.m, p.val, p.fr, p.pd, p1, p2)[0];
            const cplx w1 = normalized_dx(p.m, p.val, p.pd.C, p1)[0];
            const cplx w2 = normalized_dx(p.m, p.val, p.pd.C, p2)[0];
            const cplx want = (skrec_test::weierstrass_p(z, tau) + 2.0 * eta1) * w1 * w2;
            const cplx got = b.kk.eval_dx(p.m, p.val, p1, p2);
            INFO("pair on " << p.val.genus);
            CHECK(std::abs(got - want) < 1e-8 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST_CASE("algebraic and theta kernel routes agree at random pairs") {
    for (auto [pp, bb] : {std::pair{&quartic(), &quartic_kernel()},
                          std::pair{&sextic(), &sextic_kernel()}}) {
        const Pipeline& p = *pp;
        const KernelBundle& b = *bb;
        const ThetaKernel tk = make_theta_kernel(p.m, p.val, p.fr, p.pd);
        // Deterministic scatter of sample pairs across sheets.
        std::vector<std::pair<CurvePoint, CurvePoint>> pairs;
        for (int k = 0; k < 5; ++k) {
            const double ph1 = 0.7 + 0.83 * k, ph2 = 2.1 + 1.11 * k;
            const cplx x1 = 1.9 * p.val.x_scale * std::exp(I * ph1);
            const cplx x2 = 1.4 * p.val.x_scale * std::exp(I * ph2);
            pairs.emplace_back(hyp_point(p.m, x1, k % 2), hyp_point(p.m, x2, (k / 2) % 2));
        }
        for (auto& [p1, p2] : pairs) {
            const cplx kv = b.kk.eval_dx(p.m, p.val, p1, p2);
            const cplx tv = theta_kernel_eval_dx(tk, p.m, p.val, p.fr, p.pd, p1, p2);
            INFO("genus " << p.val.genus);
            CHECK(std::abs(kv - tv) < 1e-8 * std::max(1.0, std::abs(kv)));
        }
    }
}

TEST_CASE("frame jets reproduce the projective constant of the flat torus") {
    for (const Pipeline* pp : {&quartic(), &legendre()}) {
        const Pipeline& p = *pp;
        KernelBundle b = make_bundle(p);
        const KernelSampler S = make_klein_sampler(b.kk, p.m, p.val, b.frames);
        const BergmanJets J = bergman_jets(p.m, p.val, b.frames, p.pd.C, S, 12);
        const cplx eta1 = skrec_test::torus_eta1(p.pd.tau(0, 0));
        for (int a = 0; a < J.n_ram; ++a) {
            // In the flat coordinate u = \int omega the regular part of the
            // kernel is the constant 2 eta_1; pulling back to the local frame
            // adds the Schwarzian of u(q), which is 2 w2/w0 at q = 0.
            const PowerSeries& w = J.omega[size_t(a)][0];
            const cplx want = 12.0 * eta1 * w[0] * w[0] + 2.0 * w[2] / w[0];
            INFO("frame " << a);
            CHECK(std::abs(J.SB[size_t(a)] - want) < 1e-8 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST_CASE("frame jets: partial sums reproduce the sampler off-grid") {
    const Pipeline& p = sextic();
    const KernelBundle& b = sextic_kernel();
    const KernelSampler S = make_klein_sampler(b.kk, p.m, p.val, b.frames);
    const BergmanJets J = bergman_jets(p.m, p.val, b.frames, p.pd.C, S, 16);
    const int a = 1, c = 4;
    const cplx s = 0.07 * b.frames[size_t(a)].q_radius * std::exp(I * 0.9);
    const cplx t = 0.06 * b.frames[size_t(c)].q_radius * std::exp(I * 2.3);
    cplx sum = 0.0;
    for (int mth = 0; mth <= J.order; ++mth)
        for (int l = 0; l <= J.order; ++l)
            sum += J.tensor(a, c)(mth, l) * std::pow(s, mth) * std::pow(t, l);
    const cplx direct = S(a, c, s, t);
    CHECK(std::abs(sum - direct) < 1e-10 * std::max(1.0, std::abs(direct)));
}

TEST_CASE("theta-route jets agree with algebraic-route jets at genus 2") {
    const Pipeline& p = sextic();
    const KernelBundle& b = sextic_kernel();
    const ThetaKernel tk = make_theta_kernel(p.m, p.val, p.fr, p.pd);
    const KernelSampler St = make_theta_sampler(tk, p.m, p.val, p.fr, p.pd, b.frames);
    const BergmanJets Jk = klein_jets(p.m, p.val, b.frames, b.kk, 8);
    const BergmanJets Jt = bergman_jets(p.m, p.val, b.frames, p.pd.C, St, 8);
    double scale = 1.0;
    for (int a = 0; a < Jk.n_ram; ++a)
        for (int c = 0; c < Jk.n_ram; ++c)
            scale = std::max(scale, Jk.tensor(a, c).cwiseAbs().maxCoeff());
    // The algebraic-route jets are exact series arithmetic; the theta-route
    // jets are sampled, and extracting the (m, l) coefficient from circles of
    // radius r amplifies the sampler's pointwise accuracy floor by r^{-m-l}.
    // The per-entry tolerance tracks that amplification on top of a tight
    // relative floor, so low orders are compared at 1e-8 while the
    // high-order corner is allowed its unavoidable noise.
    for (int a = 0; a < Jk.n_ram; ++a)
        for (int c = 0; c < Jk.n_ram; ++c) {
            const double ra = 0.8 * 0.45 * b.frames[size_t(a)].q_radius;
            const double rc = 0.8 * 0.45 * b.frames[size_t(c)].q_radius;
            const Eigen::MatrixXd D = (Jk.tensor(a, c) - Jt.tensor(a, c)).cwiseAbs();
            for (int mth = 0; mth <= Jk.order; ++mth)
                for (int l = 0; l <= Jk.order; ++l) {
                    const double tol =
                        1e-8 * scale + 1e-12 * std::pow(ra, -mth) * std::pow(rc, -l);
                    INFO("pair " << a << "," << c << " entry " << mth << "," << l);
                    REQUIRE(D(mth, l) < tol);
                }
        }
    for (int a = 0; a < Jk.n_ram; ++a)
        CHECK(std::abs(Jk.SB[size_t(a)] - Jt.SB[size_t(a)]) <
              1e-7 * std::max(1.0, std::abs(Jk.SB[size_t(a)])));
}

TEST_CASE("tower theta sampler: symmetry and diagonal pole") {
    const Pipeline& p = tower();
    std::vector<LocalFrame> frames = local_frames(p.m, p.val, 40);
    const ThetaKernel tk = make_theta_kernel(p.m, p.val, p.fr, p.pd);
    const KernelSampler S = make_theta_sampler(tk, p.m, p.val, p.fr, p.pd, frames);

    const int a = 0, c = static_cast<int>(frames.size()) - 1;
    const cplx s = 0.21 * frames[size_t(a)].q_radius * std::exp(I * 1.2);
    const cplx t = 0.17 * frames[size_t(c)].q_radius * std::exp(I * 2.9);
    const cplx v1 = S(a, c, s, t), v2 = S(c, a, t, s);
    CHECK(std::abs(v1 - v2) < 1e-9 * std::max(1.0, std::abs(v1)));

    const cplx s0 = 0.3 * frames[0].q_radius;
    for (double eps : {1e-2, 0.5e-2}) {
        const cplx t0 = s0 * (1.0 + eps);
        const cplx val = S(0, 0, s0, t0) * (s0 - t0) * (s0 - t0);
        CHECK(std::abs(val - 1.0) < 5e-3);
    }
}
