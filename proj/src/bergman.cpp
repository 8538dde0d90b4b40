#include "skrec/bergman.hpp"

#include <algorithm>
#include <cmath>

#include "skrec/contour.hpp"
#include "skrec/errors.hpp"

namespace skrec {

namespace {

// Symmetric polynomial part of the rational kernel: with Q = sum lambda_k x^k,
//   F(x1, x2) = sum_{i=0}^{floor(deg/2)+1} (x1 x2)^i (2 lambda_{2i} + lambda_{2i+1} (x1+x2)),
// which satisfies F(x, x) = 2 Q(x) and dF/dx2 |_{x2=x1} = Q'(x1); those two
// identities make the kernel residue-free across the whole diagonal.
cplx kernel_f_poly(const Poly& Q, cplx x1, cplx x2) {
    const int top = Q.degree() / 2 + 1;
    cplx acc = 0.0, pw = 1.0;
    for (int i = 0; i <= top; ++i) {
        acc += pw * (2.0 * Q.coeff(2 * i) + Q.coeff(2 * i + 1) * (x1 + x2));
        pw *= x1 * x2;
    }
    return acc;
}

// A probe abscissa on a circle around the branch centroid, nudged outward
// until it clears every branch point; `slot` staggers the phase.
cplx generic_x(const CurveValidation& val, int slot, int count) {
    cplx ctr = 0.0;
    for (cplx b : val.branch_x) ctr += b;
    ctr /= double(val.branch_x.size());
    double rad = 1.6 * val.x_scale;
    for (int attempt = 0; attempt < 40; ++attempt) {
        cplx x = ctr + rad * std::exp(I * (TWO_PI_I.imag() * double(slot) / double(count) + 0.37));
        double d = 1e300;
        for (cplx b : val.branch_x) d = std::min(d, std::abs(x - b));
        if (d > 0.25 * val.x_scale) return x;
        rad *= 1.17;
    }
    throw IllConditionedError("could not place a probe point away from the branch locus");
}

} // namespace

cplx KleinKernel::eval_dx(const CurveModel& m, const CurveValidation& val, const CurvePoint& p1,
                          const CurvePoint& p2) const {
    const cplx dx = p1.x - p2.x;
    cplx value = (2.0 * p1.y * p2.y + kernel_f_poly(Q, p1.x, p2.x)) / (4.0 * p1.y * p2.y * dx * dx);
    if (genus > 0) {
        const std::vector<cplx> v1 = normalized_dx(m, val, C, p1);
        const std::vector<cplx> v2 = normalized_dx(m, val, C, p2);
        for (int i = 0; i < genus; ++i)
            for (int j = 0; j < genus; ++j) value += kappa(i, j) * v1[size_t(i)] * v2[size_t(j)];
    }
    return value;
}

KleinKernel make_klein_kernel(const CurveModel& m, const CurveValidation& val,
                              const SymplecticFrame& fr, const PeriodData& pd, double tol) {
    if (m.mode != CurveMode::Hyperelliptic)
        throw ModeError("the algebraic kernel route exists for hyperelliptic models only");
    KleinKernel kk;
    kk.Q = m.Q;
    kk.genus = val.genus;
    if (kk.genus == 0) return kk; // rational curve: no correction, no a-periods

    kk.C = pd.C;
    const int g = val.genus;
    const int nprobe = g + 2;

    // Probe points in the second slot.
    std::vector<CurvePoint> probes;
    for (int s = 0; s < nprobe; ++s) {
        const cplx x = generic_x(val, s, nprobe);
        const Fiber f = principal_fiber(m, x);
        probes.push_back(point_from_fiber(m, x, f));
    }

    // phi(i, s) = a_i-period (first slot) of the uncorrected kernel against
    // probe s; one vector quadrature pass per a-cycle.
    KleinKernel bare = kk; // kappa not set; eval of the rational part only
    bare.genus = 0;        // disable the correction term inside eval_dx
    Eigen::MatrixXcd phi(g, nprobe);
    for (int i = 0; i < g; ++i) {
        VectorIntegrand f = [&](const CurvePoint& p, std::vector<cplx>& out) {
            for (int s = 0; s < nprobe; ++s) out[size_t(s)] = bare.eval_dx(m, val, p, probes[size_t(s)]);
        };
        std::vector<cplx> per = integrate_over_cycle(m, fr, i, nprobe, f, 0.1 * tol);
        for (int s = 0; s < nprobe; ++s) phi(i, s) = per[size_t(s)];
    }

    // The corrected kernel adds sum_l kappa_{il} omega_l(p2) to each a_i
    // period, so kappa rows solve V kappa_i^T = -phi_i with V(s, l) = omega_l
    // at probe s.
    Eigen::MatrixXcd V(nprobe, g);
    for (int s = 0; s < nprobe; ++s) {
        const std::vector<cplx> w = normalized_dx(m, val, pd.C, probes[size_t(s)]);
        for (int l = 0; l < g; ++l) V(s, l) = w[size_t(l)];
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.singularValues()(g - 1) < 1e-10 * svd.singularValues()(0))
        throw CorrectionRankError("probe system for the holomorphic correction is rank-deficient");

    Eigen::MatrixXcd kap(g, g);
    double resid = 0.0, scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
    for (int i = 0; i < g; ++i) {
        Eigen::VectorXcd rhs = -phi.row(i).transpose();
        Eigen::VectorXcd ki = svd.solve(rhs);
        resid = std::max(resid, (V * ki - rhs).cwiseAbs().maxCoeff());
        kap.row(i) = ki.transpose();
    }
    if (resid > 1e-7 * scale)
        throw CorrectionRankError("holomorphic correction cannot cancel the a-periods "
                                  "(least-squares residual too large)");
    const double asym = (kap - kap.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-6 * std::max(1.0, kap.cwiseAbs().maxCoeff()))
        throw CorrectionRankError("solved correction is not symmetric; kernel data inconsistent");
    kk.kappa = 0.5 * (kap + kap.transpose().eval());
    return kk;
}

ThetaKernel make_theta_kernel(const CurveModel& m, const CurveValidation& val,
                              const SymplecticFrame& fr, const PeriodData& pd, double tol) {
    ThetaKernel tk;
    tk.ctx = select_odd_characteristic(pd.tau);
    tk.ctx.sign = 1.0;

    // Fix the sign from the diagonal normalization: for a close same-sheet
    // pair, B * (x1 - x2)^2 -> 1.
    const cplx x0 = generic_x(val, 0, 7);
    const CurvePoint p1 = point_from_fiber(m, x0, principal_fiber(m, x0));
    const cplx h = 1e-3 * val.x_scale * std::exp(I * 0.7);
    const CurvePoint p2 = nearest_point(m, x0 + h, fiber_from_point(m, p1));

    const cplx b = theta_kernel_eval_dx(tk, m, val, fr, pd, p1, p2, tol);
    const cplx ratio = b * h * h;
    if (std::abs(ratio - 1.0) < 0.05)
        tk.ctx.sign = 1.0;
    else if (std::abs(ratio + 1.0) < 0.05)
        tk.ctx.sign = -1.0;
    else
        throw IllConditionedError("theta kernel fails the diagonal normalization check");
    return tk;
}

cplx theta_kernel_eval_dx(const ThetaKernel& tk, const CurveModel& m,
                          const CurveValidation& val, const SymplecticFrame& fr,
                          const PeriodData& pd, const CurvePoint& p1, const CurvePoint& p2,
                          double tol) {
    const Eigen::VectorXcd z = abel_map(m, val, fr, pd, p1, p2, tol);
    const Eigen::MatrixXcd H = theta_log_hessian(tk.ctx, z);
    const std::vector<cplx> v1 = normalized_dx(m, val, pd.C, p1);
    const std::vector<cplx> v2 = normalized_dx(m, val, pd.C, p2);
    cplx acc = 0.0;
    for (int i = 0; i < pd.tau.rows(); ++i)
        for (int j = 0; j < pd.tau.rows(); ++j) acc += H(i, j) * v1[size_t(i)] * v2[size_t(j)];
    return tk.ctx.sign * acc;
}

KernelSampler make_klein_sampler(const KleinKernel& kk, const CurveModel& m,
                                 const CurveValidation& val,
                                 const std::vector<LocalFrame>& frames) {
    // Branch-point-aware evaluation: near a ramification point both the base
    // difference x1 - x2 and the fiber value y lose relative precision when
    // composed through x = x0 + q^2, so they are formed directly in the frame
    // coordinate: x1 - x2 = (x_a - x_b) + s^2 - t^2 and y = q sqrt(G(q^2))
    // with G the translated polynomial Q(x0 + u)/u.  This matches the series
    // construction of the frames coefficient for coefficient.
    auto G = std::make_shared<std::vector<Poly>>();
    for (const LocalFrame& f : frames) {
        const Poly sh = kk.Q.translate(f.x0);
        std::vector<cplx> gc(size_t(std::max(0, sh.degree())), cplx{0.0});
        for (int k = 1; k <= sh.degree(); ++k) gc[size_t(k - 1)] = sh.coeff(k);
        G->push_back(Poly{std::move(gc)});
    }
    return [&kk, &m, &val, &frames, G](int a, int b, cplx s, cplx t) -> cplx {
        auto yof = [&](int idx, cplx q) -> cplx {
            const LocalFrame& f = frames[size_t(idx)];
            const cplx ex = q * std::sqrt((*G)[size_t(idx)].eval(q * q));
            const cplx pred = f.y.eval(q);
            return (std::abs(ex - pred) <= std::abs(-ex - pred)) ? ex : -ex;
        };
        const LocalFrame& fa = frames[size_t(a)];
        const LocalFrame& fb = frames[size_t(b)];
        CurvePoint p1;
        p1.x = fa.x0 + s * s;
        p1.y = yof(a, s);
        CurvePoint p2;
        p2.x = fb.x0 + t * t;
        p2.y = yof(b, t);
        const cplx dx = (fa.x0 - fb.x0) + s * s - t * t;
        cplx value = (2.0 * p1.y * p2.y + kernel_f_poly(kk.Q, p1.x, p2.x)) /
                     (4.0 * p1.y * p2.y * dx * dx);
        if (kk.genus > 0) {
            const std::vector<cplx> v1 = normalized_dx(m, val, kk.C, p1);
            const std::vector<cplx> v2 = normalized_dx(m, val, kk.C, p2);
            for (int i = 0; i < kk.genus; ++i)
                for (int j = 0; j < kk.genus; ++j)
                    value += kk.kappa(i, j) * v1[size_t(i)] * v2[size_t(j)];
        }
        // dx = 2 q dq in each slot converts the dx1 dx2 coefficient.
        return value * (2.0 * s) * (2.0 * t);
    };
}

KernelSampler make_theta_sampler(const ThetaKernel& tk, const CurveModel& m,
                                 const CurveValidation& val, const SymplecticFrame& fr,
                                 const PeriodData& pd, const std::vector<LocalFrame>& frames,
                                 double tol) {
    const int g = static_cast<int>(pd.tau.rows());
    const int nr = static_cast<int>(frames.size());

    // Per frame: normalized-differential dq-series and their primitives, so
    // the Abel map along the frame disk is a series evaluation.
    auto omega = std::make_shared<std::vector<std::vector<PowerSeries>>>();
    auto prim = std::make_shared<std::vector<std::vector<PowerSeries>>>();
    for (int a = 0; a < nr; ++a) {
        std::vector<PowerSeries> oa, pa;
        for (int i = 0; i < g; ++i) {
            PowerSeries w(std::vector<cplx>(size_t(frames[size_t(a)].raw_omega[0].size()), 0.0));
            for (int k = 0; k < int(frames[size_t(a)].raw_omega.size()); ++k)
                w = w + frames[size_t(a)].raw_omega[size_t(k)] * pd.C(k, i);
            pa.push_back(w.integral());
            oa.push_back(std::move(w));
        }
        omega->push_back(std::move(oa));
        prim->push_back(std::move(pa));
    }

    // Anchor Abel values at a real positive coordinate on each disk.
    auto rho = std::make_shared<std::vector<double>>();
    auto base = std::make_shared<std::vector<Eigen::VectorXcd>>();
    for (int a = 0; a < nr; ++a) rho->push_back(0.5 * frames[size_t(a)].q_radius);
    const CurvePoint anchor0 = frames[0].point(m, (*rho)[0]);
    for (int a = 0; a < nr; ++a) {
        if (a == 0) {
            base->push_back(Eigen::VectorXcd::Zero(g));
            continue;
        }
        const CurvePoint pa = frames[size_t(a)].point(m, (*rho)[size_t(a)]);
        base->push_back(abel_map(m, val, fr, pd, pa, anchor0, tol));
    }

    ThetaContext ctx = tk.ctx;
    return [ctx, g, omega, prim, rho, base](int a, int b, cplx s, cplx t) -> cplx {
        Eigen::VectorXcd z(g);
        for (int i = 0; i < g; ++i) {
            const cplx ua = (*prim)[size_t(a)][size_t(i)].eval(s) -
                            (*prim)[size_t(a)][size_t(i)].eval((*rho)[size_t(a)]);
            const cplx ub = (*prim)[size_t(b)][size_t(i)].eval(t) -
                            (*prim)[size_t(b)][size_t(i)].eval((*rho)[size_t(b)]);
            z[i] = (*base)[size_t(a)][i] - (*base)[size_t(b)][i] + ua - ub;
        }
        const Eigen::MatrixXcd H = theta_log_hessian(ctx, z);
        cplx acc = 0.0;
        for (int i = 0; i < g; ++i)
            for (int j = 0; j < g; ++j)
                acc += H(i, j) * (*omega)[size_t(a)][size_t(i)].eval(s) *
                       (*omega)[size_t(b)][size_t(j)].eval(t);
        return ctx.sign * acc;
    };
}

namespace {

// Taylor coefficients 0..order of a function sampled on the circle |s| = r.
// Direct trigonometric sums; N is chosen with enough margin that aliasing
// from orders >= N is negligible at the sampling radii.
Eigen::MatrixXcd circle_coeffs(const std::vector<std::vector<cplx>>& V, double ra, double rb,
                               int order) {
    const int N = static_cast<int>(V.size());
    Eigen::MatrixXcd row(N, order + 1);
    for (int j = 0; j < N; ++j)
        for (int l = 0; l <= order; ++l) {
            cplx acc = 0.0;
            for (int k = 0; k < N; ++k)
                acc += V[size_t(j)][size_t(k)] * std::exp(-TWO_PI_I * double(k * l) / double(N));
            row(j, l) = acc / (double(N) * std::pow(rb, l));
        }
    Eigen::MatrixXcd out(order + 1, order + 1);
    for (int mth = 0; mth <= order; ++mth)
        for (int l = 0; l <= order; ++l) {
            cplx acc = 0.0;
            for (int j = 0; j < N; ++j)
                acc += row(j, l) * std::exp(-TWO_PI_I * double(j * mth) / double(N));
            out(mth, l) = acc / (double(N) * std::pow(ra, mth));
        }
    return out;
}

} // namespace

BergmanJets bergman_jets(const CurveModel& m, const CurveValidation& val,
                         const std::vector<LocalFrame>& frames, const Eigen::MatrixXcd& C,
                         const KernelSampler& S, int order, double radius_frac) {
    const int nr = static_cast<int>(frames.size());
    const int g = static_cast<int>(C.cols());
    BergmanJets J;
    J.order = order;
    J.n_ram = nr;

    int N = 64;
    while (N < 2 * order + 10) N *= 2;

    // Sampling radii of block (a, b).  On the diagonal the radii must stay
    // comparable (the regular part is obtained by subtracting the double
    // pole) but distinct, so the grids never collide.
    auto radii = [&](int a, int b) {
        const double ra = radius_frac * frames[size_t(a)].q_radius;
        const double rb =
            (a == b) ? 0.8 * ra : 0.978 * radius_frac * frames[size_t(b)].q_radius;
        return std::pair<double, double>{ra, rb};
    };

    // Every (a, b) block is sampled independently (different radii and grid
    // points for (b, a)), so the symmetry comparison below is a genuine
    // numerical check, not a tautology.
    J.T.assign(size_t(nr), std::vector<Eigen::MatrixXcd>(size_t(nr)));
    for (int a = 0; a < nr; ++a)
        for (int b = 0; b < nr; ++b) {
            const auto [ra, rb] = radii(a, b);
            std::vector<std::vector<cplx>> V(static_cast<size_t>(N),
                                             std::vector<cplx>(static_cast<size_t>(N)));
            for (int j = 0; j < N; ++j) {
                const cplx s = ra * std::exp(TWO_PI_I * double(j) / double(N));
                for (int k = 0; k < N; ++k) {
                    const cplx t = rb * std::exp(TWO_PI_I * double(k) / double(N));
                    cplx v = S(a, b, s, t);
                    if (a == b) v -= 1.0 / ((s - t) * (s - t)); // keep the regular part
                    V[size_t(j)][size_t(k)] = v;
                }
            }
            J.T[size_t(a)][size_t(b)] = circle_coeffs(V, ra, rb, order);
        }

    // Verify the two-slot symmetry T[a][b](m,l) = T[b][a](l,m), then enforce
    // it exactly by averaging.  Reading the coefficient (m, l) off circles of
    // radii (r1, r2) amplifies pointwise sampling noise by r1^-m r2^-l, so
    // the per-entry tolerance follows that noise model; structural symmetry
    // bugs produce deviations on the scale of the coefficients themselves.
    for (int a = 0; a < nr; ++a)
        for (int b = a; b < nr; ++b) {
            const Eigen::MatrixXcd M1 = J.T[size_t(a)][size_t(b)];
            const Eigen::MatrixXcd M2 = J.T[size_t(b)][size_t(a)].transpose();
            const double scale = std::max(1.0, M1.cwiseAbs().maxCoeff());
            const auto [r1a, r1b] = radii(a, b);
            const auto [r2a, r2b] = radii(b, a);
            for (int mm = 0; mm <= order; ++mm)
                for (int l = 0; l <= order; ++l) {
                    const double amp = std::pow(r1a, -mm) * std::pow(r1b, -l) +
                                       std::pow(r2a, -l) * std::pow(r2b, -mm);
                    const double tol = 1e-8 * scale + 1e-12 * amp;
                    if (std::abs(M1(mm, l) - M2(mm, l)) > tol)
                        throw NonSymmetricResultError(
                            "kernel jet violates two-slot symmetry beyond tolerance");
                }
            const Eigen::MatrixXcd avg = 0.5 * (M1 + M2);
            J.T[size_t(a)][size_t(b)] = avg;
            J.T[size_t(b)][size_t(a)] = avg.transpose();
        }

    // Normalized differential jets.
    J.omega.assign(size_t(nr), {});
    for (int a = 0; a < nr; ++a)
        for (int i = 0; i < g; ++i) {
            PowerSeries w(std::vector<cplx>(size_t(frames[size_t(a)].raw_omega[0].size()), 0.0));
            for (int k = 0; k < int(frames[size_t(a)].raw_omega.size()); ++k)
                w = w + frames[size_t(a)].raw_omega[size_t(k)] * C(k, i);
            J.omega[size_t(a)].push_back(std::move(w));
        }

    // Projective constant by Richardson extrapolation of the two-point
    // stencil E(h) = 6 (B(s,t) (s-t)^2 - 1) / (s-t)^2 ~ SB + O(h^2) along
    // (s, t) = h * (1, -e^{0.3i}); the tilt keeps the two points over
    // distinct base values, where the closed-form evaluators are regular.
    // Pointwise kernel values near a ramification point carry cancellation
    // noise: machine eps / h^4 for closed-form samplers, and for samplers
    // whose points flow through quadrature-anchored maps the 1/(s-t)^2 pole
    // turns the map's accuracy floor into a 1/h^3 error in E.  The base step
    // therefore stays a sizable fraction of the frame radius, the structural
    // comparison uses the first Richardson level (built from the two largest,
    // least noisy steps), and the tolerances are set to catch O(1) defects
    // (wrong sign, factor, or pole normalization) rather than to re-certify
    // the sampler's last digits.  The stored value is 6 * H(0,0) from the
    // tensor.
    for (int a = 0; a < nr; ++a) {
        const double h0 = 8e-2 * frames[size_t(a)].q_radius;
        const cplx tdir = -std::exp(cplx{0.0, 0.3});
        auto E = [&](double h) -> cplx {
            const cplx s{h, 0.0};
            const cplx t = h * tdir;
            const cplx b = S(a, a, s, t);
            const cplx d2 = (s - t) * (s - t);
            return 6.0 * (b * d2 - 1.0) / d2;
        };
        const cplx e0 = E(h0), e1 = E(0.5 * h0), e2 = E(0.25 * h0);
        if (!std::isfinite(std::abs(e0)) || !std::isfinite(std::abs(e1)) ||
            !std::isfinite(std::abs(e2)))
            throw ExtrapolationError("projective-constant stencil returned a non-finite value");
        const cplx r1 = (4.0 * e1 - e0) / 3.0;
        const cplx r2 = (4.0 * e2 - e1) / 3.0;
        if (std::abs(r2 - r1) > 5e-4 * std::max(1.0, std::abs(r1)))
            throw ExtrapolationError("projective-constant stencil did not converge at h^2 rate");
        const cplx sb_tensor = 6.0 * J.T[size_t(a)][size_t(a)](0, 0);
        if (std::abs(r1 - sb_tensor) > 2e-4 * std::max(1.0, std::abs(sb_tensor)))
            throw ExtrapolationError("projective constant disagrees between stencil and jet tensor");
        J.SB.push_back(sb_tensor);
    }
    return J;
}

namespace {

// --- Two-variable truncated series on the square window 0..W per slot. ---
// Entry (m, l) is the coefficient of s^m t^l.  Products and reciprocals only
// read entries of lower or equal index, so a trusted square stays trusted.

Eigen::MatrixXcd ts_zero(int W) { return Eigen::MatrixXcd::Zero(W + 1, W + 1); }

void ts_add_outer(Eigen::MatrixXcd& M, const std::vector<cplx>& a, const std::vector<cplx>& b,
                  cplx c) {
    const int W = static_cast<int>(M.rows()) - 1;
    for (int i = 0; i <= W; ++i) {
        const cplx ai = (i < int(a.size())) ? a[size_t(i)] : cplx{0.0};
        if (ai == cplx{0.0}) continue;
        for (int j = 0; j <= W; ++j) {
            const cplx bj = (j < int(b.size())) ? b[size_t(j)] : cplx{0.0};
            M(i, j) += c * ai * bj;
        }
    }
}

Eigen::MatrixXcd ts_mul(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
    const int W = static_cast<int>(A.rows()) - 1;
    Eigen::MatrixXcd M = ts_zero(W);
    for (int m = 0; m <= W; ++m)
        for (int l = 0; l <= W; ++l) {
            cplx acc = 0.0;
            for (int p = 0; p <= m; ++p)
                for (int q = 0; q <= l; ++q) acc += A(p, q) * B(m - p, l - q);
            M(m, l) = acc;
        }
    return M;
}

Eigen::MatrixXcd ts_recip(const Eigen::MatrixXcd& D) {
    const int W = static_cast<int>(D.rows()) - 1;
    if (std::abs(D(0, 0)) == 0.0)
        throw IllConditionedError("two-variable series reciprocal needs a nonzero constant term");
    Eigen::MatrixXcd R = ts_zero(W);
    R(0, 0) = 1.0 / D(0, 0);
    for (int m = 0; m <= W; ++m)
        for (int l = 0; l <= W; ++l) {
            if (m == 0 && l == 0) continue;
            cplx acc = 0.0;
            for (int p = 0; p <= m; ++p)
                for (int q = 0; q <= l; ++q) {
                    if (p == 0 && q == 0) continue;
                    acc += D(p, q) * R(m - p, l - q);
                }
            R(m, l) = -acc / D(0, 0);
        }
    return R;
}

// Exact division by (s + sigma*t)^2 with sigma = ±1.  The quotient is trusted
// on the anti-triangle m + l <= W - 2; entries beyond it are left as produced
// and never read by callers that respect the shrinking window.  Divisibility
// is verified by reconstructing the two lowest rows of divisor * quotient.
Eigen::MatrixXcd ts_divide_quad(const Eigen::MatrixXcd& A, double sigma) {
    const int W = static_cast<int>(A.rows()) - 1;
    Eigen::MatrixXcd H = ts_zero(W);
    for (int l = 0; l <= W; ++l)
        for (int m = W; m >= 0; --m) {
            const cplx a = (m + 2 <= W) ? A(m + 2, l) : cplx{0.0};
            const cplx h1 = (m + 1 <= W && l >= 1) ? H(m + 1, l - 1) : cplx{0.0};
            const cplx h2 = (m + 2 <= W && l >= 2) ? H(m + 2, l - 2) : cplx{0.0};
            H(m, l) = a - 2.0 * sigma * h1 - h2;
        }
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    for (int l = 0; l <= W - 4; ++l) {
        const cplx r0 = (l >= 2 ? H(0, l - 2) : cplx{0.0});
        const cplx r1 = 2.0 * sigma * (l >= 1 ? H(0, l - 1) : cplx{0.0}) +
                        (l >= 2 ? H(1, l - 2) : cplx{0.0});
        if (std::abs(A(0, l) - r0) > 1e-9 * scale || std::abs(A(1, l) - r1) > 1e-9 * scale)
            throw IllConditionedError("double-pole division: numerator was not exactly divisible");
    }
    return H;
}

} // namespace

BergmanJets klein_jets(const CurveModel& m, const CurveValidation& val,
                       const std::vector<LocalFrame>& frames, const KleinKernel& kk, int order) {
    if (m.mode != CurveMode::Hyperelliptic)
        throw ModeError("series-route jets require the algebraic kernel (hyperelliptic models)");
    const int nr = static_cast<int>(frames.size());
    const int g = static_cast<int>(kk.C.cols());
    const int Wd = 2 * order + 4;            // diagonal window (two exact divisions)
    const int Wc = std::max(order, 4);       // cross window
    for (const LocalFrame& fr : frames) {
        if (fr.y.size() < Wd + 2)
            throw JetOrderError("frame series too short for the requested jet order");
        if (g > 0 && int(fr.raw_omega[0].size()) < order + 1)
            throw JetOrderError("differential series too short for the requested jet order");
    }

    BergmanJets J;
    J.order = order;
    J.n_ram = nr;

    // Normalized differential jets (needed below for the correction term).
    J.omega.assign(size_t(nr), {});
    for (int a = 0; a < nr; ++a)
        for (int i = 0; i < g; ++i) {
            PowerSeries w(std::vector<cplx>(size_t(frames[size_t(a)].raw_omega[0].size()), 0.0));
            for (int k = 0; k < int(frames[size_t(a)].raw_omega.size()); ++k)
                w = w + frames[size_t(a)].raw_omega[size_t(k)] * kk.C(k, i);
            J.omega[size_t(a)].push_back(std::move(w));
        }

    // Powers of x(s) = x_a + s^2 as exact polynomial coefficient vectors.
    const int top = kk.Q.degree() / 2 + 1;
    auto x_powers = [&](int a, int W) {
        std::vector<std::vector<cplx>> xp(size_t(top + 2), std::vector<cplx>(size_t(W + 1), 0.0));
        xp[0][0] = 1.0;
        for (int i = 0; i <= top; ++i)
            for (int k = 0; k <= W; ++k) {
                cplx v = frames[size_t(a)].x0 * xp[size_t(i)][size_t(k)];
                if (k >= 2) v += xp[size_t(i)][size_t(k - 2)];
                xp[size_t(i + 1)][size_t(k)] = v;
            }
        return xp;
    };

    // Numerator N(s, t) = 2 y_a(s) y_b(t) + F(x_a(s), x_b(t)) as a 2D series.
    auto numerator = [&](int a, int b, const std::vector<std::vector<cplx>>& xa,
                         const std::vector<std::vector<cplx>>& xb, int W) {
        Eigen::MatrixXcd N = ts_zero(W);
        ts_add_outer(N, frames[size_t(a)].y.coeffs(), frames[size_t(b)].y.coeffs(), 2.0);
        for (int i = 0; i <= top; ++i) {
            ts_add_outer(N, xa[size_t(i)], xb[size_t(i)], 2.0 * kk.Q.coeff(2 * i));
            const cplx lo = kk.Q.coeff(2 * i + 1);
            if (lo != cplx{0.0}) {
                ts_add_outer(N, xa[size_t(i + 1)], xb[size_t(i)], lo);
                ts_add_outer(N, xa[size_t(i)], xb[size_t(i + 1)], lo);
            }
        }
        return N;
    };

    // u(s) = y(s)/s, the odd-series cofactor with u(0) = y'(0) != 0.
    auto u_series = [&](int a, int W) {
        std::vector<cplx> u(size_t(W + 1), 0.0);
        for (int k = 0; k <= W; ++k) u[size_t(k)] = frames[size_t(a)].y[k + 1];
        return u;
    };

    J.T.assign(size_t(nr), std::vector<Eigen::MatrixXcd>(size_t(nr)));
    for (int a = 0; a < nr; ++a) {
        // Diagonal: H = [N/(u(s)u(t)) - (s+t)^2] / ((s-t)^2 (s+t)^2).
        const auto xa = x_powers(a, Wd);
        const auto ua = u_series(a, Wd);
        Eigen::MatrixXcd UU = ts_zero(Wd);
        ts_add_outer(UU, ua, ua, 1.0);
        Eigen::MatrixXcd A = ts_mul(numerator(a, a, xa, xa, Wd), ts_recip(UU));
        A(2, 0) -= 1.0;
        A(1, 1) -= 2.0;
        A(0, 2) -= 1.0;
        Eigen::MatrixXcd H =
            ts_divide_quad(ts_divide_quad(A, +1.0), -1.0).topLeftCorner(order + 1, order + 1);
        for (int i = 0; i < g; ++i)
            for (int j = 0; j < g; ++j)
                ts_add_outer(H, J.omega[size_t(a)][size_t(i)].coeffs(),
                             J.omega[size_t(a)][size_t(j)].coeffs(), kk.kappa(i, j));
        J.T[size_t(a)][size_t(a)] = 0.5 * (H + H.transpose().eval());
    }
    for (int a = 0; a < nr; ++a)
        for (int b = a + 1; b < nr; ++b) {
            // Cross block: N / (u_a(s) u_b(t) (dx + s^2 - t^2)^2), dx = x_a - x_b.
            const auto xa = x_powers(a, Wc);
            const auto xb = x_powers(b, Wc);
            const cplx dx = frames[size_t(a)].x0 - frames[size_t(b)].x0;
            Eigen::MatrixXcd D = ts_zero(Wc);
            ts_add_outer(D, u_series(a, Wc), u_series(b, Wc), 1.0);
            Eigen::MatrixXcd D2 = ts_zero(Wc);
            D2(0, 0) = dx * dx;
            D2(2, 0) = 2.0 * dx;
            D2(0, 2) = -2.0 * dx;
            D2(4, 0) = 1.0;
            D2(2, 2) = -2.0;
            D2(0, 4) = 1.0;
            Eigen::MatrixXcd T = ts_mul(numerator(a, b, xa, xb, Wc), ts_recip(ts_mul(D, D2)))
                                     .topLeftCorner(order + 1, order + 1);
            for (int i = 0; i < g; ++i)
                for (int j = 0; j < g; ++j)
                    ts_add_outer(T, J.omega[size_t(a)][size_t(i)].coeffs(),
                                 J.omega[size_t(b)][size_t(j)].coeffs(), kk.kappa(i, j));
            J.T[size_t(a)][size_t(b)] = T;
            J.T[size_t(b)][size_t(a)] = T.transpose();
        }

    // Projective constant: exact from the series, cross-checked against the
    // pointwise two-point stencil, which exercises the closed-form evaluator
    // and the frame points rather than the series arithmetic.
    const KernelSampler S = make_klein_sampler(kk, m, val, frames);
    for (int a = 0; a < nr; ++a) {
        const cplx sb = 6.0 * J.T[size_t(a)][size_t(a)](0, 0);
        const double h0 = 8e-2 * frames[size_t(a)].q_radius;
        const cplx tdir = -std::exp(cplx{0.0, 0.3});
        auto E = [&](double h) -> cplx {
            const cplx s{h, 0.0};
            const cplx t = h * tdir;
            const cplx d2 = (s - t) * (s - t);
            return 6.0 * (S(a, a, s, t) * d2 - 1.0) / d2;
        };
        const cplx e0 = E(h0), e1 = E(0.5 * h0), e2 = E(0.25 * h0);
        const cplx rich = (16.0 * (4.0 * e2 - e1) / 3.0 - (4.0 * e1 - e0) / 3.0) / 15.0;
        if (!std::isfinite(std::abs(rich)) ||
            std::abs(rich - sb) > 1e-5 * std::max(1.0, std::abs(sb)))
            throw ExtrapolationError("projective constant disagrees between stencil and series");
        J.SB.push_back(sb);
    }
    return J;
}

} // namespace skrec
