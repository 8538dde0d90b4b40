#include "skrec/theta.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "skrec/errors.hpp"

namespace skrec {

namespace {

// Greatest admissible |c|-weighted norm after argument reduction: the reduced
// z has c = Y^{-1} Im z with every |c_i| <= 1/2, so c^T Y c <= sum|Y_ij|/4.
double reduced_c_norm_bound(const Eigen::MatrixXd& Y) {
    return 0.25 * Y.cwiseAbs().sum() + 1e-12;
}

} // namespace

ThetaContext make_theta_context(const Eigen::MatrixXcd& tau, const Eigen::VectorXd& d1,
                                const Eigen::VectorXd& d2, double tail_tol) {
    const int g = static_cast<int>(tau.rows());
    if (g <= 0 || tau.cols() != g)
        throw IllConditionedError("theta context needs a nonempty square period matrix");

    ThetaContext ctx;
    ctx.tau = tau;
    ctx.d1 = d1;
    ctx.d2 = d2;
    ctx.tail_tol = tail_tol;
    ctx.genus = g;
    ctx.Y = tau.imag();
    ctx.X = tau.real();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ctx.Y);
    const double lam_min = es.eigenvalues().minCoeff();
    if (lam_min <= 0.0)
        throw IllConditionedError("Im(tau) is not positive definite; cannot sum theta series");
    ctx.Yinv = ctx.Y.inverse();

    // Keep every offset u = n + d1 with ||u||_Y <= sqrt(L/pi) + max ||c||_Y,
    // where L = ln(1/tol) + margin; by the triangle inequality every dropped
    // term then satisfies pi ||u + c||_Y^2 > L for all reduced arguments.
    // The margin absorbs the polynomial (2 pi |u|)^2 prefactors of the
    // Hessian terms and the number of boundary points.
    const double margin = 14.0;
    const double L = std::log(1.0 / tail_tol) + margin;
    const double r_keep = std::sqrt(L / PI) + std::sqrt(reduced_c_norm_bound(ctx.Y));
    ctx.radius2 = r_keep * r_keep;

    // Component-wise enclosing box for the ellipsoid u^T Y u <= radius2.
    std::vector<long> lo(g), hi(g);
    double box_count = 1.0;
    for (int i = 0; i < g; ++i) {
        const double half = r_keep * std::sqrt(ctx.Yinv(i, i));
        lo[i] = static_cast<long>(std::floor(-half - d1[i]));
        hi[i] = static_cast<long>(std::ceil(half - d1[i]));
        box_count *= static_cast<double>(hi[i] - lo[i] + 1);
    }
    if (box_count > 8.0e6)
        throw ThetaTruncationError("lattice enumeration box exceeds the point budget; "
                                   "Im(tau) is too ill-scaled for the requested tail tolerance");

    std::vector<Eigen::VectorXd> kept;
    std::vector<long> idx(g);
    for (int i = 0; i < g; ++i) idx[i] = lo[i];
    while (true) {
        Eigen::VectorXd u(g);
        for (int i = 0; i < g; ++i) u[i] = static_cast<double>(idx[i]) + d1[i];
        if (u.dot(ctx.Y * u) <= ctx.radius2) kept.push_back(u);
        int pos = g - 1;
        while (pos >= 0) {
            if (++idx[pos] <= hi[pos]) break;
            idx[pos] = lo[pos];
            --pos;
        }
        if (pos < 0) break;
    }
    if (kept.empty())
        throw ThetaTruncationError("no lattice points survived the ellipsoid cut");

    ctx.pts.resize(static_cast<Eigen::Index>(kept.size()), g);
    for (Eigen::Index r = 0; r < ctx.pts.rows(); ++r) ctx.pts.row(r) = kept[static_cast<size_t>(r)];

    // z-independent exponent pi*i * u^T tau u per cached row.
    ctx.ptsc = ctx.pts.cast<cplx>();
    ctx.expo0 = (PI * I) * (ctx.ptsc * tau).cwiseProduct(ctx.ptsc).rowwise().sum();
    return ctx;
}

ThetaEval theta_eval(const ThetaContext& ctx, const Eigen::VectorXcd& z) {
    const Eigen::Index P = ctx.pts.rows();
    Eigen::VectorXcd zd = z + ctx.d2.cast<cplx>();

    // exponent_r = expo0_r + 2 pi i u_r . (z + d2)
    Eigen::VectorXcd lin = (TWO_PI_I * (ctx.ptsc * zd)).eval();
    Eigen::VectorXcd term(P);
    double scale = 0.0;
    for (Eigen::Index r = 0; r < P; ++r) {
        term[r] = std::exp(ctx.expo0[r] + lin[r]);
        scale += std::abs(term[r]);
    }

    ThetaEval out;
    out.term_scale = scale;
    out.value = term.sum();
    out.grad = TWO_PI_I * (ctx.ptsc.transpose() * term);
    Eigen::MatrixXcd weighted = term.asDiagonal() * ctx.ptsc; // P x g
    out.hess = (TWO_PI_I * TWO_PI_I) * (ctx.ptsc.transpose() * weighted);
    return out;
}

ThetaContext select_odd_characteristic(const Eigen::MatrixXcd& tau, double tail_tol) {
    const int g = static_cast<int>(tau.rows());
    if (g <= 0 || g > 8)
        throw DegenerateCharacteristicError("characteristic search supports genus 1..8");

    const std::uint64_t total = std::uint64_t{1} << (2 * g);
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        // Lexicographic order over the tuple (d1[0..g-1], d2[0..g-1]): the
        // earliest component is the most significant bit of the mask.
        Eigen::VectorXd d1(g), d2(g);
        int parity = 0;
        for (int j = 0; j < 2 * g; ++j) {
            const int bit = static_cast<int>((mask >> (2 * g - 1 - j)) & 1u);
            if (j < g)
                d1[j] = 0.5 * bit;
            else
                d2[j - g] = 0.5 * bit;
        }
        for (int i = 0; i < g; ++i) parity += (d1[i] > 0.25 && d2[i] > 0.25) ? 1 : 0;
        if (parity % 2 == 0) continue; // even characteristic: theta(0) != 0, prime form needs odd

        ThetaContext ctx = make_theta_context(tau, d1, d2, tail_tol);
        ThetaEval at0 = theta_eval(ctx, Eigen::VectorXcd::Zero(g));
        if (at0.grad.norm() > 1e-6) return ctx;
    }
    throw DegenerateCharacteristicError(
        "no odd half-characteristic has a nondegenerate theta gradient at 0");
}

Eigen::MatrixXcd theta_log_hessian(const ThetaContext& ctx, const Eigen::VectorXcd& z) {
    const int g = ctx.genus;
    // Split z = a + tau*b and shift both integer parts into [-1/2, 1/2]; the
    // Hessian of log theta is exactly invariant under z -> z + m + tau*n.
    Eigen::VectorXd b = ctx.Yinv * z.imag();
    Eigen::VectorXd a = z.real() - ctx.X * b;
    Eigen::VectorXd nsh(g), msh(g);
    for (int i = 0; i < g; ++i) {
        nsh[i] = -std::round(b[i]);
        msh[i] = -std::round(a[i]);
    }
    Eigen::VectorXcd zr = z + ctx.tau * nsh.cast<cplx>() + msh.cast<cplx>();

    ThetaEval ev = theta_eval(ctx, zr);
    if (std::abs(ev.value) < 1e-12 * std::max(1.0, ev.term_scale))
        throw DegenerateCharacteristicError(
            "theta vanishes at the reduced argument (point pair on the theta divisor)");
    Eigen::VectorXcd gl = ev.grad / ev.value;
    return ev.hess / ev.value - gl * gl.transpose();
}

} // namespace skrec
