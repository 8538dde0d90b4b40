#ifndef SKREC_BERGMAN_HPP
#define SKREC_BERGMAN_HPP

// The Bergman kernel B(p1, p2): the unique symmetric bidifferential with a
// double pole of biresidue 1 on the diagonal, no other poles, and vanishing
// a-periods in either slot.  Two independent evaluation routes are kept:
//
//  * an algebraic route for hyperelliptic models (rational kernel built from
//    the defining polynomial, plus a holomorphic correction solved from the
//    a-period conditions), and
//  * a transcendental route through second log-derivatives of an odd theta
//    function composed with the Abel map, valid for every model.
//
// Cross-checking the two routes at random point pairs is one of the standing
// validation gates; neither route is ever expressed in terms of the other.
//
// Downstream consumers (recursion, special-geometry residues) never evaluate
// B at raw curve points; they read Taylor data of B in the local frames at
// the ramification points.  `bergman_jets` extracts that data from whichever
// route is natural for the model, through a shared sampling interface.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "skrec/curves.hpp"
#include "skrec/homology.hpp"
#include "skrec/periods.hpp"
#include "skrec/series.hpp"
#include "skrec/theta.hpp"

namespace skrec {

// ---------------------------------------------------------------------------
// Algebraic route (hyperelliptic).
// ---------------------------------------------------------------------------

struct KleinKernel {
    Poly Q;                  // the defining polynomial of y^2 = Q(x)
    Eigen::MatrixXcd C;      // raw -> normalized coefficients (copied from PeriodData)
    Eigen::MatrixXcd kappa;  // symmetric correction in the normalized basis
    int genus = 0;

    // B as a dx1 dx2 coefficient at two distinct points off the branch locus.
    cplx eval_dx(const CurveModel& m, const CurveValidation& val, const CurvePoint& p1,
                 const CurvePoint& p2) const;
};

// Builds the rational kernel and solves the holomorphic correction from the
// vanishing of all a-periods, sampled at genus+2 probe points in the second
// slot.  Throws CorrectionRankError when the probe system is rank-deficient
// or the solved correction fails the symmetry/residual checks.
KleinKernel make_klein_kernel(const CurveModel& m, const CurveValidation& val,
                              const SymplecticFrame& fr, const PeriodData& pd,
                              double tol = 1e-11);

// ---------------------------------------------------------------------------
// Transcendental route (any model).
// ---------------------------------------------------------------------------

struct ThetaKernel {
    ThetaContext ctx;        // odd characteristic, cached lattice, empirical sign
};

// Selects the odd characteristic, then fixes the overall sign of the kernel
// formula empirically from the diagonal normalization (biresidue +1) at a
// generic point; the sign is stored in the context.
ThetaKernel make_theta_kernel(const CurveModel& m, const CurveValidation& val,
                              const SymplecticFrame& fr, const PeriodData& pd,
                              double tol = 1e-12);

// B as a dx1 dx2 coefficient; Abel maps are computed per call (quadrature),
// so this is the slow reference evaluator used by validation.
cplx theta_kernel_eval_dx(const ThetaKernel& tk, const CurveModel& m,
                          const CurveValidation& val, const SymplecticFrame& fr,
                          const PeriodData& pd, const CurvePoint& p1, const CurvePoint& p2,
                          double tol = 1e-12);

// ---------------------------------------------------------------------------
// Frame jets.
// ---------------------------------------------------------------------------

// Samples B as a dq_a dq_b coefficient at local frame coordinates (s, t) of
// ramification frames a and b.  Implementations exist for both routes; the
// jet extraction below is route-agnostic.  The factories below may borrow
// their arguments by reference: keep the kernel, model, and frames alive for
// the lifetime of the sampler.
using KernelSampler = std::function<cplx(int a, int b, cplx s, cplx t)>;

KernelSampler make_klein_sampler(const KleinKernel& kk, const CurveModel& m,
                                 const CurveValidation& val,
                                 const std::vector<LocalFrame>& frames);

// Fast theta-route sampler: the Abel map along each frame disk is the
// termwise integral of the normalized-differential series, anchored by one
// quadrature per frame, so per-sample cost is a theta evaluation only.
KernelSampler make_theta_sampler(const ThetaKernel& tk, const CurveModel& m,
                                 const CurveValidation& val, const SymplecticFrame& fr,
                                 const PeriodData& pd, const std::vector<LocalFrame>& frames,
                                 double tol = 1e-12);

struct BergmanJets {
    int order = 0;  // trusted dq order per slot (coefficients 0..order)
    int n_ram = 0;
    // T[a][b](m, l) = coefficient of s^m t^l of B in frames (a, b); on the
    // diagonal a == b this is the regular part H = B - 1/(s-t)^2.
    std::vector<std::vector<Eigen::MatrixXcd>> T;
    // omega[a][i]: dq-series of the i-th normalized differential at frame a.
    std::vector<std::vector<PowerSeries>> omega;
    // Projective constant of B at each ramification point: the double of the
    // diagonal regular part, SB[a] = 6 * H^{(a)}(0, 0), taken from the tensor
    // and cross-checked against a Richardson-extrapolated two-point stencil
    // evaluated pointwise off the anti-diagonal.
    std::vector<cplx> SB;

    const Eigen::MatrixXcd& tensor(int a, int b) const { return T[size_t(a)][size_t(b)]; }
    cplx cross_value(int a, int b) const { return T[size_t(a)][size_t(b)](0, 0); }
};

// Extracts frame jets of B by sampling the kernel on product circles of
// radius radius_frac * q_radius in the local coordinates and reading Taylor
// coefficients off the trigonometric sums.  Works for any sampler, but the
// coefficient (m, l) carries sampling noise amplified by the radii to the
// power -(m + l); high-order production jets on hyperelliptic models should
// come from klein_jets below, which has no such floor.  Two-slot symmetry is
// verified against that noise model and then enforced exactly; the projective
// constant must agree with a pointwise Richardson stencil or
// ExtrapolationError is thrown.
BergmanJets bergman_jets(const CurveModel& m, const CurveValidation& val,
                         const std::vector<LocalFrame>& frames, const Eigen::MatrixXcd& C,
                         const KernelSampler& S, int order = 12, double radius_frac = 0.45);

// Frame jets of the algebraic kernel by exact two-variable series arithmetic
// (no sampling): the rational kernel is expanded from the frame series of y,
// the double pole is divided out coefficient-by-coefficient, and the
// holomorphic correction is added as an outer product.  Coefficients are
// accurate to roundoff at every order.  The frames must carry series of
// length >= 2*order + 6 or JetOrderError is thrown.
BergmanJets klein_jets(const CurveModel& m, const CurveValidation& val,
                       const std::vector<LocalFrame>& frames, const KleinKernel& kk,
                       int order = 12);

} // namespace skrec

#endif // SKREC_BERGMAN_HPP
