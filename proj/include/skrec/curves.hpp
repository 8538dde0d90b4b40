#ifndef SKREC_CURVES_HPP
#define SKREC_CURVES_HPP

// Curve models and local frames at simple ramification points.
//
// Two families of explicitly presented spectral curves are supported:
//
//  * hyperelliptic:  y^2 = Q(x),  Q square-free of even degree 2g+2, with the
//    tautological differential theta = y dx.  Every root of Q is a simple
//    ramification point of the double cover x : S -> P^1.
//
//  * tower (two-step): w^2 = f(x) presents a hyperelliptic base of genus
//    g_base, and on top of it y = (-alpha(x)/2 + v)/w with v^2 = R(x),
//    i.e. theta = y dx = (-alpha/2 + v) dx / w.  The covering S -> base is
//    branched where v = 0: each root of R carries two ramification points,
//    one per w-sheet.  With deg R = 2 g_base - 2 (enforced) the total genus
//    is g_S = 4 g_base - 3 and the holomorphic differentials are
//    x^k dx/w (k <= g_base-1) and x^k dx/(w v) (k <= 2 g_base - 2).
//
// At a simple ramification point over x = x_a the local coordinate q is fixed
// by x = x_a + q^2, and all curve data are expanded as truncated power series
// in q.  The branch of q (equivalently of the odd fiber series) is pinned by
// requiring arg y'(0) in (-pi/2, pi/2], ties resolved toward +pi/2, which
// makes every frame reproducible bit-for-bit.

#include <vector>

#include "skrec/poly.hpp"
#include "skrec/series.hpp"

namespace skrec {

enum class CurveMode { Hyperelliptic, Tower };

struct CurveModel {
    CurveMode mode = CurveMode::Hyperelliptic;
    Poly Q;           // hyperelliptic: y^2 = Q(x)
    Poly f, alpha, R; // tower: w^2 = f(x), v^2 = R(x), theta = (-alpha/2 + v) dx / w
    double separation_floor = 1e-6; // relative minimal distance between branch x-values

    static CurveModel hyperelliptic(Poly Q_) {
        CurveModel m;
        m.mode = CurveMode::Hyperelliptic;
        m.Q = std::move(Q_);
        return m;
    }
    static CurveModel tower(Poly f_, Poly alpha_, Poly R_) {
        CurveModel m;
        m.mode = CurveMode::Tower;
        m.f = std::move(f_);
        m.alpha = std::move(alpha_);
        m.R = std::move(R_);
        return m;
    }
};

// A point on the curve.  Hyperelliptic points carry (x, y); tower points
// carry (x, w, v) and derive y = (-alpha/2 + v)/w.
struct CurvePoint {
    cplx x{0.0};
    cplx y{0.0};
    cplx w{0.0};
    cplx v{0.0};
};

struct RamificationPoint {
    int index = 0;   // position in the deterministic frame ordering
    cplx x;          // base x-coordinate
    cplx w0;         // tower: w-sheet value at the point; hyperelliptic: 0
    cplx yprime;     // y'(0) of the branch-fixed local frame
};

struct CurveValidation {
    int genus = 0;                          // genus of the spectral curve S
    int base_genus = 0;                     // tower: genus of the base; else 0
    std::vector<cplx> branch_x;             // all branch x-values relevant to path planning
    std::vector<RamificationPoint> ramification;
    double min_separation = 0.0;            // smallest pairwise |x_i - x_j| over branch_x
    double x_scale = 1.0;                   // max(1, max |branch x|)
    int n_raw_differentials = 0;            // == genus
};

// Checks degrees, root simplicity and separations; returns the ramification
// data in a deterministic order.  Throws DegreeError / RootSeparationError.
CurveValidation validate_curve(const CurveModel& m);

// Local series frame at one ramification point, all series in q with
// x = x_a + q^2.
struct LocalFrame {
    int index = 0;
    cplx x0;                 // x_a
    cplx w_sign;             // tower: +1/-1 marking the w-sheet; hyperelliptic: 0
    PowerSeries y;           // y(q); odd part drives the recursion kernel
    PowerSeries w, v;        // tower only
    std::vector<PowerSeries> raw_omega; // coefficient of dq of each raw differential
    double q_radius = 0.0;   // safe sampling radius in the q-plane

    cplx yprime() const { return y[1]; }
    cplx y3() const { return y[3]; }

    // Point on the curve at local coordinate s (|s| <= q_radius): the fiber is
    // solved exactly and snapped to the branch the series predicts, so sample
    // points keep full precision at finite radius.
    CurvePoint point(const CurveModel& m, cplx s) const;

    // d x / d q at s
    cplx dxds(cplx s) const { return 2.0 * s; }
};

// Frames for every ramification point, series truncated at `order`
// coefficients (q^0 .. q^{order-1}).
std::vector<LocalFrame> local_frames(const CurveModel& m, const CurveValidation& val,
                                     int order);

// Values of all raw differentials at a point, as coefficients of dx.
// Hyperelliptic: x^k/y, k = 0..g-1.  Tower: x^k/w (k <= g_base-1) then
// x^k/(w v) (k <= 2 g_base - 2).
std::vector<cplx> raw_differentials_dx(const CurveModel& m, const CurveValidation& val,
                                       const CurvePoint& p);

// Coefficient of dx of the tautological differential theta = y dx.
inline cplx theta_dx(const CurvePoint& p) { return p.y; }

} // namespace skrec

#endif // SKREC_CURVES_HPP
