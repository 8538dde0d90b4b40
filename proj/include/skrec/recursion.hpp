#ifndef SKREC_RECURSION_HPP
#define SKREC_RECURSION_HPP

#include <functional>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "skrec/bergman.hpp"
#include "skrec/curves.hpp"
#include "skrec/series.hpp"

namespace skrec {

// ---------------------------------------------------------------------------
// Correlation differentials by residue recursion.
//
// A correlator W^{(g)}_n is stored as a symmetric tensor over a finite basis
// of elementary differentials xi_{a,k}: the differential whose only pole sits
// at ramification point a, of order 2k+2, with principal part
// (2k+1) s^{-(2k+2)} ds in the local frame coordinate and vanishing residue
// and a-periods.  Equivalently, xi_{a,k}(p) is the coefficient of s^{2k} in
// the expansion of the symmetric kernel B(p, .) at frame a; the jet tensors
// carry exactly these expansions, so the recursion closes on finitely many
// coefficients per order.
// ---------------------------------------------------------------------------

// Highest basis index k that can appear in a slot of W^{(g)}_n.
int correlator_kcap(int g, int n);

struct Correlator {
    int g = 0;
    int n = 0;
    int n_ram = 0;
    int kcap = -1;            // -1 encodes an identically zero correlator
    std::vector<cplx> c;      // flat symmetric tensor, slot-major, size D()^n
    double asymmetry = 0.0;   // largest deviation removed by symmetrization

    // Number of basis differentials per slot.
    int D() const { return kcap < 0 ? 0 : n_ram * (kcap + 1); }
    int slot(int a, int k) const { return a * (kcap + 1) + k; }
    int a_of(int s) const { return s / (kcap + 1); }
    int k_of(int s) const { return s % (kcap + 1); }

    long long flat(const std::vector<int>& slots) const;
    cplx coeff(const std::vector<int>& slots) const;
    double max_abs() const;
};

// Pointwise kernel evaluator: B as a dx1 dx2 coefficient at two points.
using KernelEval = std::function<cplx(const CurvePoint&, const CurvePoint&)>;

// xi_{a,2k}(p) for k = 0..kmax as dx_p coefficients, by circle quadrature of
// B(p, .) around the frame center.  The point p must stay away from the
// sampling circle (radius half the frame trust radius).
std::vector<cplx> xi_moments(const CurveModel& m, const LocalFrame& fr, const KernelEval& B,
                             const CurvePoint& p, int kmax, int samples = 128);

// Contracts a correlator tensor with xi values at the given points; returns
// the scalar coefficient relative to dx_1 ... dx_n.  A zero correlator
// (kcap < 0) evaluates to zero.
cplx correlator_eval(const CurveModel& m, const std::vector<LocalFrame>& frames,
                     const KernelEval& B, const Correlator& W,
                     const std::vector<CurvePoint>& pts, int samples = 128);

// The two base cases of the recursion.  W^{(0)}_1 vanishes identically and is
// represented by an empty tensor; W^{(0)}_2 is the symmetric kernel itself and
// deliberately stays in kernel form (it is not an element of the xi basis).
struct RecursionBase {
    Correlator w01;            // zero correlator, g = 0, n = 1
    const BergmanJets* w02;    // the kernel jets standing in for W^{(0)}_2
};
RecursionBase recursion_base(const BergmanJets& jets);

// Residue recursion engine.  Holds the local frames and kernel jets of one
// curve and memoizes every computed correlator.  The store is guarded by a
// mutex so concurrent recurse() calls for distinct keys are safe.
class RecursionEngine {
  public:
    RecursionEngine(CurveModel m, std::vector<LocalFrame> frames, BergmanJets jets);

    // Computes (or fetches) W^{(g)}_n for a stable pair (2g - 2 + n > 0).
    // Throws JetOrderError when the jets are too short for the required
    // basis depth and NonSymmetricResultError when the symmetrization defect
    // exceeds 1e-8 * max(1, max |coefficient|).
    const Correlator& recurse(int g, int n);

    const CurveModel& model() const { return m_; }
    const std::vector<LocalFrame>& frames() const { return frames_; }
    const BergmanJets& jets() const { return jets_; }

  private:
    Correlator compute(int g, int n);
    // Expansion of xi_{a0,k0} in the frame coordinate at ramification point af.
    LaurentBand chart_band(int af, int a0, int k0) const;
    // Bands Sum_slot0 W.c[slot0, rest] * chart(af, slot0), indexed by the flat
    // assignment of the remaining n-1 slots; cached per (g, n, af).
    const std::vector<LaurentBand>& q_chart(const Correlator& W, int af);

    CurveModel m_;
    std::vector<LocalFrame> frames_;
    BergmanJets jets_;
    std::vector<LaurentBand> inv4Y_;  // per frame: 1/(4 Y(s)), Y = (y(s)-y(-s))/(2s)
    std::map<std::pair<int, int>, Correlator> store_;
    std::map<std::vector<int>, std::vector<LaurentBand>> qchart_cache_;
    std::mutex mu_;
};

// Independent closed forms used to cross-check the recursion.  Both are
// evaluated directly from kernel data at the ramification points, without
// running the recursion itself.
//
// W^{(0)}_3(p0,p1,p2) = Sum_a e_{a,0}(p0) e_{a,0}(p1) e_{a,0}(p2) / (2 y'(a)).
cplx w03_eval(const CurveModel& m, const std::vector<LocalFrame>& frames, const KernelEval& B,
              const CurvePoint& p0, const CurvePoint& p1, const CurvePoint& p2);

// W^{(0)}_4 from the double-residue formula: a cross term coupling pairs of
// ramification points through the regularized kernel value B(a,b), plus
// single-point terms carrying the projective constant, y'''/y', and second
// xi moments.
cplx w04_eval(const CurveModel& m, const std::vector<LocalFrame>& frames, const BergmanJets& jets,
              const KernelEval& B, const CurvePoint& p0, const CurvePoint& p1,
              const CurvePoint& p2, const CurvePoint& p3);

} // namespace skrec

#endif // SKREC_RECURSION_HPP
