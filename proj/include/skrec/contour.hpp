#ifndef SKREC_CONTOUR_HPP
#define SKREC_CONTOUR_HPP

// Paths in the base x-plane, analytic continuation of fiber data along them,
// and adaptive Gauss-Legendre quadrature of differentials over the lifted
// paths.
//
// Continuation follows the classical predictor/selector scheme: walk the
// path in small steps, linearly predict each fiber value, and pick the
// algebraic candidate nearest the prediction.  A step is accepted only when
// the chosen candidate is closer to the prediction than a quarter of the gap
// to the competing sheet; otherwise the step is halved.  Accepted samples
// form a skeleton that quadrature nodes snap to, so integration and sheet
// tracking never drift apart.

#include <functional>
#include <vector>

#include "skrec/curves.hpp"

namespace skrec {

struct PathSeg {
    enum class Kind { Line, Arc } kind = Kind::Line;
    // line: z(t) = z0 + t (z1 - z0)
    cplx z0, z1;
    // arc: z(t) = center + radius * exp(i((1-t) ang0 + t ang1))
    cplx center;
    double radius = 0.0, ang0 = 0.0, ang1 = 0.0;

    static PathSeg line(cplx a, cplx b);
    static PathSeg arc(cplx center, double radius, double ang0, double ang1);

    cplx at(double t) const;
    cplx tangent(double t) const; // dz/dt
    double length() const;
};

using XPath = std::vector<PathSeg>;

// Straight connection from `from` to `to`, detouring around any obstacle that
// comes within `clearance` of the segment.
XPath route_avoiding(cplx from, cplx to, const std::vector<cplx>& obstacles,
                     double clearance);

// Counterclockwise full circle(s) around `center`, starting at angle ang0.
XPath circle_loop(cplx center, double radius, double ang0, int turns = 1);

XPath concat(const XPath& a, const XPath& b);
XPath reversed(const XPath& p);

// Fiber data over a base point (the parts of a CurvePoint that live on the
// covering: y for hyperelliptic, (w, v) for the tower).
struct Fiber {
    cplx y{0.0};
    cplx w{0.0}, v{0.0};
};

Fiber principal_fiber(const CurveModel& m, cplx x);
Fiber fiber_from_point(const CurveModel& m, const CurvePoint& p);
CurvePoint point_from_fiber(const CurveModel& m, cplx x, const Fiber& f);

// Solves the exact fiber over x and snaps each sheet choice to the branch
// nearest the guess.  Use this when moving a point to a nearby abscissa;
// point_from_fiber alone trusts the caller's fiber values verbatim.
CurvePoint nearest_point(const CurveModel& m, cplx x, const Fiber& guess);
bool same_fiber(const CurveModel& m, const Fiber& a, const Fiber& b);

// A path with its fiber skeleton; provides branch-certified fiber values at
// arbitrary parameters for quadrature.
class ContinuedPath {
  public:
    ContinuedPath(const CurveModel& model, XPath path, Fiber start);

    const XPath& path() const { return path_; }
    const Fiber& start() const { return start_; }
    const Fiber& end() const { return end_; }
    bool closed_lift() const; // path endpoints equal and fiber returns to start

    // Fiber at parameter t of segment k (snapped exactly to the algebraic
    // fiber, branch selected by the skeleton).
    Fiber fiber_at(size_t k, double t) const;

  private:
    const CurveModel* model_; // pointer so lifted paths stay assignable
    XPath path_;
    Fiber start_, end_;
    std::vector<std::vector<std::pair<double, Fiber>>> skel_; // per segment, sorted by t
};

// One continuation step primitive (exposed for tests): continue `start`
// along `path`, returning the fiber above the endpoint.
Fiber continue_sheet(const CurveModel& m, const XPath& path, const Fiber& start);

// Integrand evaluated at a lifted point: returns `dim` coefficient values
// with respect to dx; the quadrature multiplies by dx/dt.
using VectorIntegrand =
    std::function<void(const CurvePoint& p, std::vector<cplx>& out)>;

// Adaptive GL-32 quadrature of a vector of differentials over a lifted path.
// `tol` is an absolute tolerance relative to the accumulated magnitude.
std::vector<cplx> integrate_differentials(const CurveModel& m, const ContinuedPath& cp,
                                          int dim, const VectorIntegrand& f, double tol);

// Convenience: all raw differentials over a lifted path.
std::vector<cplx> integrate_raw(const CurveModel& m, const CurveValidation& val,
                                const ContinuedPath& cp, double tol);

} // namespace skrec

#endif // SKREC_CONTOUR_HPP
