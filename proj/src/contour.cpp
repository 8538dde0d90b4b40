#include "skrec/contour.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "skrec/errors.hpp"

namespace skrec {

PathSeg PathSeg::line(cplx a, cplx b) {
    PathSeg s;
    s.kind = Kind::Line;
    s.z0 = a;
    s.z1 = b;
    return s;
}

PathSeg PathSeg::arc(cplx center, double radius, double ang0, double ang1) {
    PathSeg s;
    s.kind = Kind::Arc;
    s.center = center;
    s.radius = radius;
    s.ang0 = ang0;
    s.ang1 = ang1;
    return s;
}

cplx PathSeg::at(double t) const {
    if (kind == Kind::Line) return z0 + t * (z1 - z0);
    double a = (1.0 - t) * ang0 + t * ang1;
    return center + radius * std::exp(cplx{0.0, a});
}

cplx PathSeg::tangent(double t) const {
    if (kind == Kind::Line) return z1 - z0;
    double a = (1.0 - t) * ang0 + t * ang1;
    return radius * (ang1 - ang0) * cplx{0.0, 1.0} * std::exp(cplx{0.0, a});
}

double PathSeg::length() const {
    if (kind == Kind::Line) return std::abs(z1 - z0);
    return radius * std::abs(ang1 - ang0);
}

namespace {

// An obstacle with the clearance the router owes it.  Obstacles close to an
// endpoint of the overall route cannot be given the full clearance (the path
// must reach that endpoint), so their budget is capped by that distance.
struct RouteObstacle {
    cplx z;
    double clear;
};

XPath route_impl(cplx from, cplx to, const std::vector<RouteObstacle>& obstacles, int depth) {
    if (depth > 16) throw PoleOnPathError("path router could not clear the obstacle field");
    cplx d = to - from;
    double len = std::abs(d);
    if (len < 1e-15) return {};
    // find the obstacle with the deepest clearance violation on the segment
    double worst_viol = 0.0;
    const RouteObstacle* worst = nullptr;
    for (const RouteObstacle& o : obstacles) {
        if (std::abs(o.z - from) < 1e-12 || std::abs(o.z - to) < 1e-12) continue;
        if (std::abs(o.z - from) <= 0.2 * o.clear || std::abs(o.z - to) <= 0.2 * o.clear)
            continue; // hugging an endpoint: the endpoint's own business
        double t = std::clamp((((o.z - from) / d)).real(), 0.0, 1.0);
        cplx c = from + t * d;
        double viol = o.clear - std::abs(o.z - c);
        if (viol > worst_viol) {
            worst_viol = viol;
            worst = &o;
        }
    }
    if (worst == nullptr) return {PathSeg::line(from, to)};
    double t = std::clamp((((worst->z - from) / d)).real(), 0.0, 1.0);
    cplx c = from + t * d;
    cplx n = c - worst->z;
    if (std::abs(n) < 1e-12 * len) n = d * cplx{0.0, 1.0}; // obstacle dead on the line
    n /= std::abs(n);
    // Candidate waypoints on both sides of the blocker at growing clearance
    // multiples; take the first that clears the whole obstacle field so the
    // recursion cannot ping-pong between two nearby obstacles.  If none
    // clears everything, keep the candidate with the best worst-case margin.
    cplx waypoint = worst->z + n * (1.8 * worst->clear);
    double best_margin = -std::numeric_limits<double>::infinity();
    bool clear_found = false;
    for (double mult : {1.8, 2.6, 3.4}) {
        for (double side : {1.0, -1.0}) {
            const cplx cand = worst->z + side * n * (mult * worst->clear);
            double margin = std::numeric_limits<double>::infinity();
            for (const RouteObstacle& o : obstacles)
                margin = std::min(margin, std::abs(o.z - cand) - o.clear);
            if (margin > best_margin) {
                best_margin = margin;
                waypoint = cand;
            }
            if (margin > 0.0) {
                waypoint = cand;
                clear_found = true;
                break;
            }
        }
        if (clear_found) break;
    }
    XPath a = route_impl(from, waypoint, obstacles, depth + 1);
    XPath b = route_impl(waypoint, to, obstacles, depth + 1);
    return concat(a, b);
}

} // namespace

XPath route_avoiding(cplx from, cplx to, const std::vector<cplx>& obstacles,
                     double clearance) {
    std::vector<RouteObstacle> obs;
    obs.reserve(obstacles.size());
    for (cplx o : obstacles) {
        double c = clearance;
        const double df = std::abs(o - from), dt = std::abs(o - to);
        if (df > 1e-14) c = std::min(c, 0.8 * df);
        if (dt > 1e-14) c = std::min(c, 0.8 * dt);
        obs.push_back({o, std::max(c, 1e-3 * clearance)});
    }
    return route_impl(from, to, obs, 0);
}

XPath circle_loop(cplx center, double radius, double ang0, int turns) {
    // quarter arcs keep each segment analytically tame for the quadrature
    XPath p;
    double step = 2.0 * PI * turns / (4.0 * turns);
    for (int k = 0; k < 4 * turns; ++k)
        p.push_back(PathSeg::arc(center, radius, ang0 + k * step, ang0 + (k + 1) * step));
    return p;
}

XPath concat(const XPath& a, const XPath& b) {
    XPath r = a;
    r.insert(r.end(), b.begin(), b.end());
    return r;
}

XPath reversed(const XPath& p) {
    XPath r;
    for (auto it = p.rbegin(); it != p.rend(); ++it) {
        PathSeg s = *it;
        if (s.kind == PathSeg::Kind::Line) std::swap(s.z0, s.z1);
        else std::swap(s.ang0, s.ang1);
        r.push_back(s);
    }
    return r;
}

Fiber principal_fiber(const CurveModel& m, cplx x) {
    Fiber f;
    if (m.mode == CurveMode::Hyperelliptic) {
        f.y = std::sqrt(m.Q.eval(x));
    } else {
        f.w = std::sqrt(m.f.eval(x));
        f.v = std::sqrt(m.R.eval(x));
    }
    return f;
}

Fiber fiber_from_point(const CurveModel& m, const CurvePoint& p) {
    Fiber f;
    if (m.mode == CurveMode::Hyperelliptic) f.y = p.y;
    else {
        f.w = p.w;
        f.v = p.v;
    }
    return f;
}

CurvePoint point_from_fiber(const CurveModel& m, cplx x, const Fiber& f) {
    CurvePoint p;
    p.x = x;
    if (m.mode == CurveMode::Hyperelliptic) p.y = f.y;
    else {
        p.w = f.w;
        p.v = f.v;
        p.y = (-0.5 * m.alpha.eval(x) + p.v) / p.w;
    }
    return p;
}

CurvePoint nearest_point(const CurveModel& m, cplx x, const Fiber& guess) {
    Fiber f;
    if (m.mode == CurveMode::Hyperelliptic) {
        const cplx y = std::sqrt(m.Q.eval(x));
        f.y = (std::abs(y - guess.y) <= std::abs(y + guess.y)) ? y : -y;
    } else {
        const cplx w = std::sqrt(m.f.eval(x));
        f.w = (std::abs(w - guess.w) <= std::abs(w + guess.w)) ? w : -w;
        const cplx v = std::sqrt(m.R.eval(x));
        f.v = (std::abs(v - guess.v) <= std::abs(v + guess.v)) ? v : -v;
    }
    return point_from_fiber(m, x, f);
}

bool same_fiber(const CurveModel& m, const Fiber& a, const Fiber& b) {
    if (m.mode == CurveMode::Hyperelliptic)
        return std::abs(a.y - b.y) <= 0.5 * std::abs(a.y + b.y) + 1e-13;
    return std::abs(a.w - b.w) <= 0.5 * std::abs(a.w + b.w) + 1e-13 &&
           std::abs(a.v - b.v) <= 0.5 * std::abs(a.v + b.v) + 1e-13;
}

namespace {

// Advance one fiber component: candidates +/-cand0; accept if the winner is
// within a quarter of the gap to the loser.
bool step_component(cplx cand0, cplx predicted, cplx* out) {
    cplx a = cand0, b = -cand0;
    cplx win = (std::abs(a - predicted) <= std::abs(b - predicted)) ? a : b;
    double gap = std::abs(2.0 * cand0);
    if (std::abs(win - predicted) >= 0.25 * gap) return false;
    *out = win;
    return true;
}

struct Walker {
    const CurveModel* m; // pointer keeps trial walkers assignable
    Fiber cur;
    Fiber prev;      // for linear prediction
    bool have_prev = false;

    bool advance(cplx x) {
        Fiber pred = cur;
        if (have_prev) {
            // linear extrapolation component-wise
            pred.y = 2.0 * cur.y - prev.y;
            pred.w = 2.0 * cur.w - prev.w;
            pred.v = 2.0 * cur.v - prev.v;
        }
        Fiber next;
        if (m->mode == CurveMode::Hyperelliptic) {
            if (!step_component(std::sqrt(m->Q.eval(x)), pred.y, &next.y)) return false;
        } else {
            if (!step_component(std::sqrt(m->f.eval(x)), pred.w, &next.w)) return false;
            if (!step_component(std::sqrt(m->R.eval(x)), pred.v, &next.v)) return false;
        }
        prev = cur;
        cur = next;
        have_prev = true;
        return true;
    }
};

} // namespace

ContinuedPath::ContinuedPath(const CurveModel& model, XPath path, Fiber start)
    : model_(&model), path_(std::move(path)), start_(start) {
    skel_.resize(path_.size());
    Walker w{model_, start_, {}, false};
    for (size_t k = 0; k < path_.size(); ++k) {
        auto& sk = skel_[k];
        sk.emplace_back(0.0, w.cur);
        const double h0 = 1.0 / 16.0;
        double t = 0.0, h = h0;
        w.have_prev = false; // fresh prediction for each segment
        while (t < 1.0 - 1e-12) {
            double tn = std::min(1.0, t + h);
            Walker trial = w;
            if (trial.advance(path_[k].at(tn))) {
                w = trial;
                t = tn;
                sk.emplace_back(t, w.cur);
                h = std::min(h * 1.4, h0);
            } else {
                h *= 0.5;
                if (h < 1e-7)
                    throw ContinuationAmbiguityError(
                        "sheet tracking failed on segment " + std::to_string(k) +
                        " near x = (" + std::to_string(path_[k].at(t).real()) + "," +
                        std::to_string(path_[k].at(t).imag()) + ")");
            }
        }
    }
    end_ = w.cur;
}

bool ContinuedPath::closed_lift() const {
    if (path_.empty()) return true;
    cplx x0 = path_.front().at(0.0), x1 = path_.back().at(1.0);
    if (std::abs(x0 - x1) > 1e-10 * (1.0 + std::abs(x0))) return false;
    return same_fiber(*model_, start_, end_);
}

Fiber ContinuedPath::fiber_at(size_t k, double t) const {
    const auto& sk = skel_[k];
    // bracketing skeleton samples; interpolating between them predicts the
    // fiber well enough to certify the branch even near ramification
    size_t lo = 0, hi = sk.size() - 1;
    while (lo < hi) {
        size_t mid = (lo + hi + 1) / 2;
        if (sk[mid].first <= t) lo = mid;
        else hi = mid - 1;
    }
    Fiber base = sk[lo].second;
    if (lo + 1 < sk.size() && sk[lo + 1].first > sk[lo].first) {
        double u = (t - sk[lo].first) / (sk[lo + 1].first - sk[lo].first);
        const Fiber& nxt = sk[lo + 1].second;
        base.y = (1.0 - u) * base.y + u * nxt.y;
        base.w = (1.0 - u) * base.w + u * nxt.w;
        base.v = (1.0 - u) * base.v + u * nxt.v;
    }
    cplx x = path_[k].at(t);
    Fiber out;
    if (model_->mode == CurveMode::Hyperelliptic) {
        if (!step_component(std::sqrt(model_->Q.eval(x)), base.y, &out.y))
            throw ContinuationAmbiguityError("quadrature node lost its sheet");
    } else {
        if (!step_component(std::sqrt(model_->f.eval(x)), base.w, &out.w) ||
            !step_component(std::sqrt(model_->R.eval(x)), base.v, &out.v))
            throw ContinuationAmbiguityError("quadrature node lost its sheet");
    }
    return out;
}

Fiber continue_sheet(const CurveModel& m, const XPath& path, const Fiber& start) {
    return ContinuedPath(m, path, start).end();
}

namespace {

using GL = boost::math::quadrature::gauss<double, 32>;

// GL-32 on [t0,t1] of one path segment
void gl_panel(const CurveModel& m, const ContinuedPath& cp, size_t k, double t0, double t1,
              int dim, const VectorIntegrand& f, std::vector<cplx>& acc,
              std::vector<cplx>& scratch) {
    const auto& xs = GL::abscissa(); // positive half-nodes, x[0] may be 0 for odd counts
    const auto& ws = GL::weights();
    const PathSeg& seg = cp.path()[k];
    double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
    for (size_t i = 0; i < xs.size(); ++i) {
        for (int sgn = 0; sgn < 2; ++sgn) {
            if (xs[i] == 0.0 && sgn == 1) continue;
            double t = mid + (sgn == 0 ? half * xs[i] : -half * xs[i]);
            cplx x = seg.at(t);
            Fiber fib = cp.fiber_at(k, t);
            CurvePoint p = point_from_fiber(m, x, fib);
            f(p, scratch);
            cplx jac = seg.tangent(t) * (ws[i] * half);
            for (int d = 0; d < dim; ++d) acc[d] += scratch[d] * jac;
        }
    }
}

void adaptive_panel(const CurveModel& m, const ContinuedPath& cp, size_t k, double t0,
                    double t1, int dim, const VectorIntegrand& f, double tol,
                    std::vector<cplx>& total, int depth) {
    std::vector<cplx> whole(dim, cplx{0.0}), left(dim, cplx{0.0}), right(dim, cplx{0.0});
    std::vector<cplx> scratch(dim);
    gl_panel(m, cp, k, t0, t1, dim, f, whole, scratch);
    double tm = 0.5 * (t0 + t1);
    gl_panel(m, cp, k, t0, tm, dim, f, left, scratch);
    gl_panel(m, cp, k, tm, t1, dim, f, right, scratch);
    double err = 0.0, mag = 0.0;
    for (int d = 0; d < dim; ++d) {
        err = std::max(err, std::abs(whole[d] - (left[d] + right[d])));
        mag = std::max(mag, std::abs(left[d] + right[d]));
    }
    if (err <= tol * std::max(1.0, mag) || depth >= 13) {
        if (depth >= 13 && err > 10.0 * tol * std::max(1.0, mag))
            throw QuadratureError("panel refinement stalled at depth 13, err=" +
                                  std::to_string(err));
        for (int d = 0; d < dim; ++d) total[d] += left[d] + right[d];
        return;
    }
    adaptive_panel(m, cp, k, t0, tm, dim, f, tol, total, depth + 1);
    adaptive_panel(m, cp, k, tm, t1, dim, f, tol, total, depth + 1);
}

} // namespace

std::vector<cplx> integrate_differentials(const CurveModel& m, const ContinuedPath& cp,
                                          int dim, const VectorIntegrand& f, double tol) {
    std::vector<cplx> total(dim, cplx{0.0});
    for (size_t k = 0; k < cp.path().size(); ++k)
        adaptive_panel(m, cp, k, 0.0, 1.0, dim, f, tol, total, 0);
    return total;
}

std::vector<cplx> integrate_raw(const CurveModel& m, const CurveValidation& val,
                                const ContinuedPath& cp, double tol) {
    if (val.genus == 0) return {};
    VectorIntegrand f = [&](const CurvePoint& p, std::vector<cplx>& out) {
        auto vals = raw_differentials_dx(m, val, p);
        for (size_t i = 0; i < vals.size(); ++i) out[i] = vals[i];
    };
    return integrate_differentials(m, cp, val.genus, f, tol);
}

} // namespace skrec
