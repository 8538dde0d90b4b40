#include "skrec/curves.hpp"

#include <algorithm>
#include <sstream>

#include "skrec/errors.hpp"

namespace skrec {

namespace {

// Branch rule: return t or -t so that arg lands in (-pi/2, pi/2], ties toward
// the +pi/2 side.  A thin tolerance band makes the boundary decision stable
// against rounding of purely imaginary inputs.
cplx fix_halfplane(cplx t) {
    double re = t.real(), im = t.imag();
    double mag = std::abs(t);
    if (mag == 0.0) return t;
    if (re > 1e-13 * mag) return t;
    if (re < -1e-13 * mag) return -t;
    return (im >= 0.0) ? t : -t; // on the imaginary axis: keep +i side
}

std::string fmt(cplx z) {
    std::ostringstream os;
    os << "(" << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i)";
    return os.str();
}

void check_separations(const std::vector<cplx>& xs, double floor_rel, double scale,
                       double* min_sep) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < xs.size(); ++i)
        for (size_t j = i + 1; j < xs.size(); ++j) {
            double d = std::abs(xs[i] - xs[j]);
            if (d < floor_rel * scale)
                throw RootSeparationError("branch points " + fmt(xs[i]) + " and " + fmt(xs[j]) +
                                          " are " + std::to_string(d) +
                                          " apart, below the separation floor " +
                                          std::to_string(floor_rel * scale));
            best = std::min(best, d);
        }
    *min_sep = xs.size() >= 2 ? best : 1.0;
}

// Deterministic root order: by real part, then imaginary part (as produced by
// Poly::roots, but re-sorted here in case callers pass their own lists).
void sort_points(std::vector<cplx>& v) {
    std::sort(v.begin(), v.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
}

} // namespace

CurveValidation validate_curve(const CurveModel& m) {
    CurveValidation val;
    if (m.mode == CurveMode::Hyperelliptic) {
        int d = m.Q.degree();
        if (d < 2 || d % 2 != 0)
            throw DegreeError("hyperelliptic model needs even deg Q >= 2, got " +
                              std::to_string(d));
        val.genus = d / 2 - 1;
        val.branch_x = m.Q.roots();
        sort_points(val.branch_x);
        val.x_scale = 1.0;
        for (cplx r : val.branch_x) val.x_scale = std::max(val.x_scale, std::abs(r));
        check_separations(val.branch_x, m.separation_floor, val.x_scale, &val.min_separation);
        const Poly dQ = m.Q.derivative();
        int idx = 0;
        for (cplx r : val.branch_x) {
            RamificationPoint rp;
            rp.index = idx++;
            rp.x = r;
            rp.w0 = 0.0;
            rp.yprime = fix_halfplane(std::sqrt(dQ.eval(r)));
            val.ramification.push_back(rp);
        }
        val.n_raw_differentials = val.genus;
        return val;
    }

    // tower model
    int df = m.f.degree();
    if (df < 6 || df % 2 != 0)
        throw DegreeError("tower model needs even deg f >= 6 (base genus >= 2), got " +
                          std::to_string(df));
    int gb = df / 2 - 1;
    val.base_genus = gb;
    if (m.alpha.degree() > gb - 1)
        throw DegreeError("tower model needs deg alpha <= g_base-1 = " + std::to_string(gb - 1) +
                          ", got " + std::to_string(m.alpha.degree()));
    if (m.R.degree() != 2 * gb - 2)
        throw DegreeError("tower model needs deg R = 2 g_base - 2 = " + std::to_string(2 * gb - 2) +
                          " exactly (holomorphic-basis completeness), got " +
                          std::to_string(m.R.degree()));
    val.genus = 4 * gb - 3;

    std::vector<cplx> froots = m.f.roots();
    std::vector<cplx> rroots = m.R.roots();
    sort_points(froots);
    sort_points(rroots);
    val.branch_x = froots;
    val.branch_x.insert(val.branch_x.end(), rroots.begin(), rroots.end());
    val.x_scale = 1.0;
    for (cplx r : val.branch_x) val.x_scale = std::max(val.x_scale, std::abs(r));
    check_separations(val.branch_x, m.separation_floor, val.x_scale, &val.min_separation);

    const Poly dR = m.R.derivative();
    int idx = 0;
    for (cplx rho : rroots) {
        cplx fval = m.f.eval(rho);
        if (std::abs(fval) < m.separation_floor * val.x_scale)
            throw RootSeparationError("R-root " + fmt(rho) + " sits on the base branch locus");
        cplx sr = std::sqrt(dR.eval(rho));
        for (int sheet = 0; sheet < 2; ++sheet) {
            cplx w0 = (sheet == 0 ? 1.0 : -1.0) * std::sqrt(fval);
            RamificationPoint rp;
            rp.index = idx++;
            rp.x = rho;
            rp.w0 = w0;
            rp.yprime = fix_halfplane(sr / w0);
            val.ramification.push_back(rp);
        }
    }
    val.n_raw_differentials = val.genus;
    return val;
}

CurvePoint LocalFrame::point(const CurveModel& m, cplx s) const {
    CurvePoint p;
    p.x = x0 + s * s;
    if (m.mode == CurveMode::Hyperelliptic) {
        cplx predicted = y.eval(s);
        cplx exact = std::sqrt(m.Q.eval(p.x));
        p.y = (std::abs(exact - predicted) <= std::abs(-exact - predicted)) ? exact : -exact;
        return p;
    }
    cplx wex = std::sqrt(m.f.eval(p.x));
    cplx wpred = w.eval(s);
    p.w = (std::abs(wex - wpred) <= std::abs(-wex - wpred)) ? wex : -wex;
    cplx vex = std::sqrt(m.R.eval(p.x));
    cplx vpred = v.eval(s);
    p.v = (std::abs(vex - vpred) <= std::abs(-vex - vpred)) ? vex : -vex;
    p.y = (-0.5 * m.alpha.eval(p.x) + p.v) / p.w;
    return p;
}

std::vector<LocalFrame> local_frames(const CurveModel& m, const CurveValidation& val,
                                     int order) {
    std::vector<LocalFrame> frames;
    frames.reserve(val.ramification.size());
    const int n = order;

    for (const RamificationPoint& rp : val.ramification) {
        LocalFrame fr;
        fr.index = rp.index;
        fr.x0 = rp.x;
        fr.q_radius = 0.5 * std::sqrt(0.9 * val.min_separation);

        // x(q) = x0 + q^2 as a series usable for composition
        auto poly_of_q2 = [&](const Poly& P) {
            // P(x0 + q^2) as a PowerSeries in q of length n
            Poly shifted = P.translate(rp.x);
            PowerSeries out = PowerSeries::zero(n);
            for (int k = 0; k <= shifted.degree(); ++k) {
                if (2 * k < n) out.at(2 * k) = shifted.coeff(k);
            }
            return out;
        };

        if (m.mode == CurveMode::Hyperelliptic) {
            // y(q) = q * sqrt(Q(x0+q^2)/q^2), branch fixed by y'(0).
            Poly shifted = m.Q.translate(rp.x);
            PowerSeries G = PowerSeries::zero(n); // Q(x0+u)/u with u = q^2
            for (int k = 1; k <= shifted.degree(); ++k)
                if (2 * (k - 1) < n) G.at(2 * (k - 1)) = shifted.coeff(k);
            PowerSeries sq = G.sqrt_branch(rp.yprime);
            PowerSeries y = PowerSeries::zero(n);
            for (int k = 0; k + 1 < n; ++k) y.at(k + 1) = sq[k];
            fr.y = y;
            // raw differentials x^k dx / y = 2 x(q)^k / (sqrt-series) dq
            PowerSeries inv_sq = sq.reciprocal();
            Poly xpow{std::vector<cplx>{1.0}};
            for (int k = 0; k < val.genus; ++k) {
                fr.raw_omega.push_back(poly_of_q2(xpow) * inv_sq * cplx{2.0});
                xpow = xpow * Poly{std::vector<cplx>{0.0, 1.0}};
            }
        } else {
            // w(q): regular sqrt of f(x0+q^2) on the chosen w-sheet
            PowerSeries fser = poly_of_q2(m.f);
            fr.w = fser.sqrt_branch(rp.w0);
            // v(q) = q * sqrt(R(x0+q^2)/q^2); branch via y'(0) = v'(0)/w(0)
            Poly shifted = m.R.translate(rp.x);
            PowerSeries G = PowerSeries::zero(n);
            for (int k = 1; k <= shifted.degree(); ++k)
                if (2 * (k - 1) < n) G.at(2 * (k - 1)) = shifted.coeff(k);
            PowerSeries sv = G.sqrt_branch(rp.yprime * rp.w0);
            PowerSeries v = PowerSeries::zero(n);
            for (int k = 0; k + 1 < n; ++k) v.at(k + 1) = sv[k];
            fr.v = v;
            // y(q) = (-alpha(x)/2 + v) / w
            PowerSeries aser = poly_of_q2(m.alpha) * cplx{-0.5};
            fr.y = (aser + v) * fr.w.reciprocal();
            // raw differentials: x^k dx/w then x^k dx/(w v)
            PowerSeries invw = fr.w.reciprocal();
            PowerSeries inv_wsv = (fr.w * sv).reciprocal();
            Poly xpow{std::vector<cplx>{1.0}};
            for (int k = 0; k <= val.base_genus - 1; ++k) {
                // x^k * 2q / w
                PowerSeries base = poly_of_q2(xpow) * invw * cplx{2.0};
                PowerSeries shiftq = PowerSeries::zero(n);
                for (int j = 0; j + 1 < n; ++j) shiftq.at(j + 1) = base[j];
                fr.raw_omega.push_back(shiftq);
                xpow = xpow * Poly{std::vector<cplx>{0.0, 1.0}};
            }
            xpow = Poly{std::vector<cplx>{1.0}};
            for (int k = 0; k <= 2 * val.base_genus - 2; ++k) {
                // x^k * 2q / (w v) = x^k * 2 / (w * sv)
                fr.raw_omega.push_back(poly_of_q2(xpow) * inv_wsv * cplx{2.0});
                xpow = xpow * Poly{std::vector<cplx>{0.0, 1.0}};
            }
        }
        frames.push_back(std::move(fr));
    }
    return frames;
}

std::vector<cplx> raw_differentials_dx(const CurveModel& m, const CurveValidation& val,
                                       const CurvePoint& p) {
    std::vector<cplx> out;
    if (m.mode == CurveMode::Hyperelliptic) {
        out.reserve(val.genus);
        cplx xp = 1.0;
        for (int k = 0; k < val.genus; ++k) {
            out.push_back(xp / p.y);
            xp *= p.x;
        }
        return out;
    }
    out.reserve(val.genus);
    cplx xp = 1.0;
    for (int k = 0; k <= val.base_genus - 1; ++k) {
        out.push_back(xp / p.w);
        xp *= p.x;
    }
    xp = 1.0;
    for (int k = 0; k <= 2 * val.base_genus - 2; ++k) {
        out.push_back(xp / (p.w * p.v));
        xp *= p.x;
    }
    return out;
}

} // namespace skrec
