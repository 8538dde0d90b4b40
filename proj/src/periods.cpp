#include "skrec/periods.hpp"

#include <cmath>
#include <string>

#include "skrec/errors.hpp"

namespace skrec {

namespace {

// integrate one integrand over every candidate cycle once, then combine by
// frame coefficients -- avoids re-lifting paths per frame row
Eigen::MatrixXcd candidate_integrals(const CurveModel& m, const SymplecticFrame& fr, int dim,
                                     const VectorIntegrand& f, double tol) {
    Eigen::MatrixXcd out(fr.n_cand(), dim);
    for (int c = 0; c < fr.n_cand(); ++c) {
        // only candidates some frame row actually uses
        bool needed = false;
        for (int r = 0; r < 2 * fr.genus && !needed; ++r) needed = fr.U(r, c) != 0;
        if (!needed) {
            out.row(c).setZero();
            continue;
        }
        ContinuedPath lift(m, fr.candidates[c].path, fr.candidates[c].start);
        auto vals = integrate_differentials(m, lift, dim, f, tol);
        for (int d = 0; d < dim; ++d) out(c, d) = vals[d];
    }
    return out;
}

Eigen::MatrixXcd combine_rows(const SymplecticFrame& fr, const Eigen::MatrixXcd& cand) {
    Eigen::MatrixXcd rows(2 * fr.genus, cand.cols());
    rows.setZero();
    for (int r = 0; r < 2 * fr.genus; ++r)
        for (int c = 0; c < fr.n_cand(); ++c)
            if (fr.U(r, c) != 0) rows.row(r) += double(fr.U(r, c)) * cand.row(c);
    return rows;
}

} // namespace

PeriodData period_data(const CurveModel& m, const CurveValidation& val, SymplecticFrame& fr,
                       double tol) {
    const int g = fr.genus;
    PeriodData pd;

    auto assemble = [&](Eigen::MatrixXcd& A, Eigen::MatrixXcd& Bp) {
        A.resize(g, g);
        Bp.resize(g, g);
        for (int i = 0; i < g; ++i) {
            A.row(i) = fr.frame_period(i).transpose();
            Bp.row(i) = fr.frame_period(g + i).transpose();
        }
    };
    assemble(pd.A, pd.Bp);

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pd.A);
    pd.cond_A = svd.singularValues()(0) / svd.singularValues()(g - 1);
    if (!std::isfinite(pd.cond_A) || pd.cond_A > 1e8)
        throw IllConditionedError("raw a-period matrix has condition number " +
                                  std::to_string(pd.cond_A));
    pd.C = pd.A.inverse();
    Eigen::MatrixXcd tau = pd.Bp * pd.C;

    pd.tau_asymmetry = (tau - tau.transpose()).cwiseAbs().maxCoeff();
    tau = 0.5 * (tau + tau.transpose()).eval();

    // orientation: Im(tau) must be positive definite; negative definite means
    // the crossing-sign convention is mirrored, repaired by b -> -b
    Eigen::MatrixXd imt = tau.imag();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(imt);
    double lo = es.eigenvalues()(0), hi = es.eigenvalues()(g - 1);
    if (hi < 0.0) {
        fr.U.bottomRows(g) *= -1;
        fr.orientation_swapped = !fr.orientation_swapped;
        assemble(pd.A, pd.Bp);
        tau = -tau;
        lo = -hi;
    } else if (lo <= 0.0) {
        throw IllConditionedError("Im(tau) is indefinite (eigenvalues in [" +
                                  std::to_string(lo) + ", " + std::to_string(hi) + "])");
    }
    pd.tau = tau;

    // special coordinates from the tautological form theta = y dx
    (void)val;
    VectorIntegrand th = [&](const CurvePoint& p, std::vector<cplx>& out) {
        out[0] = theta_dx(p);
    };
    Eigen::MatrixXcd cand = candidate_integrals(m, fr, 1, th, tol);
    Eigen::MatrixXcd rows = combine_rows(fr, cand);
    pd.z = rows.col(0).head(g);
    pd.w = rows.col(0).tail(g);
    return pd;
}

std::vector<cplx> normalized_dx(const CurveModel& m, const CurveValidation& val,
                                const Eigen::MatrixXcd& C, const CurvePoint& p) {
    auto raw = raw_differentials_dx(m, val, p);
    const int g = static_cast<int>(C.cols());
    std::vector<cplx> out(g, cplx{0.0});
    for (int j = 0; j < g; ++j)
        for (int k = 0; k < g; ++k) out[j] += C(k, j) * raw[k];
    return out;
}

namespace {

// loop based at `anchor` around branch point `b`: out along a routed
// connector, once around, and back
XPath anchored_loop(const CurveValidation& val, cplx anchor, cplx b) {
    double clear = std::numeric_limits<double>::infinity();
    for (cplx o : val.branch_x)
        if (std::abs(o - b) > 1e-14) clear = std::min(clear, std::abs(o - b));
    double r = 0.3 * clear;
    cplx u = (anchor - b) / std::abs(anchor - b);
    cplx s = b + r * u;
    std::vector<cplx> obstacles;
    for (cplx o : val.branch_x)
        if (std::abs(o - b) > 1e-14) obstacles.push_back(o);
    XPath conn = route_avoiding(anchor, s, obstacles, 0.22 * val.min_separation);
    XPath p = concat(conn, circle_loop(b, r, std::arg(u)));
    return concat(p, reversed(conn));
}

} // namespace

Eigen::VectorXcd abel_map(const CurveModel& m, const CurveValidation& val,
                          const SymplecticFrame& fr, const PeriodData& pd,
                          const CurvePoint& p, const CurvePoint& q, double tol) {
    (void)fr;
    const int g = val.genus;
    std::vector<cplx> obstacles = val.branch_x;
    XPath base = route_avoiding(q.x, p.x, obstacles, 0.25 * val.min_separation);
    Fiber f0 = fiber_from_point(m, q);
    Fiber target = fiber_from_point(m, p);

    // append branch-point loops until the lift ends on p's sheet
    XPath path = base;
    for (int attempt = 0; attempt < 3; ++attempt) {
        Fiber end = continue_sheet(m, path, f0);
        if (same_fiber(m, end, target)) break;
        if (m.mode == CurveMode::Hyperelliptic) {
            path = concat(path, anchored_loop(val, p.x, val.branch_x.front()));
        } else {
            // f-roots come first in branch_x, then R-roots; a loop around the
            // former flips w only, around the latter flips v only
            bool w_off = std::abs(end.w - target.w) > std::abs(end.w + target.w);
            bool v_off = std::abs(end.v - target.v) > std::abs(end.v + target.v);
            size_t n_f = val.branch_x.size() - (val.ramification.size() / 2);
            if (w_off) path = concat(path, anchored_loop(val, p.x, val.branch_x.front()));
            if (v_off) path = concat(path, anchored_loop(val, p.x, val.branch_x[n_f]));
        }
    }
    ContinuedPath lift(m, path, f0);
    if (!same_fiber(m, lift.end(), target))
        throw ContinuationAmbiguityError("Abel map lift ended on the wrong sheet");

    VectorIntegrand f = [&](const CurvePoint& cp, std::vector<cplx>& out) {
        auto vals = normalized_dx(m, val, pd.C, cp);
        for (int d = 0; d < g; ++d) out[d] = vals[d];
    };
    auto vals = integrate_differentials(m, lift, g, f, tol);
    Eigen::VectorXcd out(g);
    for (int d = 0; d < g; ++d) out(d) = vals[d];
    return out;
}

cplx j_invariant(cplx tau) {
    if (tau.imag() <= 0.0) throw IllConditionedError("j-invariant needs Im(tau) > 0");
    // reduce into the standard fundamental domain
    for (int it = 0; it < 200; ++it) {
        tau -= std::floor(tau.real() + 0.5);
        if (std::abs(tau) >= 1.0 - 1e-15) break;
        tau = -1.0 / tau;
    }
    cplx q = std::exp(2.0 * PI * I * tau);
    cplx e4{1.0}, e6{1.0};
    cplx qn{1.0};
    for (int n = 1; n <= 60; ++n) {
        qn *= q;
        cplx t = qn / (1.0 - qn);
        double n2 = double(n) * n;
        e4 += 240.0 * (n2 * n) * t;
        e6 -= 504.0 * (n2 * n2 * double(n)) * t;
    }
    cplx num = e4 * e4 * e4;
    cplx den = num - e6 * e6;
    if (std::abs(den) < 1e-300) throw IllConditionedError("degenerate discriminant in j-invariant");
    return 1728.0 * num / den;
}

} // namespace skrec
