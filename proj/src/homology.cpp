#include "skrec/homology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "skrec/errors.hpp"

namespace skrec {

namespace {

// Deterministic per-candidate geometry jitter from low-discrepancy (golden
// ratio) sequences: every candidate gets distinct circle radii and a distinct
// connector bump height, so no two candidates share an edge line and all
// crossings stay transversal even for symmetric root configurations.
inline double jitter01(int k, double alpha) {
    double v = (k + 1) * alpha;
    return v - std::floor(v);
}
constexpr double kAlphaRadius = 0.6180339887498949;
constexpr double kAlphaBump = 0.7548776662466927;

struct DumbbellSpec {
    int i, j;      // indices into branch_x
    int sheet;     // lift variant
    int counter;   // global candidate counter (drives jitter)
};

XPath dumbbell_path(const std::vector<cplx>& branch, const DumbbellSpec& spec,
                    double min_sep, double scale) {
    cplx xi = branch[spec.i], xj = branch[spec.j];
    auto clear_of = [&](int a) {
        double c = std::numeric_limits<double>::infinity();
        for (size_t k = 0; k < branch.size(); ++k)
            if (static_cast<int>(k) != a) c = std::min(c, std::abs(branch[k] - branch[a]));
        return c;
    };
    // parity-split indices keep the i-side and j-side radius streams disjoint
    double ri = 0.30 * (0.75 + 0.45 * jitter01(2 * spec.counter, kAlphaRadius)) * clear_of(spec.i);
    double rj = 0.30 * (0.75 + 0.45 * jitter01(2 * spec.counter + 1, kAlphaRadius)) *
                clear_of(spec.j);
    cplx u = (xj - xi) / std::abs(xj - xi);
    cplx si = xi + ri * u, sj = xj - rj * u;

    // connector with a perpendicular bump so no two candidates share a line
    double bump = (0.02 + 0.06 * jitter01(spec.counter, kAlphaBump)) *
                  ((spec.counter % 2 == 0) ? 1.0 : -1.0);
    cplx mid = 0.5 * (si + sj) + bump * min_sep * u * cplx{0.0, 1.0};
    std::vector<cplx> obstacles;
    for (size_t k = 0; k < branch.size(); ++k)
        if (static_cast<int>(k) != spec.i && static_cast<int>(k) != spec.j)
            obstacles.push_back(branch[k]);
    double clearance = 0.22 * min_sep;
    (void)scale;
    XPath conn = concat(route_avoiding(si, mid, obstacles, clearance),
                        route_avoiding(mid, sj, obstacles, clearance));

    XPath p = circle_loop(xi, ri, std::arg(u));
    p = concat(p, conn);
    p = concat(p, circle_loop(xj, rj, std::arg(-u)));
    p = concat(p, reversed(conn));
    return p;
}

Fiber start_fiber(const CurveModel& m, cplx x, int sheet) {
    Fiber f = principal_fiber(m, x);
    if (m.mode == CurveMode::Hyperelliptic) {
        if (sheet & 1) f.y = -f.y;
        return f;
    }
    if (sheet & 1) f.w = -f.w;
    if (sheet & 2) f.v = -f.v;
    return f;
}

struct Polyline {
    // flattened samples of a lifted cycle: (x, seg index, t)
    std::vector<cplx> pts;
    std::vector<std::pair<size_t, double>> par;
};

Polyline sample_polyline(const ContinuedPath& cp, double scale) {
    Polyline pl;
    for (size_t k = 0; k < cp.path().size(); ++k) {
        const PathSeg& s = cp.path()[k];
        int n;
        if (s.kind == PathSeg::Kind::Arc)
            n = std::max(24, static_cast<int>(std::ceil(std::abs(s.ang1 - s.ang0) / 0.06)));
        else
            n = std::max(8, static_cast<int>(std::ceil(s.length() / (0.03 * scale))));
        for (int idx = 0; idx < n; ++idx) { // omit t=1: next segment supplies it
            double t = double(idx) / n;
            pl.pts.push_back(s.at(t));
            pl.par.emplace_back(k, t);
        }
    }
    // close the polygon
    if (!cp.path().empty()) {
        pl.pts.push_back(cp.path().back().at(1.0));
        pl.par.emplace_back(cp.path().size() - 1, 1.0);
    }
    return pl;
}

} // namespace

int intersection_number(const CurveModel& m, const ContinuedPath& c1, const ContinuedPath& c2,
                        double scale) {
    Polyline p1 = sample_polyline(c1, scale), p2 = sample_polyline(c2, scale);
    int total = 0;
    for (size_t e1 = 0; e1 + 1 < p1.pts.size(); ++e1) {
        cplx a0 = p1.pts[e1], a1 = p1.pts[e1 + 1];
        cplx d1 = a1 - a0;
        double l1 = std::abs(d1);
        if (l1 < 1e-15) continue;
        for (size_t e2 = 0; e2 + 1 < p2.pts.size(); ++e2) {
            cplx b0 = p2.pts[e2], b1 = p2.pts[e2 + 1];
            // cheap bounding-box rejection
            if (std::min(a0.real(), a1.real()) > std::max(b0.real(), b1.real()) ||
                std::min(b0.real(), b1.real()) > std::max(a0.real(), a1.real()) ||
                std::min(a0.imag(), a1.imag()) > std::max(b0.imag(), b1.imag()) ||
                std::min(b0.imag(), b1.imag()) > std::max(a0.imag(), a1.imag()))
                continue;
            cplx d2 = b1 - b0;
            double l2 = std::abs(d2);
            if (l2 < 1e-15) continue;
            double det = d1.real() * d2.imag() - d1.imag() * d2.real();
            if (std::abs(det) < 1e-9 * l1 * l2) {
                // parallel edges: degenerate only if they actually overlap
                double off = std::abs(((b0 - a0) / d1).imag()) * l1;
                double t0 = (((b0 - a0) / d1)).real(), t1 = (((b1 - a0) / d1)).real();
                if (off < 1e-9 * scale && std::max(t0, t1) > 0.0 && std::min(t0, t1) < 1.0)
                    throw CrossingDegeneracyError(
                        "overlapping parallel edges near x = (" + std::to_string(a0.real()) +
                        "," + std::to_string(a0.imag()) + ")-(" + std::to_string(a1.real()) +
                        "," + std::to_string(a1.imag()) + ")");
                continue;
            }
            cplx r = b0 - a0;
            double t = (r.real() * d2.imag() - r.imag() * d2.real()) / det;
            double s = (r.real() * d1.imag() - r.imag() * d1.real()) / det;
            if (t < 0.0 || t >= 1.0 || s < 0.0 || s >= 1.0) continue;
            if (t < 1e-9 || t > 1.0 - 1e-9 || s < 1e-9 || s > 1.0 - 1e-9)
                throw CrossingDegeneracyError("crossing at a polyline vertex; adjust jitter");
            // fibers of both lifts at the crossing
            auto [k1, u1a] = p1.par[e1];
            auto [k1n, u1b] = p1.par[e1 + 1];
            double tt1 = (k1 == k1n) ? u1a + t * (u1b - u1a) : u1a + t * (1.0 - u1a);
            auto [k2, u2a] = p2.par[e2];
            auto [k2n, u2b] = p2.par[e2 + 1];
            double tt2 = (k2 == k2n) ? u2a + s * (u2b - u2a) : u2a + s * (1.0 - u2a);
            Fiber f1 = c1.fiber_at(k1, tt1);
            Fiber f2 = c2.fiber_at(k2, tt2);
            if (!same_fiber(m, f1, f2)) continue;
            // +1 when the second path crosses the first from its left to its right
            double cross = (std::conj(d1) * d2).imag();
            total += (cross < 0.0) ? 1 : -1;
        }
    }
    return total;
}

namespace {

using IVec = std::vector<long long>;

long long pairing(const IVec& u, const IVec& v, const Eigen::MatrixXi& M) {
    long long acc = 0;
    int n = static_cast<int>(u.size());
    for (int i = 0; i < n; ++i) {
        if (u[i] == 0) continue;
        for (int j = 0; j < n; ++j)
            if (v[j] != 0) acc += u[i] * static_cast<long long>(M(i, j)) * v[j];
    }
    return acc;
}

void axpy(IVec& y, long long a, const IVec& x) {
    for (size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

} // namespace

SymplecticFrame build_symplectic_frame(const CurveModel& m, const CurveValidation& val) {
    const int g = val.genus;
    if (g < 1) throw RankError("symplectic frame requested for a genus-0 model");
    SymplecticFrame fr;
    fr.genus = g;

    // --- candidate generation -------------------------------------------
    std::vector<ContinuedPath> lifts;
    std::vector<Eigen::VectorXcd> periods;
    int counter = 0;
    const int n_sheets = (m.mode == CurveMode::Hyperelliptic) ? 1 : 4;
    const int nb = static_cast<int>(val.branch_x.size());
    double pscale = 1.0;

    for (int i = 0; i < nb; ++i) {
        for (int j = i + 1; j < nb; ++j) {
            for (int sheet = 0; sheet < n_sheets; ++sheet) {
                DumbbellSpec spec{i, j, sheet, counter++};
                XPath path = dumbbell_path(val.branch_x, spec, val.min_separation, val.x_scale);
                Fiber f0 = start_fiber(m, path.front().at(0.0), sheet);
                ContinuedPath lift(m, path, f0);
                int turns = 1;
                if (!lift.closed_lift()) {
                    lift = ContinuedPath(m, concat(path, path), f0);
                    turns = 2;
                    if (!lift.closed_lift()) continue; // not a cycle of this deck group
                }
                Eigen::VectorXcd p(g);
                auto vals = integrate_raw(m, val, lift, 1e-12);
                for (int d = 0; d < g; ++d) p(d) = vals[d];
                // dedupe against kept candidates (up to sign)
                bool dup = p.norm() < 1e-10 * std::max(1.0, pscale);
                for (size_t k = 0; !dup && k < periods.size(); ++k) {
                    double s = std::max({1.0, periods[k].norm(), p.norm()});
                    if ((p - periods[k]).norm() < 1e-9 * s || (p + periods[k]).norm() < 1e-9 * s)
                        dup = true;
                }
                if (dup) continue;
                pscale = std::max(pscale, p.norm());
                periods.push_back(p);
                lifts.push_back(std::move(lift));
                Cycle cyc;
                cyc.path = (turns == 2) ? concat(path, path) : path;
                cyc.start = f0;
                cyc.turns = turns;
                fr.candidates.push_back(std::move(cyc));
            }
        }
    }

    const int nc = static_cast<int>(fr.candidates.size());
    if (nc < 2 * g)
        throw RankError("only " + std::to_string(nc) + " independent candidate cycles for genus " +
                        std::to_string(g));

    // real-rank sanity before the integer work
    Eigen::MatrixXd P(nc, 2 * g);
    for (int c = 0; c < nc; ++c)
        for (int d = 0; d < g; ++d) {
            P(c, 2 * d) = periods[c](d).real();
            P(c, 2 * d + 1) = periods[c](d).imag();
        }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(P);
    double smax = svd.singularValues()(0);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1e-8 * smax) ++rank;
    if (rank < 2 * g)
        throw RankError("candidate periods span rank " + std::to_string(rank) + " < " +
                        std::to_string(2 * g));

    fr.cand_periods.resize(nc, g);
    for (int c = 0; c < nc; ++c) fr.cand_periods.row(c) = periods[c].transpose();

    // --- intersection matrix ----------------------------------------------
    fr.intersections.resize(nc, nc);
    fr.intersections.setZero();
    for (int i = 0; i < nc; ++i)
        for (int j = i + 1; j < nc; ++j) {
            int v = intersection_number(m, lifts[i], lifts[j], val.x_scale);
            fr.intersections(i, j) = v;
            fr.intersections(j, i) = -v;
        }

    // --- integer symplectic Gram-Schmidt ----------------------------------
    std::vector<IVec> vecs(nc, IVec(nc, 0));
    for (int i = 0; i < nc; ++i) vecs[i][i] = 1;
    std::vector<bool> used(nc, false);
    std::vector<std::pair<IVec, IVec>> pairs;

    while (static_cast<int>(pairs.size()) < g) {
        // smallest usable pivot
        int bi = -1, bj = -1;
        long long bv = 0;
        for (int i = 0; i < nc; ++i) {
            if (used[i]) continue;
            for (int j = 0; j < nc; ++j) {
                if (used[j] || j == i) continue;
                long long v = pairing(vecs[i], vecs[j], fr.intersections);
                if (v != 0 && (bv == 0 || std::llabs(v) < std::llabs(bv))) {
                    bi = i;
                    bj = j;
                    bv = v;
                }
            }
        }
        if (bi < 0)
            throw RankError("intersection pairing exhausted after " +
                            std::to_string(pairs.size()) + " of " + std::to_string(g) +
                            " symplectic pairs");
        // drive the pivot to +-1: while |B(bi,bj)| = d > 1, look for a vector
        // whose pairing against one pivot leg is not divisible by d; the
        // remainder combination yields a strictly smaller pivot (if every
        // pairing is divisible by d the lattice pairing cannot be unimodular)
        while (std::llabs(bv) > 1) {
            bool improved = false;
            for (int k = 0; k < nc && !improved; ++k) {
                if (used[k] || k == bi || k == bj) continue;
                long long qa = pairing(vecs[bi], vecs[k], fr.intersections);
                if (qa % bv != 0) {
                    long long t = qa / bv; // B(bi, k - t*bj) = qa - t*bv, a nonzero remainder
                    axpy(vecs[k], -t, vecs[bj]);
                    bj = k;
                    bv = pairing(vecs[bi], vecs[bj], fr.intersections);
                    improved = true;
                    continue;
                }
                long long qb = pairing(vecs[k], vecs[bj], fr.intersections);
                if (qb % bv != 0) {
                    long long t = qb / bv; // B(k - t*bi, bj) = qb - t*bv
                    axpy(vecs[k], -t, vecs[bi]);
                    bi = k;
                    bv = pairing(vecs[bi], vecs[bj], fr.intersections);
                    improved = true;
                }
            }
            if (!improved)
                throw RankError("no unimodular symplectic pivot exists in the candidate lattice");
        }
        if (bv == -1) std::swap(bi, bj);
        IVec a = vecs[bi], b = vecs[bj];
        used[bi] = used[bj] = true;
        for (int k = 0; k < nc; ++k) {
            if (used[k]) continue;
            long long ka = pairing(vecs[k], a, fr.intersections);
            long long kb = pairing(vecs[k], b, fr.intersections);
            axpy(vecs[k], -kb, a);
            axpy(vecs[k], ka, b);
        }
        pairs.emplace_back(std::move(a), std::move(b));
    }

    fr.U.resize(2 * g, nc);
    for (int r = 0; r < g; ++r)
        for (int c = 0; c < nc; ++c) {
            fr.U(r, c) = static_cast<int>(pairs[r].first[c]);
            fr.U(g + r, c) = static_cast<int>(pairs[r].second[c]);
        }

    // exact frame check: U M U^T must be the standard symplectic form
    Eigen::MatrixXi J = fr.U * fr.intersections * fr.U.transpose();
    for (int r = 0; r < 2 * g; ++r)
        for (int c = 0; c < 2 * g; ++c) {
            int want = 0;
            if (c == r + g) want = 1;
            if (r == c + g) want = -1;
            if (J(r, c) != want)
                throw RankError("symplectic reduction produced a non-canonical pairing");
        }
    return fr;
}

std::vector<cplx> integrate_over_cycle(const CurveModel& m, const SymplecticFrame& fr,
                                       int row, int dim, const VectorIntegrand& f,
                                       double tol) {
    std::vector<cplx> acc(dim, cplx{0.0});
    for (int c = 0; c < fr.n_cand(); ++c) {
        int coef = fr.U(row, c);
        if (coef == 0) continue;
        ContinuedPath lift(m, fr.candidates[c].path, fr.candidates[c].start);
        auto vals = integrate_differentials(m, lift, dim, f, tol);
        for (int d = 0; d < dim; ++d) acc[d] += double(coef) * vals[d];
    }
    return acc;
}

} // namespace skrec
