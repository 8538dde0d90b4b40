#include "skrec/recursion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>

#include "skrec/errors.hpp"

namespace skrec {

namespace {

long long ipow(long long b, int e) {
    long long r = 1;
    while (e-- > 0) r *= b;
    return r;
}

void decode(long long idx, int D, int n, std::vector<int>& out) {
    out.resize(size_t(n));
    for (int i = n - 1; i >= 0; --i) {
        out[size_t(i)] = int(idx % D);
        idx /= D;
    }
}

// Coefficient of s^e, treating exponents below the band as exact zeros.
// Exponents above the trusted window still throw (the jets were too short).
cplx band_coeff0(const LaurentBand& P, int e) {
    if (P.empty() || e < P.lo()) return cplx{0.0};
    return P.coeff(e);
}

} // namespace

int correlator_kcap(int g, int n) { return 3 * g + n - 3; }

long long Correlator::flat(const std::vector<int>& slots) const {
    long long idx = 0;
    for (int s : slots) idx = idx * D() + s;
    return idx;
}

cplx Correlator::coeff(const std::vector<int>& slots) const {
    if (c.empty()) return cplx{0.0};
    return c[size_t(flat(slots))];
}

double Correlator::max_abs() const {
    double m = 0.0;
    for (const cplx& v : c) m = std::max(m, std::abs(v));
    return m;
}

RecursionBase recursion_base(const BergmanJets& jets) {
    RecursionBase b;
    b.w01.g = 0;
    b.w01.n = 1;
    b.w01.n_ram = jets.n_ram;
    b.w01.kcap = -1; // identically zero: no basis terms
    b.w02 = &jets;
    return b;
}

RecursionEngine::RecursionEngine(CurveModel m, std::vector<LocalFrame> frames, BergmanJets jets)
    : m_(std::move(m)), frames_(std::move(frames)), jets_(std::move(jets)) {
    // 1 / (4 Y(s)) per frame, with Y(s) = (y(s) - y(-s)) / (2 s): only the
    // odd part of y survives in the recursion denominator.
    inv4Y_.reserve(frames_.size());
    for (const LocalFrame& fr : frames_) {
        const int len = int(fr.y.size()) - 1;
        if (len < 1 || std::abs(fr.y[1]) == 0.0)
            throw SeriesDivergenceError("frame has a vanishing linear fiber coefficient");
        std::vector<cplx> yc(size_t(len), cplx{0.0});
        for (int j = 1; j <= len; j += 2) yc[size_t(j - 1)] = fr.y[j];
        inv4Y_.push_back(LaurentBand(0, std::move(yc)).reciprocal() * cplx{0.25});
    }
}

LaurentBand RecursionEngine::chart_band(int af, int a0, int k0) const {
    const int ord = jets_.order;
    if (2 * k0 > ord)
        throw JetOrderError("jet order too small for the requested basis column");
    const auto& T = jets_.T[size_t(af)][size_t(a0)];
    if (af == a0) {
        const int lo = -(2 * k0 + 2);
        std::vector<cplx> cc(size_t(ord - lo + 1), cplx{0.0});
        cc[0] = cplx{double(2 * k0 + 1)};
        for (int u = 0; u <= ord; ++u) cc[size_t(u - lo)] = T(u, 2 * k0);
        return LaurentBand(lo, std::move(cc));
    }
    std::vector<cplx> cc(size_t(ord + 1));
    for (int u = 0; u <= ord; ++u) cc[size_t(u)] = T(u, 2 * k0);
    return LaurentBand(0, std::move(cc));
}

const std::vector<LaurentBand>& RecursionEngine::q_chart(const Correlator& W, int af) {
    const std::vector<int> key{W.g, W.n, af};
    {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = qchart_cache_.find(key);
        if (it != qchart_cache_.end()) return it->second;
    }
    const int D = W.D();
    const long long rest = ipow(D, W.n - 1);
    std::vector<LaurentBand> charts;
    charts.reserve(size_t(D));
    for (int s = 0; s < D; ++s) charts.push_back(chart_band(af, W.a_of(s), W.k_of(s)));
    std::vector<LaurentBand> out(static_cast<size_t>(rest));
    for (long long r = 0; r < rest; ++r) {
        LaurentBand acc;
        for (int s0 = 0; s0 < D; ++s0) {
            const cplx cv = W.c[size_t(s0 * rest + r)];
            if (std::abs(cv) == 0.0) continue;
            acc = acc.empty() ? charts[size_t(s0)] * cv : acc + charts[size_t(s0)] * cv;
        }
        out[size_t(r)] = std::move(acc);
    }
    std::lock_guard<std::mutex> lk(mu_);
    return qchart_cache_.emplace(key, std::move(out)).first->second;
}

const Correlator& RecursionEngine::recurse(int g, int n) {
    if (g < 0 || n < 1 || 2 * g - 2 + n <= 0)
        throw DegreeError("residue recursion is defined for stable (g, n) only");
    const std::pair<int, int> key{g, n};
    {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = store_.find(key);
        if (it != store_.end()) return it->second;
    }
    Correlator W = compute(g, n);
    std::lock_guard<std::mutex> lk(mu_);
    return store_.emplace(key, std::move(W)).first->second;
}

Correlator RecursionEngine::compute(int g, int n) {
    const int nr = int(frames_.size());
    const int kcap = correlator_kcap(g, n);
    const int ord = jets_.order;
    if (2 * kcap > ord)
        throw JetOrderError("jet order too small for the correlator basis depth");

    Correlator W;
    W.g = g;
    W.n = n;
    W.n_ram = nr;
    W.kcap = kcap;
    const int D = W.D();
    const int nK = n - 1;
    const long long total = ipow(D, n);
    std::vector<cplx> raw(size_t(total), cplx{0.0});

    // Prefetch every stable sub-correlator so the memo store is filled before
    // the band loops below start borrowing references into it.
    for (int g1 = 0; g1 <= g; ++g1)
        for (int sz = 0; sz <= nK; ++sz) {
            const int n1 = sz + 1, g2 = g - g1, n2 = nK - sz + 1;
            if ((g1 == 0 && n1 == 1) || (g2 == 0 && n2 == 1)) continue;
            if (2 * g1 - 2 + n1 > 0 && !(g1 == 0 && n1 == 2)) recurse(g1, n1);
            if (2 * g2 - 2 + n2 > 0 && !(g2 == 0 && n2 == 2)) recurse(g2, n2);
        }
    if (g >= 1 && !(g == 1 && nK == 0)) recurse(g - 1, nK + 2);

    std::vector<int> slots(static_cast<size_t>(n));
    std::vector<int> sub1, sub2;

    // Adds the k-extraction of one assembled bracket band (already divided by
    // 4Y) into the raw tensor at the given slot assignment.
    auto scatter = [&](int aFr, const LaurentBand& P) {
        for (int k = 0; k <= kcap; ++k) {
            const cplx v = band_coeff0(P, -2 * k);
            if (v == cplx{0.0}) continue;
            slots[0] = W.slot(aFr, k);
            raw[size_t(W.flat(slots))] += -(1.0 / double(2 * k + 1)) * v;
        }
    };

    for (int a = 0; a < nr; ++a) {
        const LaurentBand& R = inv4Y_[size_t(a)];

        // R shifted by even powers and negated: the full contribution of a
        // coupling factor in the qbar role (or of both coupling factors).
        std::vector<LaurentBand> negRshift(size_t(2 * kcap + 1));
        for (int t = 0; t <= 2 * kcap; ++t) negRshift[size_t(t)] = R.shifted(2 * t) * cplx{-1.0};

        for (int g1 = 0; g1 <= g; ++g1)
            for (unsigned mask = 0; mask < (1u << nK); ++mask) {
                const int sz = std::popcount(mask);
                const int n1 = sz + 1, g2 = g - g1, n2 = nK - sz + 1;
                if ((g1 == 0 && n1 == 1) || (g2 == 0 && n2 == 1)) continue;
                const bool b1 = (g1 == 0 && n1 == 2), b2 = (g2 == 0 && n2 == 2);

                std::vector<int> posI, posJ;
                for (int j = 0; j < nK; ++j) (((mask >> j) & 1u) ? posI : posJ).push_back(j + 1);

                const Correlator* W1 = b1 ? nullptr : &recurse(g1, n1);
                const Correlator* W2 = b2 ? nullptr : &recurse(g2, n2);
                const std::vector<LaurentBand>* G1 = b1 ? nullptr : &q_chart(*W1, a);

                // Factor in the qbar role, premultiplied by 1/(4Y) and by the
                // sign of the argument flip on a one-form.
                std::vector<LaurentBand> F2;
                if (!b2) {
                    const std::vector<LaurentBand>& G2 = q_chart(*W2, a);
                    F2.resize(G2.size());
                    for (size_t i = 0; i < G2.size(); ++i)
                        if (!G2[i].empty()) F2[i] = (G2[i].flip_sign_arg() * cplx{-1.0}) * R;
                }

                const long long lim1 = b1 ? (kcap + 1) : ipow(W1->D(), sz);
                const long long lim2 = b2 ? (kcap + 1) : ipow(W2->D(), nK - sz);
                for (long long i1 = 0; i1 < lim1; ++i1) {
                    if (b1) {
                        slots[size_t(posI[0])] = W.slot(a, int(i1));
                    } else {
                        decode(i1, W1->D(), sz, sub1);
                        for (int t = 0; t < sz; ++t)
                            slots[size_t(posI[size_t(t)])] =
                                W.slot(W1->a_of(sub1[size_t(t)]), W1->k_of(sub1[size_t(t)]));
                        if ((*G1)[size_t(i1)].empty()) continue;
                    }
                    for (long long i2 = 0; i2 < lim2; ++i2) {
                        if (b2) {
                            slots[size_t(posJ[0])] = W.slot(a, int(i2));
                        } else {
                            if (F2[size_t(i2)].empty()) continue;
                            decode(i2, W2->D(), nK - sz, sub2);
                            for (int t = 0; t < nK - sz; ++t)
                                slots[size_t(posJ[size_t(t)])] =
                                    W.slot(W2->a_of(sub2[size_t(t)]), W2->k_of(sub2[size_t(t)]));
                        }
                        if (b1 && b2) {
                            scatter(a, negRshift[size_t(i1 + i2)]);
                        } else if (b1) {
                            scatter(a, F2[size_t(i2)].shifted(2 * int(i1)));
                        } else if (b2) {
                            scatter(a, (*G1)[size_t(i1)] * negRshift[size_t(i2)]);
                        } else {
                            scatter(a, (*G1)[size_t(i1)] * F2[size_t(i2)]);
                        }
                    }
                }
            }

        // Glued term: the (g-1)-correlator carrying both recursion points.
        if (g >= 1) {
            if (g == 1 && nK == 0) {
                // W^{(0)}_2(q, qbar): principal part plus the regular kernel
                // part evaluated on the antidiagonal, with the argument-flip
                // sign of the second one-form slot.
                const auto& H = jets_.T[size_t(a)][size_t(a)];
                std::vector<cplx> cc(size_t(ord + 3), cplx{0.0});
                cc[0] = cplx{-0.25};
                for (int u = 0; u <= ord; ++u) {
                    cplx s{0.0};
                    for (int j = 0; j <= u; ++j)
                        s += H(u - j, j) * ((j % 2 == 0) ? 1.0 : -1.0);
                    cc[size_t(u + 2)] = -s;
                }
                scatter(a, LaurentBand(-2, std::move(cc)) * R);
            } else {
                const Correlator& W3 = recurse(g - 1, nK + 2);
                const int D3 = W3.D();
                const long long rest = ipow(D3, nK);
                std::vector<LaurentBand> charts3, neg3;
                charts3.reserve(size_t(D3));
                neg3.reserve(size_t(D3));
                for (int s = 0; s < D3; ++s) {
                    charts3.push_back(chart_band(a, W3.a_of(s), W3.k_of(s)));
                    neg3.push_back(charts3.back().flip_sign_arg() * cplx{-1.0});
                }
                for (int s0 = 0; s0 < D3; ++s0)
                    for (int s1 = 0; s1 < D3; ++s1) {
                        const LaurentBand prod = charts3[size_t(s0)] * neg3[size_t(s1)] * R;
                        // Extract once, scatter over every rest assignment.
                        std::vector<cplx> w(size_t(kcap + 1));
                        for (int k = 0; k <= kcap; ++k) w[size_t(k)] = band_coeff0(prod, -2 * k);
                        for (long long r = 0; r < rest; ++r) {
                            const cplx c3 = W3.c[size_t((s0 * (long long)D3 + s1) * rest + r)];
                            if (std::abs(c3) == 0.0) continue;
                            decode(r, D3, nK, sub1);
                            for (int t = 0; t < nK; ++t)
                                slots[size_t(t + 1)] =
                                    W.slot(W3.a_of(sub1[size_t(t)]), W3.k_of(sub1[size_t(t)]));
                            for (int k = 0; k <= kcap; ++k) {
                                if (w[size_t(k)] == cplx{0.0}) continue;
                                slots[0] = W.slot(a, k);
                                raw[size_t(W.flat(slots))] +=
                                    -(1.0 / double(2 * k + 1)) * w[size_t(k)] * c3;
                            }
                        }
                    }
            }
        }
    }

    // Full symmetrization over all n slots, recording the removed defect.
    std::vector<cplx> sym(raw.size(), cplx{0.0});
    double asym = 0.0, amax = 0.0;
    std::vector<int> sl, perm;
    for (long long idx = 0; idx < total; ++idx) {
        decode(idx, D, n, sl);
        if (!std::is_sorted(sl.begin(), sl.end())) continue;
        perm = sl;
        cplx avg{0.0};
        int cnt = 0;
        do {
            avg += raw[size_t(W.flat(perm))];
            ++cnt;
        } while (std::next_permutation(perm.begin(), perm.end()));
        avg /= double(cnt);
        amax = std::max(amax, std::abs(avg));
        perm = sl;
        do {
            const long long f = W.flat(perm);
            asym = std::max(asym, std::abs(raw[size_t(f)] - avg));
            sym[size_t(f)] = avg;
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    if (asym > 1e-8 * std::max(1.0, amax))
        throw NonSymmetricResultError("correlator tensor failed the symmetry check");
    W.asymmetry = asym;
    W.c = std::move(sym);
    return W;
}

std::vector<cplx> xi_moments(const CurveModel& m, const LocalFrame& fr, const KernelEval& B,
                             const CurvePoint& p, int kmax, int samples) {
    const double rho = 0.5 * fr.q_radius;
    const double step = 2.0 * M_PI / double(samples);
    std::vector<cplx> vals(static_cast<size_t>(samples));
    for (int j = 0; j < samples; ++j) {
        const cplx t = rho * std::exp(cplx{0.0, step * double(j)});
        vals[size_t(j)] = B(p, fr.point(m, t)) * fr.dxds(t);
    }
    std::vector<cplx> out(size_t(kmax + 1));
    for (int k = 0; k <= kmax; ++k) {
        cplx s{0.0};
        for (int j = 0; j < samples; ++j)
            s += vals[size_t(j)] * std::exp(cplx{0.0, -step * double(j) * double(2 * k)});
        out[size_t(k)] = s / (double(samples) * std::pow(rho, 2 * k));
    }
    return out;
}

cplx correlator_eval(const CurveModel& m, const std::vector<LocalFrame>& frames,
                     const KernelEval& B, const Correlator& W,
                     const std::vector<CurvePoint>& pts, int samples) {
    if (int(pts.size()) != W.n)
        throw DegreeError("correlator evaluation needs exactly n points");
    if (W.D() == 0 || W.c.empty()) return cplx{0.0};
    const int D = W.D();
    std::vector<std::vector<cplx>> xi(pts.size(), std::vector<cplx>(size_t(D)));
    for (size_t i = 0; i < pts.size(); ++i)
        for (int a = 0; a < W.n_ram; ++a) {
            const std::vector<cplx> mo = xi_moments(m, frames[size_t(a)], B, pts[i], W.kcap, samples);
            for (int k = 0; k <= W.kcap; ++k) xi[i][size_t(W.slot(a, k))] = mo[size_t(k)];
        }
    cplx sum{0.0};
    std::vector<int> sl;
    for (long long idx = 0; idx < (long long)W.c.size(); ++idx) {
        const cplx cv = W.c[size_t(idx)];
        if (std::abs(cv) == 0.0) continue;
        decode(idx, D, W.n, sl);
        cplx prod = cv;
        for (int i = 0; i < W.n; ++i) prod *= xi[size_t(i)][size_t(sl[size_t(i)])];
        sum += prod;
    }
    return sum;
}

cplx w03_eval(const CurveModel& m, const std::vector<LocalFrame>& frames, const KernelEval& B,
              const CurvePoint& p0, const CurvePoint& p1, const CurvePoint& p2) {
    cplx sum{0.0};
    for (const LocalFrame& fr : frames) {
        const cplx e0 = xi_moments(m, fr, B, p0, 0)[0];
        const cplx e1 = xi_moments(m, fr, B, p1, 0)[0];
        const cplx e2 = xi_moments(m, fr, B, p2, 0)[0];
        sum += e0 * e1 * e2 / (2.0 * fr.yprime());
    }
    return sum;
}

cplx w04_eval(const CurveModel& m, const std::vector<LocalFrame>& frames, const BergmanJets& jets,
              const KernelEval& B, const CurvePoint& p0, const CurvePoint& p1,
              const CurvePoint& p2, const CurvePoint& p3) {
    const int nr = int(frames.size());
    const std::vector<CurvePoint> pts{p0, p1, p2, p3};
    // e[a][i] = (xi_{a,0}(p_i), xi_{a,1}(p_i)); the second entry carries the
    // curvature of the kernel at the ramification point.
    std::vector<std::vector<std::array<cplx, 2>>> e(static_cast<size_t>(nr));
    for (int a = 0; a < nr; ++a) {
        e[size_t(a)].resize(pts.size());
        for (size_t i = 0; i < pts.size(); ++i) {
            const std::vector<cplx> mo = xi_moments(m, frames[size_t(a)], B, pts[i], 1);
            e[size_t(a)][i] = {mo[0], mo[1]};
        }
    }
    cplx sum{0.0};
    // Pairings of the four points into (0, j) at a and (k, l) at b.
    static const int cyc[3][3] = {{1, 2, 3}, {2, 3, 1}, {3, 1, 2}};
    for (int a = 0; a < nr; ++a)
        for (int b = 0; b < nr; ++b) {
            if (a == b) continue;
            const cplx Bab = jets.cross_value(a, b);
            const cplx ya = 2.0 * frames[size_t(a)].yprime();
            const cplx yb = 2.0 * frames[size_t(b)].yprime();
            for (const auto& p : cyc)
                sum += Bab * (e[size_t(a)][0][0] * e[size_t(a)][size_t(p[0])][0] / ya) *
                       (e[size_t(b)][size_t(p[1])][0] * e[size_t(b)][size_t(p[2])][0] / yb);
        }
    for (int a = 0; a < nr; ++a) {
        const cplx y1 = frames[size_t(a)].yprime();
        const cplx y3 = 6.0 * frames[size_t(a)].y3();
        const cplx pref = 1.0 / (8.0 * y1 * y1);
        const cplx prod0 = e[size_t(a)][0][0] * e[size_t(a)][1][0] * e[size_t(a)][2][0] *
                           e[size_t(a)][3][0];
        sum += pref * (jets.SB[size_t(a)] - y3 / y1) * prod0;
        for (int c = 0; c < 4; ++c) {
            cplx t = 2.0 * e[size_t(a)][size_t(c)][1];
            for (int i = 0; i < 4; ++i)
                if (i != c) t *= e[size_t(a)][size_t(i)][0];
            sum += pref * t;
        }
    }
    return sum;
}

} // namespace skrec
