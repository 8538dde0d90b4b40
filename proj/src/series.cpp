#include "skrec/series.hpp"

#include <algorithm>
#include <cmath>

namespace skrec {

PowerSeries PowerSeries::identity(int n) {
    std::vector<cplx> c(std::max(n, 2), cplx{0.0});
    c[1] = 1.0;
    return PowerSeries(std::move(c));
}

PowerSeries PowerSeries::resized(int n) const {
    std::vector<cplx> c(n, cplx{0.0});
    for (int k = 0; k < std::min(n, size()); ++k) c[k] = c_[k];
    return PowerSeries(std::move(c));
}

PowerSeries PowerSeries::operator+(const PowerSeries& o) const {
    int n = std::min(size(), o.size());
    std::vector<cplx> c(n);
    for (int k = 0; k < n; ++k) c[k] = c_[k] + o.c_[k];
    return PowerSeries(std::move(c));
}

PowerSeries PowerSeries::operator-(const PowerSeries& o) const {
    int n = std::min(size(), o.size());
    std::vector<cplx> c(n);
    for (int k = 0; k < n; ++k) c[k] = c_[k] - o.c_[k];
    return PowerSeries(std::move(c));
}

PowerSeries PowerSeries::operator*(const PowerSeries& o) const {
    int n = std::min(size(), o.size());
    std::vector<cplx> c(n, cplx{0.0});
    for (int i = 0; i < n; ++i)
        for (int j = 0; i + j < n && j < o.size(); ++j) c[i + j] += c_[i] * o.c_[j];
    return PowerSeries(std::move(c));
}

PowerSeries PowerSeries::operator*(cplx s) const {
    std::vector<cplx> c = c_;
    for (auto& v : c) v *= s;
    return PowerSeries(std::move(c));
}

PowerSeries PowerSeries::derivative() const {
    if (size() <= 1) return PowerSeries::zero(std::max(size() - 1, 0));
    std::vector<cplx> c(size() - 1);
    for (int k = 1; k < size(); ++k) c[k - 1] = double(k) * c_[k];
    return PowerSeries(std::move(c));
}

PowerSeries PowerSeries::integral() const {
    std::vector<cplx> c(size() + 1, cplx{0.0});
    for (int k = 0; k < size(); ++k) c[k + 1] = c_[k] / double(k + 1);
    return PowerSeries(std::move(c));
}

PowerSeries PowerSeries::reciprocal() const {
    if (size() == 0 || std::abs(c_[0]) == 0.0)
        throw SeriesDivergenceError("reciprocal of a series with vanishing constant term");
    std::vector<cplx> b(size());
    b[0] = 1.0 / c_[0];
    for (int n = 1; n < size(); ++n) {
        cplx acc = 0.0;
        for (int k = 1; k <= n; ++k) acc += c_[k] * b[n - k];
        b[n] = -acc / c_[0];
    }
    return PowerSeries(std::move(b));
}

PowerSeries PowerSeries::sqrt_branch(cplx b0) const {
    if (size() == 0) throw SeriesDivergenceError("sqrt of empty series");
    if (std::abs(b0 * b0 - c_[0]) > 1e-10 * (1.0 + std::abs(c_[0])))
        throw SeriesDivergenceError("sqrt_branch: b0^2 does not match the constant term");
    if (std::abs(b0) == 0.0)
        throw SeriesDivergenceError("sqrt_branch: vanishing constant term (odd-order zero?)");
    std::vector<cplx> b(size());
    b[0] = b0;
    for (int n = 1; n < size(); ++n) {
        cplx acc = 0.0;
        for (int k = 1; k < n; ++k) acc += b[k] * b[n - k];
        b[n] = (c_[n] - acc) / (2.0 * b0);
    }
    return PowerSeries(std::move(b));
}

PowerSeries PowerSeries::compose(const PowerSeries& g) const {
    if (g.size() > 0 && std::abs(g[0]) > 1e-14)
        throw SeriesDivergenceError("compose: inner series must vanish at 0");
    int n = std::min(size(), g.size());
    if (n == 0) return PowerSeries::zero(0);
    PowerSeries acc = PowerSeries::zero(n);
    for (int k = std::min(size(), n) - 1; k >= 0; --k) {
        acc = acc * g.resized(n);
        acc.at(0) += c_[k];
    }
    return acc;
}

PowerSeries PowerSeries::reversion() const {
    if (size() < 2 || std::abs(c_[0]) > 1e-14 || std::abs(c_[1]) == 0.0)
        throw SeriesDivergenceError("reversion needs f(0)=0, f'(0)!=0");
    int n = size();
    PowerSeries g = PowerSeries::zero(n);
    g.at(1) = 1.0 / c_[1];
    // Determine g order by order from [s^k] f(g(s)) = delta_{k,1}.
    for (int k = 2; k < n; ++k) {
        PowerSeries fg = compose(g);
        // [s^k] f(g) currently misses only the c_[1]*g_k term.
        g.at(k) = -fg[k] / c_[1];
    }
    return g;
}

PowerSeries PowerSeries::flip_sign_arg() const {
    std::vector<cplx> c = c_;
    for (int k = 1; k < size(); k += 2) c[k] = -c[k];
    return PowerSeries(std::move(c));
}

cplx PowerSeries::eval(cplx s) const {
    cplx acc = 0.0;
    for (int k = size() - 1; k >= 0; --k) acc = acc * s + c_[k];
    return acc;
}

// ---------------------------------------------------------------------------

cplx LaurentBand::coeff(int e) const {
    if (e < lo_) return cplx{0.0};
    if (e > hi())
        throw JetOrderError("coefficient of s^" + std::to_string(e) +
                            " requested, trusted window ends at s^" + std::to_string(hi()) +
                            " (increase the jet order)");
    return c_[e - lo_];
}

LaurentBand LaurentBand::operator+(const LaurentBand& o) const {
    if (empty()) return o;
    if (o.empty()) return *this;
    int lo = std::min(lo_, o.lo_);
    int hi_trusted = std::min(hi(), o.hi());
    if (hi_trusted < lo)
        throw JetOrderError("adding Laurent bands with disjoint trusted windows");
    std::vector<cplx> c(hi_trusted - lo + 1, cplx{0.0});
    for (int e = lo; e <= hi_trusted; ++e) {
        cplx v = 0.0;
        if (e >= lo_ && e <= hi()) v += c_[e - lo_];
        if (e >= o.lo_ && e <= o.hi()) v += o.c_[e - o.lo_];
        c[e - lo] = v;
    }
    return LaurentBand(lo, std::move(c));
}

LaurentBand LaurentBand::operator*(const LaurentBand& o) const {
    if (empty() || o.empty()) return LaurentBand{};
    int lo = lo_ + o.lo_;
    int n = std::min(static_cast<int>(c_.size()), static_cast<int>(o.c_.size()));
    std::vector<cplx> c(n, cplx{0.0});
    for (int i = 0; i < static_cast<int>(c_.size()); ++i)
        for (int j = 0; j < static_cast<int>(o.c_.size()); ++j) {
            if (i + j < n) c[i + j] += c_[i] * o.c_[j];
        }
    return LaurentBand(lo, std::move(c));
}

LaurentBand LaurentBand::operator*(cplx s) const {
    std::vector<cplx> c = c_;
    for (auto& v : c) v *= s;
    return LaurentBand(lo_, std::move(c));
}

LaurentBand LaurentBand::reciprocal() const {
    if (empty() || std::abs(c_[0]) == 0.0)
        throw SeriesDivergenceError("Laurent reciprocal needs an exact nonzero leading term");
    PowerSeries p{std::vector<cplx>(c_)};
    return LaurentBand(-lo_, p.reciprocal().coeffs());
}

LaurentBand LaurentBand::flip_sign_arg() const {
    std::vector<cplx> c = c_;
    for (size_t k = 0; k < c.size(); ++k)
        if ((lo_ + static_cast<int>(k)) % 2 != 0) c[k] = -c[k];
    return LaurentBand(lo_, std::move(c));
}

LaurentBand LaurentBand::shifted(int k) const { return LaurentBand(lo_ + k, c_); }

LaurentBand LaurentBand::normalized(double tol) const {
    size_t off = 0;
    while (off < c_.size() && std::abs(c_[off]) <= tol) ++off;
    if (off == c_.size()) return LaurentBand(hi() + 1, {});
    return LaurentBand(lo_ + static_cast<int>(off),
                       std::vector<cplx>(c_.begin() + off, c_.end()));
}

} // namespace skrec
