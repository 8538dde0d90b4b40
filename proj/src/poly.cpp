#include "skrec/poly.hpp"

#include <Eigen/Dense>
#include <algorithm>

#include "skrec/errors.hpp"

namespace skrec {

void Poly::trim() {
    while (!c_.empty() && std::abs(c_.back()) == 0.0) c_.pop_back();
}

Poly Poly::from_roots(const std::vector<cplx>& roots, cplx lead) {
    std::vector<cplx> c{lead}; // ascending coefficients
    for (cplx r : roots) {
        std::vector<cplx> n(c.size() + 1, cplx{0.0});
        for (size_t k = 0; k < c.size(); ++k) {
            n[k + 1] += c[k];   // x * c_k x^k
            n[k] -= r * c[k];   // -r * c_k x^k
        }
        c = std::move(n);
    }
    return Poly(std::move(c));
}

cplx Poly::eval(cplx x) const {
    cplx acc = 0.0;
    for (int k = static_cast<int>(c_.size()) - 1; k >= 0; --k) acc = acc * x + c_[k];
    return acc;
}

Poly Poly::derivative() const {
    if (c_.size() <= 1) return Poly{};
    std::vector<cplx> d(c_.size() - 1);
    for (size_t k = 1; k < c_.size(); ++k) d[k - 1] = double(k) * c_[k];
    return Poly(std::move(d));
}

Poly Poly::translate(cplx a) const {
    // Repeated synthetic division by (x - a); remainders are the ascending
    // Taylor coefficients of P at a.
    if (is_zero()) return Poly{};
    std::vector<cplx> work = c_;
    std::vector<cplx> out(c_.size());
    int d = degree();
    for (int k = 0; k <= d; ++k) {
        // divide work (degree d-k) by (x - a): Horner pass leaves the
        // quotient in work[0..d-k-1] and the remainder P_k(a) in carry
        cplx carry = work[d - k];
        for (int j = d - k - 1; j >= 0; --j) {
            cplx t = work[j];
            work[j] = carry;
            carry = t + a * carry;
        }
        out[k] = carry;
    }
    return Poly(std::move(out));
}

Poly Poly::operator+(const Poly& o) const {
    std::vector<cplx> r(std::max(c_.size(), o.c_.size()), cplx{0.0});
    for (size_t k = 0; k < c_.size(); ++k) r[k] += c_[k];
    for (size_t k = 0; k < o.c_.size(); ++k) r[k] += o.c_[k];
    return Poly(std::move(r));
}

Poly Poly::operator-(const Poly& o) const { return *this + o * cplx{-1.0}; }

Poly Poly::operator*(const Poly& o) const {
    if (is_zero() || o.is_zero()) return Poly{};
    std::vector<cplx> r(c_.size() + o.c_.size() - 1, cplx{0.0});
    for (size_t i = 0; i < c_.size(); ++i)
        for (size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
    return Poly(std::move(r));
}

Poly Poly::operator*(cplx s) const {
    std::vector<cplx> r = c_;
    for (auto& v : r) v *= s;
    return Poly(std::move(r));
}

std::vector<cplx> Poly::roots() const {
    const int n = degree();
    if (n < 1) return {};
    // Companion matrix of the monic normalization.
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) C(i, n - 1) = -c_[i] / c_[n];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw IllConditionedError("companion-matrix eigensolver failed");
    std::vector<cplx> out(n);
    const Poly dp = derivative();
    for (int i = 0; i < n; ++i) {
        cplx r = es.eigenvalues()(i);
        for (int it = 0; it < 3; ++it) { // Newton polish
            cplx d = dp.eval(r);
            if (std::abs(d) < 1e-300) break;
            cplx step = eval(r) / d;
            if (!is_finite(step) || std::abs(step) > 1.0) break;
            r -= step;
        }
        out[i] = r;
    }
    // Deterministic order: by real part, then imaginary part.
    std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

} // namespace skrec
