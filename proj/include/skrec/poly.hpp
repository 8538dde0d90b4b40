#ifndef SKREC_POLY_HPP
#define SKREC_POLY_HPP

// Dense univariate polynomials over the complex doubles: evaluation,
// arithmetic, and root finding (companion-matrix eigenvalues polished by a
// couple of Newton steps).  Degrees in this project stay in the single
// digits, so dense storage and O(n^2) arithmetic are the right tools.

#include <vector>

#include "skrec/numutil.hpp"

namespace skrec {

class Poly {
  public:
    Poly() = default;
    explicit Poly(std::vector<cplx> coeffs) : c_(std::move(coeffs)) { trim(); }
    static Poly from_roots(const std::vector<cplx>& roots, cplx lead = 1.0);

    // coefficient of x^k (0 beyond stored degree)
    cplx coeff(int k) const {
        return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[k] : cplx{0.0};
    }
    const std::vector<cplx>& coeffs() const { return c_; }
    int degree() const { return static_cast<int>(c_.size()) - 1; } // -1 for the zero polynomial
    bool is_zero() const { return c_.empty(); }

    cplx eval(cplx x) const;
    Poly derivative() const;
    Poly translate(cplx a) const; // P(x + a), i.e. Taylor coefficients at a

    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator*(const Poly& o) const;
    Poly operator*(cplx s) const;

    // All complex roots (with multiplicity), companion matrix + Newton polish.
    std::vector<cplx> roots() const;

  private:
    void trim();
    std::vector<cplx> c_; // c_[k] multiplies x^k
};

} // namespace skrec

#endif // SKREC_POLY_HPP
