#ifndef SKREC_SERIES_HPP
#define SKREC_SERIES_HPP

// Truncated power series and Laurent bands over complex doubles.
//
// Validity discipline: a PowerSeries stores exactly the coefficients that are
// trusted (size() == number of trusted orders), and every operation returns a
// result trimmed to the window it can certify.  A LaurentBand additionally
// carries its leading exponent `lo`; coefficients below `lo` are exactly zero
// while coefficients above the stored window are *unknown* — asking for one
// throws JetOrderError instead of silently returning garbage.  This is what
// lets the residue engine prove it computed enough jet orders.

#include <vector>

#include "skrec/errors.hpp"
#include "skrec/numutil.hpp"

namespace skrec {

class PowerSeries {
  public:
    PowerSeries() = default;
    explicit PowerSeries(std::vector<cplx> coeffs) : c_(std::move(coeffs)) {}
    static PowerSeries zero(int n) { return PowerSeries(std::vector<cplx>(n, cplx{0.0})); }
    static PowerSeries identity(int n); // s

    int size() const { return static_cast<int>(c_.size()); } // trusted orders 0..size()-1
    cplx operator[](int k) const { return (k >= 0 && k < size()) ? c_[k] : cplx{0.0}; }
    cplx& at(int k) { return c_.at(k); }
    const std::vector<cplx>& coeffs() const { return c_; }

    // Truncate / zero-extend to exactly n trusted coefficients.  Extending is
    // only legitimate for series known to be exact (e.g. polynomials).
    PowerSeries resized(int n) const;

    PowerSeries operator+(const PowerSeries& o) const;
    PowerSeries operator-(const PowerSeries& o) const;
    PowerSeries operator*(const PowerSeries& o) const;
    PowerSeries operator*(cplx s) const;

    PowerSeries derivative() const;
    PowerSeries integral() const;          // antiderivative vanishing at 0
    PowerSeries reciprocal() const;        // requires c_[0] != 0
    PowerSeries sqrt_branch(cplx b0) const; // square root whose constant term is b0 (b0^2 == c_[0])
    PowerSeries compose(const PowerSeries& g) const; // this(g(s)), requires g(0) == 0
    PowerSeries reversion() const;         // g with this(g(s)) = s; requires c0==0, c1!=0
    PowerSeries flip_sign_arg() const;     // f(-s)

    cplx eval(cplx s) const;               // Horner on the trusted window

  private:
    std::vector<cplx> c_;
};

class LaurentBand {
  public:
    LaurentBand() : lo_(0) {}
    LaurentBand(int lo, std::vector<cplx> coeffs) : lo_(lo), c_(std::move(coeffs)) {}
    static LaurentBand from_power(const PowerSeries& p) { return LaurentBand(0, p.coeffs()); }

    int lo() const { return lo_; }
    int hi() const { return lo_ + static_cast<int>(c_.size()) - 1; } // last trusted exponent
    bool empty() const { return c_.empty(); }

    // Coefficient of s^e: exact zero below lo, JetOrderError above hi.
    cplx coeff(int e) const;
    cplx residue() const { return coeff(-1); }

    LaurentBand operator+(const LaurentBand& o) const;
    LaurentBand operator*(const LaurentBand& o) const;
    LaurentBand operator*(cplx s) const;
    LaurentBand reciprocal() const;        // leading coefficient must be nonzero
    LaurentBand flip_sign_arg() const;     // f(-s)
    LaurentBand shifted(int k) const;      // s^k * f(s)

    // Drop exact-zero leading coefficients (tightens lo; keeps window honest).
    LaurentBand normalized(double tol = 0.0) const;

  private:
    int lo_;
    std::vector<cplx> c_; // c_[k] is the coefficient of s^{lo_+k}
};

} // namespace skrec

#endif // SKREC_SERIES_HPP
