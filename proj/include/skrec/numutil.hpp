#ifndef SKREC_NUMUTIL_HPP
#define SKREC_NUMUTIL_HPP

// Small numeric helpers shared across the library.

#include <complex>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

namespace skrec {

using cplx = std::complex<double>;

inline constexpr double PI = 3.141592653589793238462643383279502884;
inline const cplx I{0.0, 1.0};
inline const cplx TWO_PI_I{0.0, 2.0 * PI};

inline bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// max |v_i| of a complex vector
inline double max_abs(const std::vector<cplx>& v) {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
}

// Relative deviation |a-b| / max(scale, |a|, |b|); scale guards against
// comparing two tiny quantities where absolute error is what matters.
inline double rel_dev(cplx a, cplx b, double scale = 1.0) {
    double denom = std::max({scale, std::abs(a), std::abs(b)});
    return std::abs(a - b) / denom;
}

// Parallelism budget for the heavier tensor assemblies.  Reads
// SK_RECURSION_THREADS once; values < 1 (or absence) mean "single thread".
inline int thread_budget() {
    static const int budget = [] {
        const char* s = std::getenv("SK_RECURSION_THREADS");
        if (!s) return 1;
        int v = std::atoi(s);
        return v >= 1 ? v : 1;
    }();
    return budget;
}

} // namespace skrec

#endif // SKREC_NUMUTIL_HPP
