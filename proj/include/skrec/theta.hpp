#ifndef SKREC_THETA_HPP
#define SKREC_THETA_HPP

// Riemann theta functions with half-integer characteristics,
//
//   theta[d](z, tau) = sum_{n in Z^g} exp( pi i (n+d1)^T tau (n+d1)
//                                        + 2 pi i (n+d1)^T (z+d2) ),
//
// evaluated by brute-force summation over the lattice points inside an
// ellipsoid sized from the smallest eigenvalue of Y = Im(tau) and a target
// tail bound.  The context caches the lattice offsets and the z-independent
// exponent parts, so each evaluation is a single pass over the cached points.
//
// The arguments fed to the kernel are reduced into the fundamental cell
// z -> z + m + tau n first; the Hessian of log theta is exactly invariant
// under such shifts, which is all the Bergman kernel consumes, and the
// reduction keeps the cached ellipsoid valid for every argument.

#include <Eigen/Dense>
#include <vector>

#include "skrec/numutil.hpp"

namespace skrec {

struct ThetaContext {
    Eigen::MatrixXcd tau;
    Eigen::VectorXd d1, d2;   // characteristic halves, entries in {0, 1/2}
    double sign = 1.0;        // empirical sign of the kernel formula (set by bergman)
    double tail_tol = 1e-14;
    double radius2 = 0.0;     // ellipsoid bound on pi * (n+d1+c)^T Y (n+d1+c)
    // cached summation data: row r is the offset vector (n + d1)
    Eigen::MatrixXd pts;
    Eigen::MatrixXcd ptsc;    // pts cast to complex once (evaluation workspace)
    Eigen::VectorXcd expo0;   // pi i (n+d1)^T tau (n+d1) per row
    int genus = 0;

    // linear-algebra helpers fixed at construction
    Eigen::MatrixXd Y, Yinv, X;
};

struct ThetaEval {
    cplx value{0.0};
    Eigen::VectorXcd grad;   // d/dz_i
    Eigen::MatrixXcd hess;   // d^2/dz_i dz_j
    double term_scale = 0.0; // sum |term|, for degeneracy detection
};

// Context for a given characteristic (no selection logic).
ThetaContext make_theta_context(const Eigen::MatrixXcd& tau, const Eigen::VectorXd& d1,
                                const Eigen::VectorXd& d2, double tail_tol = 1e-14);

// First lexicographic odd half-characteristic whose theta gradient at 0 has
// norm > 1e-6.  Throws DegenerateCharacteristicError when none qualifies.
ThetaContext select_odd_characteristic(const Eigen::MatrixXcd& tau, double tail_tol = 1e-14);

// Raw evaluation at z (no argument reduction; caller must keep Im z small,
// e.g. z near 0 for characteristic tests).
ThetaEval theta_eval(const ThetaContext& ctx, const Eigen::VectorXcd& z);

// Hessian of log theta[d] at z, with internal lattice reduction of z.
// Throws DegenerateCharacteristicError if theta nearly vanishes at the
// reduced argument (z on the theta divisor).
Eigen::MatrixXcd theta_log_hessian(const ThetaContext& ctx, const Eigen::VectorXcd& z);

} // namespace skrec

#endif // SKREC_THETA_HPP
