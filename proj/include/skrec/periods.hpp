#ifndef SKREC_PERIODS_HPP
#define SKREC_PERIODS_HPP

// Period data of a curve: raw a/b-period matrices over a symplectic frame,
// the normalization C = A^{-1} turning the raw differential basis into the
// a-normalized one, the period matrix tau = Bp * A^{-1}, and the coordinates
//
//     z_i = \oint_{a_i} theta,   w_i = \oint_{b_i} theta,
//
// where theta = y dx is the tautological 1-form of the presentation.  tau is
// symmetrized by averaging; the pre-symmetrization asymmetry is kept as a
// quality metric.  If Im(tau) comes out negative definite the frame's
// crossing-sign convention is opposite to the complex orientation, which is
// repaired exactly by b_i -> -b_i; an indefinite Im(tau) is a hard error.

#include <Eigen/Dense>

#include "skrec/homology.hpp"

namespace skrec {

struct PeriodData {
    Eigen::MatrixXcd A;   // A(i,k) = \oint_{a_i} v_k (raw differential basis)
    Eigen::MatrixXcd Bp;  // Bp(i,k) = \oint_{b_i} v_k
    Eigen::MatrixXcd C;   // A^{-1}: omega_j = sum_k C(k,j) v_k
    Eigen::MatrixXcd tau; // symmetrized Bp * A^{-1}
    Eigen::VectorXcd z, w;
    double tau_asymmetry = 0.0; // max |tau - tau^T| before symmetrization
    double cond_A = 0.0;
};

// Computes periods from the frame's cached candidate integrals; repairs the
// frame orientation in place if needed (see header comment).
PeriodData period_data(const CurveModel& m, const CurveValidation& val, SymplecticFrame& fr,
                       double tol = 1e-12);

// dx-coefficients of the a-normalized differentials omega_1..omega_g at p.
std::vector<cplx> normalized_dx(const CurveModel& m, const CurveValidation& val,
                                const Eigen::MatrixXcd& C, const CurvePoint& p);

// Abel map \int_q^p (omega_1, ..., omega_g) along an automatically routed
// path; the lift is corrected by branch-point loops until it ends on p's
// sheet.
Eigen::VectorXcd abel_map(const CurveModel& m, const CurveValidation& val,
                          const SymplecticFrame& fr, const PeriodData& pd,
                          const CurvePoint& p, const CurvePoint& q, double tol = 1e-12);

// Klein's j-invariant of a genus-1 period ratio (q-series after SL(2,Z)
// reduction into the standard fundamental domain).
cplx j_invariant(cplx tau);

} // namespace skrec

#endif // SKREC_PERIODS_HPP
