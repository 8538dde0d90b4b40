#ifndef SKREC_ERRORS_HPP
#define SKREC_ERRORS_HPP

// Exception taxonomy for the spectral-curve pipeline.  Every failure mode that
// a caller can meaningfully react to gets its own type; all of them derive
// from Error (itself a std::runtime_error) so coarse handlers still work.
// Messages are expected to carry the offending quantities (values, distances,
// tolerances) so that a failing run is diagnosable from the message alone.

#include <stdexcept>
#include <string>

namespace skrec {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define SKREC_DEFINE_ERROR(NAME)                                             \
    struct NAME : Error {                                                     \
        explicit NAME(const std::string& msg) : Error(#NAME ": " + msg) {}    \
    }

// curve validation
SKREC_DEFINE_ERROR(RootSeparationError);     // clustered roots / near-degenerate ramification
SKREC_DEFINE_ERROR(DegreeError);             // polynomial degrees outside the supported model

// series / jet arithmetic
SKREC_DEFINE_ERROR(SeriesDivergenceError);   // series op needs coefficients beyond the trusted window
SKREC_DEFINE_ERROR(JetOrderError);           // requested jet order exceeds what was computed
SKREC_DEFINE_ERROR(ExtrapolationError);      // Richardson stencil failed to converge

// analytic continuation / homology
SKREC_DEFINE_ERROR(ContinuationAmbiguityError); // sheet tracking could not certify a branch
SKREC_DEFINE_ERROR(RankError);               // candidate cycles fail to span / no unimodular pivot
SKREC_DEFINE_ERROR(CrossingDegeneracyError); // tangential or overlapping path crossing

// quadrature / periods
SKREC_DEFINE_ERROR(QuadratureError);         // adaptive refinement hit its depth limit
SKREC_DEFINE_ERROR(PoleOnPathError);         // integrand singularity too close to a contour
SKREC_DEFINE_ERROR(IllConditionedError);     // period matrix (or similar solve) near-singular

// theta / Bergman kernel
SKREC_DEFINE_ERROR(ThetaTruncationError);    // lattice sum cannot reach the requested tail bound
SKREC_DEFINE_ERROR(DegenerateCharacteristicError); // no usable odd characteristic
SKREC_DEFINE_ERROR(CorrectionRankError);     // kernel correction solve inconsistent/ill-posed
SKREC_DEFINE_ERROR(NonSymmetricResultError); // symmetry residual above tolerance

// recursion / special-geometry plumbing
SKREC_DEFINE_ERROR(FrameMissingError);       // operation needs local frames that were not built
SKREC_DEFINE_ERROR(ModeError);               // operation not defined for this curve mode

// deformation family
SKREC_DEFINE_ERROR(FrameTransportError);     // frame cannot be reused across the family step
SKREC_DEFINE_ERROR(NewtonDivergenceError);   // chart inversion failed to converge
SKREC_DEFINE_ERROR(StepTooLargeError);       // finite-difference step leaves the trust region

#undef SKREC_DEFINE_ERROR

} // namespace skrec

#endif // SKREC_ERRORS_HPP
