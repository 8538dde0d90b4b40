#ifndef SKREC_HOMOLOGY_HPP
#define SKREC_HOMOLOGY_HPP

// Construction of a canonical homology basis.
//
// Candidate cycles are "dumbbells": a circle around one branch x-value, a
// connector, a circle around a second one, and the connector back, lifted to
// the covering starting from a chosen fiber.  If a lift fails to close after
// one traversal it is traversed twice (the tower's deck group is 2x2, so
// every dumbbell closes after at most two).  Candidates are deduped by their
// raw period vectors, their pairwise intersection numbers are counted on
// fine polylines with fiber-matched crossings, and an integer symplectic
// Gram-Schmidt (always pivoting on the smallest usable pairing) produces
// cycles a_1..a_g, b_1..b_g with <a_i, b_j> = delta_ij exactly.

#include <Eigen/Dense>
#include <memory>

#include "skrec/contour.hpp"

namespace skrec {

struct Cycle {
    XPath path;      // closed x-projection (possibly a doubled traversal)
    Fiber start;     // fiber over the starting point, fixing the lift
    int turns = 1;   // 1 or 2 traversals of the underlying dumbbell
};

struct SymplecticFrame {
    std::vector<Cycle> candidates;          // deduped generating cycles
    Eigen::MatrixXi intersections;          // pairwise <c_i, c_j>
    // frame cycles as integer combinations of candidates (rows: a_1..a_g then b_1..b_g)
    Eigen::MatrixXi U;
    Eigen::MatrixXcd cand_periods;          // candidates x raw differentials
    int genus = 0;
    bool orientation_swapped = false;       // set by period normalization if a<->b swapped

    int n_cand() const { return static_cast<int>(candidates.size()); }
    // raw periods of frame cycle r (r < g: a_r; else b_{r-g})
    Eigen::VectorXcd frame_period(int r) const {
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(cand_periods.cols());
        for (int c = 0; c < n_cand(); ++c)
            if (U(r, c) != 0) acc += double(U(r, c)) * cand_periods.row(c).transpose();
        return acc;
    }
    // (a, b) -> (b, -a): keeps <a_i, b_j> = +delta_ij
    void swap_ab() {
        Eigen::MatrixXi V = U;
        U.topRows(genus) = V.bottomRows(genus);
        U.bottomRows(genus) = -V.topRows(genus);
        orientation_swapped = !orientation_swapped;
    }
};

// Intersection number of two lifted cycles (exposed for tests).
int intersection_number(const CurveModel& m, const ContinuedPath& c1, const ContinuedPath& c2,
                        double scale);

SymplecticFrame build_symplectic_frame(const CurveModel& m, const CurveValidation& val);

// Integrate a vector integrand over a frame cycle (integer combination of
// candidate lifts).
std::vector<cplx> integrate_over_cycle(const CurveModel& m, const SymplecticFrame& fr,
                                       int row, int dim, const VectorIntegrand& f,
                                       double tol);

} // namespace skrec

#endif // SKREC_HOMOLOGY_HPP
