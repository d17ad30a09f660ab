#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pwl/identify.hpp"
#include "pwl/sim.hpp"

namespace pwl {

// Best pairing of estimated modes with reference modes under the Frobenius
// distance between stacked [A a] blocks.
struct MatchReport {
    // permutation[i] = reference mode paired with estimated mode i, or -1.
    std::vector<int> permutation;
    // Relative Frobenius error and Pearson correlation of the flattened
    // [A a] blocks, per estimated mode; NaN for unpaired modes.
    std::vector<double> per_mode_error;
    std::vector<double> per_mode_correlation;
    // Leftover mode indices on whichever side has more modes.
    std::vector<int> unmatched;
    double total_error = 0.0;  // sum of absolute errors over pairs
};

// Minimum-cost injective matching; exhaustive over permutations up to 8
// modes per side, Hungarian algorithm beyond that.
MatchReport match_modes(const ModeParams& reference, const ModeParams& estimated);

// Largest fraction of samples on which the two labelings agree under the
// best injective relabeling of one into the other.  Exhaustive up to 8
// distinct labels per side, greedy confusion-matrix matching beyond.
// Symmetric in its arguments; throws LengthMismatch on unequal lengths.
double segmentation_agreement(const std::vector<int>& labels_a,
                              const std::vector<int>& labels_b);

// Max residual ||f^(n) - sum_k coeffs[k-1] f^(n-k)|| over samples, with all
// derivative orders supplied by the caller: derivs_by_order[k][i] = f^(k) at
// sample i, k = 0..n.
double verify_ar(const std::vector<std::vector<Eigen::VectorXd>>& derivs_by_order,
                 const std::vector<Eigen::MatrixXd>& coeffs);

// Same residual on a sampled trajectory: order 0 from states, order 1 from
// stored derivatives when present, higher orders by repeated central
// differences (each order trims one sample off both ends).  The trajectory
// must be switch-free in its interior; otherwise SegmentContainsSwitch.
double verify_ar(const Trajectory& traj,
                 const std::vector<Eigen::MatrixXd>& coeffs);

}  // namespace pwl
