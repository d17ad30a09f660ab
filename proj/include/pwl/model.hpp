#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "pwl/errors.hpp"

namespace pwl {

// Initial set of a mode: either an explicit finite list of states or the
// whole state space.  The list order is meaningful and is preserved by every
// transformation, so callers can address individual entries by index.
struct InitialStates {
    bool unconstrained = false;
    std::vector<Eigen::VectorXd> states;

    static InitialStates all_of_space() { return {true, {}}; }
    static InitialStates of(std::vector<Eigen::VectorXd> s) {
        return {false, std::move(s)};
    }
    static InitialStates single(const Eigen::VectorXd& s) {
        return {false, {s}};
    }
};

// One affine mode x' = A x + a, y = C x + c with its admissible entry states.
struct AffineMode {
    Eigen::MatrixXd A;  // n_q x n_q
    Eigen::VectorXd a;  // n_q
    Eigen::MatrixXd C;  // p x n_q
    Eigen::VectorXd c;  // p
    InitialStates initial_states;

    int state_dim() const { return static_cast<int>(A.rows()); }
    bool is_linear(double tol = 0.0) const;
};

// Piecewise-linear system: a finite list of affine modes sharing one output
// dimension.  Mode indices are 0-based throughout the toolkit.
struct PwlSystem {
    std::vector<AffineMode> modes;
    int output_dim = 0;

    int num_modes() const { return static_cast<int>(modes.size()); }
    bool is_linear() const;
    // Throws DimensionMismatch when any mode violates the shape invariants
    // or an explicit initial-state list is empty.
    void validate() const;
};

// Linear system with state jumps: one linear mode whose trajectories may be
// restarted from any member of the finite set X0.
struct Lssj {
    int n = 0;
    Eigen::MatrixXd C;  // p x n
    Eigen::MatrixXd A;  // n x n
    std::vector<Eigen::VectorXd> X0;

    int output_dim() const { return static_cast<int>(C.rows()); }
    void validate() const;
};

// Switched autoregressive model: per mode, n coefficient matrices of size
// p x p relating f^(n) = sum_k coeffs[k-1] * f^(n-k).
struct SarsModel {
    int order = 0;
    std::vector<std::vector<Eigen::MatrixXd>> modes;

    int output_dim() const;
    void validate() const;
};

// (number of modes, total continuous dimension); comparable componentwise.
struct SystemDimension {
    int num_modes = 0;
    int total_continuous = 0;

    bool operator==(const SystemDimension&) const = default;
};

// Partial order: true when lhs is no larger in both components.
bool dimension_leq(const SystemDimension& lhs, const SystemDimension& rhs);

SystemDimension dimension(const PwlSystem& sys);
SystemDimension dimension(const Lssj& sys);

// Partition of a finite index set into ordered, disjoint, nonempty blocks.
struct Partition {
    std::vector<std::vector<int>> blocks;

    int num_blocks() const { return static_cast<int>(blocks.size()); }
};

// Throws InconsistentPartition unless the blocks cover `ground` exactly once.
void validate_partition(const Partition& partition,
                        const std::vector<int>& ground);

// Rewrites each affine mode as a linear one on an extended state (x, 1):
// drift moves into an extra column of A, offset into an extra column of C,
// and every initial state gains a trailing 1.  Output trajectories are
// unchanged.  Modes with unconstrained initial sets are rejected because the
// extended coordinate must be pinned to 1.
PwlSystem embed_affine_to_linear(const PwlSystem& sys);

// Folds a linear PWL system into a single jump-linear system: block-diagonal
// A, horizontally stacked C, and initial states zero-padded into their
// mode's block.  X0 keeps mode order first, list order second.  Requires a
// linear system with finite initial sets.
Lssj merge_to_lssj(const PwlSystem& sys);

// Wraps a jump-linear system as a one-mode linear PWL system.
PwlSystem lssj_to_pwl(const Lssj& sys);

// Columns x0, A x0, ..., A^(n-1) x0 for every initial state; the span of
// this matrix is the reachable subspace.
Eigen::MatrixXd reachability_span_matrix(const Lssj& sys);

// Stacked powers C, CA, ..., CA^(n-1).
Eigen::MatrixXd observability_matrix(const Eigen::MatrixXd& C,
                                     const Eigen::MatrixXd& A);

bool check_span_reachable(const Lssj& sys, double tol = -1.0);
bool check_observable(const Lssj& sys, double tol = -1.0);

// Two-stage reduction: restrict to the reachable span, then factor out the
// unobservable subspace.  Output dimension equals the rank of the associated
// Hankel matrix; output sequences C A^k x0 are preserved per initial state,
// and X0 keeps its length and order.
Lssj reduce_minimal(const Lssj& sys, double tol = -1.0);

// Splits a jump-linear system into one mode per partition block.  Each block
// brings its switch states; the mode's state space is the span of their
// forward orbits, with A and C restricted to it.  switch_states pairs a
// piece index with the state that starts the piece; the partition must cover
// exactly those indices.
PwlSystem split_by_partition(
    const Lssj& sys, const Partition& partition,
    const std::vector<std::pair<int, Eigen::VectorXd>>& switch_states,
    double tol = -1.0);

// Equivalent PWL system over the stacked regressor (f^(n-1), ..., f), one
// mode per autoregressive mode: block-companion A, output selecting the last
// block, unconstrained initial sets.
PwlSystem sars_to_pwl(const SarsModel& sars);

}  // namespace pwl
