#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "pwl/model.hpp"

namespace pwl {

// Output coefficient sequences C A^k x0, one sequence per analytic piece.
// sequences[piece][k] is a p-vector, k = 0..k_max.
struct MarkovTable {
    std::vector<std::vector<Eigen::VectorXd>> sequences;

    int num_pieces() const { return static_cast<int>(sequences.size()); }
    int k_max() const;
    int p() const;
};

// C A^k x0 for k = 0..k_max.
std::vector<Eigen::VectorXd> markov_sequence(const Lssj& sys,
                                             const Eigen::VectorXd& x0,
                                             int k_max);

// One piece per entry of X0, in order.
MarkovTable markov_table(const Lssj& sys, int k_max);

// Finite block-Hankel matrix of output coefficients.  Rows run over
// derivative order i = 0..L and output channel r = 0..p-1 (row i*p + r);
// columns are grouped by piece in ascending order of `pieces`, each group
// holding shifts j = 0..M (column group*(M+1) + j).  Entry ((i,r),(piece,j))
// equals sequences[piece][i+j](r).
struct HankelMatrix {
    Eigen::MatrixXd entries;
    int L = 0;
    int M = 0;
    int p = 0;
    std::vector<int> pieces;

    int num_pieces() const { return static_cast<int>(pieces.size()); }
    int row_index(int i, int r) const { return i * p + r; }
    int col_index(int piece_pos, int j) const { return piece_pos * (M + 1) + j; }
};

// Fills the Hankel block from the first R pieces of the table.  Throws
// InsufficientOrder when the table is shorter than L + M coefficients.
HankelMatrix build_hankel(const MarkovTable& table, int L, int M, int R);

// Factorization result before initial-state deduplication: piece_states[i]
// holds the realized state that starts piece i, aligned with h.pieces.
struct KalmanHoResult {
    Lssj system;
    std::vector<Eigen::VectorXd> piece_states;
};

// Realizes a minimal jump-linear system from a finite Hankel block built
// with column depth M+1 (call build_hankel with that depth).  The state
// dimension is the numerical rank; C reads off the order-0 rows of the
// observability factor, A solves the column-shift equation, and the j = 0
// columns of the reachability factor give the initial states.  Throws
// RankDeficientShift when the shift equation residual exceeds
// 1e-6 * ||shifted block||.
KalmanHoResult kalman_ho_full(const HankelMatrix& h, double tol = -1.0);

// Same, with piece states deduplicated (1e-9 relative) into X0 in first-
// occurrence order.
Lssj kalman_ho(const HankelMatrix& h, double tol = -1.0);

// Column sub-matrices of h, one per partition block (all rows, the block's
// column groups in the block's listed order).  Blocks index positions into
// h.pieces.
std::vector<Eigen::MatrixXd> partition_hankel(const HankelMatrix& h,
                                              const Partition& partition);

enum class PartitionSearch { greedy, exhaustive };

// Searches for a partition of the pieces into at most K blocks whose
// per-block Hankel sub-matrices all have rank at most N.  Exhaustive mode
// enumerates set partitions (first feasible in a fixed order; supported for
// up to 12 pieces) and is the correctness oracle for greedy mode, which
// starts from singletons and repeatedly merges the pair with the smallest
// feasible union rank, breaking ties toward the lowest block indices.
std::optional<Partition> find_kn_partition(
    const HankelMatrix& h, int K, int N, double tol = -1.0,
    PartitionSearch mode = PartitionSearch::greedy);

struct KnRealizeResult {
    PwlSystem system;      // one mode per block, n_q = rank of its sub-matrix
    Partition partition;   // block -> piece positions
    Lssj merged;           // the underlying unpartitioned realization
};

// Realization with mode-count bound K and per-mode dimension bound N:
// runs the Hankel factorization, finds a feasible partition, and splits the
// realized system along it.  Throws KnPartitionNotFound when no partition
// satisfies the bounds.
KnRealizeResult kn_realize(const HankelMatrix& h, int K, int N,
                           double tol = -1.0,
                           PartitionSearch mode = PartitionSearch::greedy);

}  // namespace pwl
