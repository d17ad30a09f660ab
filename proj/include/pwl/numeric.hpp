#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace pwl {

// Number of singular values above tol * sigma_max.  A negative tol selects
// the default max(rows, cols) * machine epsilon.
int numerical_rank(const Eigen::MatrixXd& m, double tol = -1.0);

// Orthonormal basis of the column space (left singular vectors of the
// numerically nonzero singular values).  Columns == numerical_rank(m, tol).
Eigen::MatrixXd range_basis(const Eigen::MatrixXd& m, double tol = -1.0);

// Minimum-norm least-squares solution X of X * a ~= b, computed through the
// SVD pseudoinverse of a.  Shapes: a is k x m, b is n x m, X is n x k.
Eigen::MatrixXd solve_min_norm(const Eigen::MatrixXd& a,
                               const Eigen::MatrixXd& b,
                               double tol = -1.0);

// Coefficients c of det(sI - A) = s^n + c[0] s^(n-1) + ... + c[n-1],
// computed with the Faddeev-LeVerrier recursion.
std::vector<double> characteristic_polynomial(const Eigen::MatrixXd& a);

// Stateless mixing function; good avalanche, cheap, reproducible everywhere.
std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent stream seed from a base seed and a stream index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace pwl
