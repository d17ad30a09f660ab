#include "pwl/numeric.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "pwl/errors.hpp"

namespace pwl {

namespace {

double default_tol(const Eigen::MatrixXd& m) {
    return static_cast<double>(std::max(m.rows(), m.cols())) *
           std::numeric_limits<double>::epsilon();
}

int rank_from_singular_values(const Eigen::VectorXd& sv, double rel_tol) {
    if (sv.size() == 0) return 0;
    const double smax = sv(0);
    if (!(smax > 0.0) || !std::isfinite(smax)) return 0;
    const double thresh = rel_tol * smax;
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > thresh) ++r;
    }
    return r;
}

}  // namespace

int numerical_rank(const Eigen::MatrixXd& m, double tol) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    if (tol < 0.0) tol = default_tol(m);
    return rank_from_singular_values(svd.singularValues(), tol);
}

Eigen::MatrixXd range_basis(const Eigen::MatrixXd& m, double tol) {
    if (m.rows() == 0 || m.cols() == 0) {
        return Eigen::MatrixXd(m.rows(), 0);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
    if (tol < 0.0) tol = default_tol(m);
    const int r = rank_from_singular_values(svd.singularValues(), tol);
    return svd.matrixU().leftCols(r);
}

Eigen::MatrixXd solve_min_norm(const Eigen::MatrixXd& a,
                               const Eigen::MatrixXd& b, double tol) {
    if (a.cols() != b.cols()) {
        throw DimensionMismatch("solve_min_norm: a and b need equal column counts");
    }
    if (a.rows() == 0 || a.cols() == 0) {
        return Eigen::MatrixXd::Zero(b.rows(), a.rows());
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (tol < 0.0) tol = default_tol(a);
    const Eigen::VectorXd& sv = svd.singularValues();
    const int r = rank_from_singular_values(sv, tol);
    // X = b * pinv(a) with pinv(a) = V S^+ U^T restricted to the rank.
    Eigen::MatrixXd bv = b * svd.matrixV().leftCols(r);
    for (int i = 0; i < r; ++i) bv.col(i) /= sv(i);
    return bv * svd.matrixU().leftCols(r).transpose();
}

std::vector<double> characteristic_polynomial(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) {
        throw DimensionMismatch("characteristic_polynomial: matrix must be square");
    }
    const int n = static_cast<int>(a.rows());
    std::vector<double> c(n);
    Eigen::MatrixXd aux = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= n; ++k) {
        Eigen::MatrixXd prod = a * aux;
        c[k - 1] = -prod.trace() / k;
        aux = prod + c[k - 1] * Eigen::MatrixXd::Identity(n, n);
    }
    return c;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

}  // namespace pwl
