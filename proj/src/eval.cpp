#include "pwl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

namespace pwl {

namespace {

Eigen::MatrixXd stacked_block(const ModeParams& params, int q) {
    const int n = params.dim();
    Eigen::MatrixXd block(n, n + 1);
    block.leftCols(n) = params.A[q];
    block.col(n) = params.a[q];
    return block;
}

// Pearson correlation of the flattened blocks; degenerate (constant) inputs
// compare by equality.
double block_correlation(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v) {
    const Eigen::Map<const Eigen::VectorXd> uf(u.data(), u.size());
    const Eigen::Map<const Eigen::VectorXd> vf(v.data(), v.size());
    const Eigen::VectorXd uc = uf.array() - uf.mean();
    const Eigen::VectorXd vc = vf.array() - vf.mean();
    const double nu = uc.norm();
    const double nv = vc.norm();
    if (nu == 0.0 || nv == 0.0) {
        return (u - v).norm() == 0.0 ? 1.0 : 0.0;
    }
    return uc.dot(vc) / (nu * nv);
}

// Minimum-cost perfect matching on a square cost matrix (potentials method).
// Returns the column assigned to each row.
std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

}  // namespace

MatchReport match_modes(const ModeParams& reference,
                        const ModeParams& estimated) {
    reference.validate();
    estimated.validate();
    if (reference.dim() != estimated.dim()) {
        throw DimensionMismatch("mode matching needs one state dimension");
    }
    const int ke = estimated.num_modes();
    const int kt = reference.num_modes();
    if (ke < 1 || kt < 1) {
        throw DimensionMismatch("mode matching needs at least one mode per side");
    }

    Eigen::MatrixXd cost(ke, kt);
    for (int i = 0; i < ke; ++i) {
        for (int j = 0; j < kt; ++j) {
            cost(i, j) = (stacked_block(estimated, i) - stacked_block(reference, j)).norm();
        }
    }

    // pairing[i] = reference mode for estimated mode i, or -1.
    std::vector<int> pairing(ke, -1);
    const int big = std::max(ke, kt);
    const int small = std::min(ke, kt);
    if (big <= 8) {
        // Exhaustive over injections of the smaller side into the larger.
        std::vector<int> perm(big);
        std::iota(perm.begin(), perm.end(), 0);
        std::vector<int> best_perm;
        double best_total = std::numeric_limits<double>::infinity();
        do {
            double total = 0.0;
            for (int s = 0; s < small; ++s) {
                total += (ke <= kt) ? cost(s, perm[s]) : cost(perm[s], s);
            }
            if (total < best_total) {
                best_total = total;
                best_perm.assign(perm.begin(), perm.begin() + small);
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        if (ke <= kt) {
            for (int s = 0; s < small; ++s) pairing[s] = best_perm[s];
        } else {
            for (int s = 0; s < small; ++s) pairing[best_perm[s]] = s;
        }
    } else {
        // Hungarian on a square matrix padded with zero-cost dummies.
        Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(big, big);
        padded.topLeftCorner(ke, kt) = cost;
        const std::vector<int> row_to_col = hungarian(padded);
        for (int i = 0; i < ke; ++i) {
            if (row_to_col[i] < kt) pairing[i] = row_to_col[i];
        }
    }

    MatchReport report;
    report.permutation = pairing;
    report.per_mode_error.assign(ke, std::numeric_limits<double>::quiet_NaN());
    report.per_mode_correlation.assign(ke, std::numeric_limits<double>::quiet_NaN());
    std::vector<bool> ref_used(kt, false);
    for (int i = 0; i < ke; ++i) {
        const int j = pairing[i];
        if (j < 0) continue;
        ref_used[j] = true;
        const Eigen::MatrixXd ref_block = stacked_block(reference, j);
        const Eigen::MatrixXd est_block = stacked_block(estimated, i);
        const double abs_err = (est_block - ref_block).norm();
        const double denom = ref_block.norm();
        report.per_mode_error[i] = denom > 0.0 ? abs_err / denom : abs_err;
        report.per_mode_correlation[i] = block_correlation(ref_block, est_block);
        report.total_error += abs_err;
    }
    if (ke > kt) {
        for (int i = 0; i < ke; ++i) {
            if (pairing[i] < 0) report.unmatched.push_back(i);
        }
    } else if (kt > ke) {
        for (int j = 0; j < kt; ++j) {
            if (!ref_used[j]) report.unmatched.push_back(j);
        }
    }
    return report;
}

double segmentation_agreement(const std::vector<int>& labels_a,
                              const std::vector<int>& labels_b) {
    if (labels_a.size() != labels_b.size()) {
        throw LengthMismatch("labelings must have equal length");
    }
    if (labels_a.empty()) {
        throw Error("labelings must be nonempty");
    }
    const int m = static_cast<int>(labels_a.size());

    std::map<int, int> ids_a, ids_b;
    for (int l : labels_a) ids_a.emplace(l, 0);
    for (int l : labels_b) ids_b.emplace(l, 0);
    int next = 0;
    for (auto& [label, id] : ids_a) id = next++;
    next = 0;
    for (auto& [label, id] : ids_b) id = next++;
    const int la = static_cast<int>(ids_a.size());
    const int lb = static_cast<int>(ids_b.size());

    Eigen::MatrixXi confusion = Eigen::MatrixXi::Zero(la, lb);
    for (int i = 0; i < m; ++i) {
        confusion(ids_a.at(labels_a[i]), ids_b.at(labels_b[i])) += 1;
    }

    const int big = std::max(la, lb);
    const int small = std::min(la, lb);
    long long best = 0;
    if (big <= 8) {
        std::vector<int> perm(big);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            long long total = 0;
            for (int s = 0; s < small; ++s) {
                total += (la <= lb) ? confusion(s, perm[s]) : confusion(perm[s], s);
            }
            best = std::max(best, total);
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        // Greedy: repeatedly take the largest remaining confusion cell.
        std::vector<bool> row_done(la, false), col_done(lb, false);
        for (int step = 0; step < small; ++step) {
            int bi = -1, bj = -1, bv = -1;
            for (int i = 0; i < la; ++i) {
                if (row_done[i]) continue;
                for (int j = 0; j < lb; ++j) {
                    if (col_done[j]) continue;
                    if (confusion(i, j) > bv) {
                        bv = confusion(i, j);
                        bi = i;
                        bj = j;
                    }
                }
            }
            best += bv;
            row_done[bi] = true;
            col_done[bj] = true;
        }
    }
    return static_cast<double>(best) / m;
}

double verify_ar(const std::vector<std::vector<Eigen::VectorXd>>& derivs_by_order,
                 const std::vector<Eigen::MatrixXd>& coeffs) {
    const int n = static_cast<int>(coeffs.size());
    if (n < 1) throw DimensionMismatch("need at least one coefficient matrix");
    const Eigen::Index p = coeffs.front().rows();
    for (const auto& c : coeffs) {
        if (c.rows() != p || c.cols() != p) {
            throw DimensionMismatch("coefficient matrices must share one square shape");
        }
    }
    if (static_cast<int>(derivs_by_order.size()) != n + 1) {
        throw LengthMismatch("need derivative orders 0 through n");
    }
    const std::size_t m = derivs_by_order.front().size();
    if (m == 0) throw Error("need at least one sample");
    for (const auto& level : derivs_by_order) {
        if (level.size() != m) {
            throw LengthMismatch("derivative orders differ in sample count");
        }
        for (const auto& v : level) {
            if (v.size() != p) {
                throw DimensionMismatch("derivative sample of wrong dimension");
            }
        }
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        Eigen::VectorXd r = derivs_by_order[n][i];
        for (int k = 1; k <= n; ++k) {
            r -= coeffs[k - 1] * derivs_by_order[n - k][i];
        }
        worst = std::max(worst, r.norm());
    }
    return worst;
}

double verify_ar(const Trajectory& traj,
                 const std::vector<Eigen::MatrixXd>& coeffs) {
    traj.validate();
    const int n = static_cast<int>(coeffs.size());
    if (n < 1) throw DimensionMismatch("need at least one coefficient matrix");
    for (const auto& c : coeffs) {
        if (c.rows() != traj.state_dim() || c.cols() != traj.state_dim()) {
            throw DimensionMismatch(
                "coefficient matrices must match the trajectory dimension");
        }
    }
    const int m = traj.size();
    if (m < 2 * n + 1) {
        throw Error("trajectory too short for an order-" + std::to_string(n) +
                    " residual");
    }
    const double delta =
        traj.delta > 0.0 ? traj.delta : traj.times[1] - traj.times[0];
    // Interior switches (or a switch landing on the final sample) would mix
    // two laws into one finite-difference stencil.
    for (double s : traj.switch_times) {
        if (s > traj.times.front() + 0.5 * delta &&
            s <= traj.times.back() + 0.5 * delta) {
            throw SegmentContainsSwitch("switch at t = " + std::to_string(s) +
                                        " lies inside the segment");
        }
    }

    // Derivative ladder: order 0 from states, order 1 from the stored
    // derivative channel when available, everything else by central
    // differences.  Each difference trims one sample at both ends.
    std::vector<std::vector<Eigen::VectorXd>> ladder(n + 1);
    std::vector<int> lo(n + 1), hi(n + 1);
    ladder[0] = traj.states;
    lo[0] = 0;
    hi[0] = m - 1;
    for (int k = 1; k <= n; ++k) {
        if (k == 1 && !traj.derivs.empty()) {
            ladder[1] = traj.derivs;
            lo[1] = 0;
            hi[1] = m - 1;
            continue;
        }
        ladder[k].assign(m, Eigen::VectorXd());
        lo[k] = lo[k - 1] + 1;
        hi[k] = hi[k - 1] - 1;
        for (int i = lo[k]; i <= hi[k]; ++i) {
            ladder[k][i] = (ladder[k - 1][i + 1] - ladder[k - 1][i - 1]) /
                           (2.0 * delta);
        }
    }
    if (lo[n] > hi[n]) throw Error("trajectory too short after differencing");

    double worst = 0.0;
    for (int i = lo[n]; i <= hi[n]; ++i) {
        Eigen::VectorXd r = ladder[n][i];
        for (int k = 1; k <= n; ++k) {
            r -= coeffs[k - 1] * ladder[n - k][i];
        }
        worst = std::max(worst, r.norm());
    }
    return worst;
}

}  // namespace pwl
