#include "pwl/realization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>

#include <Eigen/SVD>

#include "pwl/numeric.hpp"

namespace pwl {

int MarkovTable::k_max() const {
    if (sequences.empty()) return -1;
    return static_cast<int>(sequences.front().size()) - 1;
}

int MarkovTable::p() const {
    if (sequences.empty() || sequences.front().empty()) return 0;
    return static_cast<int>(sequences.front().front().size());
}

std::vector<Eigen::VectorXd> markov_sequence(const Lssj& sys,
                                             const Eigen::VectorXd& x0,
                                             int k_max) {
    sys.validate();
    if (x0.size() != sys.n) {
        throw DimensionMismatch("markov_sequence: x0 of wrong dimension");
    }
    std::vector<Eigen::VectorXd> seq;
    seq.reserve(k_max + 1);
    Eigen::VectorXd v = x0;
    for (int k = 0; k <= k_max; ++k) {
        seq.push_back(sys.C * v);
        if (k < k_max) v = sys.A * v;
    }
    return seq;
}

MarkovTable markov_table(const Lssj& sys, int k_max) {
    MarkovTable table;
    table.sequences.reserve(sys.X0.size());
    for (const auto& x0 : sys.X0) {
        table.sequences.push_back(markov_sequence(sys, x0, k_max));
    }
    return table;
}

HankelMatrix build_hankel(const MarkovTable& table, int L, int M, int R) {
    if (L < 0 || M < 0) {
        throw DimensionMismatch("build_hankel: L and M must be nonnegative");
    }
    if (R < 1 || R > table.num_pieces()) {
        throw DimensionMismatch("build_hankel: R must select between 1 and " +
                                std::to_string(table.num_pieces()) + " pieces");
    }
    if (table.k_max() < L + M) {
        throw InsufficientOrder("build_hankel: table holds coefficients up to order " +
                                std::to_string(table.k_max()) + ", need " +
                                std::to_string(L + M));
    }
    const int p = table.p();
    HankelMatrix h;
    h.L = L;
    h.M = M;
    h.p = p;
    h.entries.resize((L + 1) * p, (M + 1) * R);
    for (int pc = 0; pc < R; ++pc) {
        h.pieces.push_back(pc);
        const auto& seq = table.sequences[pc];
        for (int j = 0; j <= M; ++j) {
            for (int i = 0; i <= L; ++i) {
                h.entries.block(i * p, h.col_index(pc, j), p, 1) = seq[i + j];
            }
        }
    }
    return h;
}

KalmanHoResult kalman_ho_full(const HankelMatrix& h, double tol) {
    if (h.M < 1) {
        throw InsufficientOrder("realization needs column depth M+1 >= 2 "
                                "(one shift must be available)");
    }
    if (h.p < 1 || h.entries.rows() != (h.L + 1) * h.p ||
        h.entries.cols() != (h.M + 1) * h.num_pieces()) {
        throw DimensionMismatch("Hankel block shape does not match its header");
    }
    const int p = h.p;
    const int R = h.num_pieces();
    const int depth = h.M;  // usable shifts per piece: columns j = 0..depth

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        h.entries, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    double rel_tol = tol;
    if (rel_tol < 0.0) {
        rel_tol = static_cast<double>(std::max(h.entries.rows(), h.entries.cols())) *
                  std::numeric_limits<double>::epsilon();
    }
    int n = 0;
    if (sv.size() > 0 && sv(0) > 0.0 && std::isfinite(sv(0))) {
        for (Eigen::Index i = 0; i < sv.size(); ++i) {
            if (sv(i) > rel_tol * sv(0)) ++n;
        }
    }

    KalmanHoResult out;
    out.system.n = n;
    Eigen::VectorXd sqrt_sv = sv.head(n).array().sqrt();
    // H = O * Rfac with balanced factors O = U sqrt(S), Rfac = sqrt(S) V^T.
    Eigen::MatrixXd O = svd.matrixU().leftCols(n) * sqrt_sv.asDiagonal();
    Eigen::MatrixXd Rfac = sqrt_sv.asDiagonal() *
                           svd.matrixV().leftCols(n).transpose();

    out.system.C = O.topRows(p);

    // The shift: dropping the last column of each piece group and dropping
    // the first must differ by one application of A.
    Eigen::MatrixXd unshifted(n, R * depth);
    Eigen::MatrixXd shifted(n, R * depth);
    for (int pc = 0; pc < R; ++pc) {
        for (int j = 0; j < depth; ++j) {
            unshifted.col(pc * depth + j) = Rfac.col(h.col_index(pc, j));
            shifted.col(pc * depth + j) = Rfac.col(h.col_index(pc, j + 1));
        }
    }
    out.system.A = solve_min_norm(unshifted, shifted);
    const double residual = (out.system.A * unshifted - shifted).norm();
    const double scale = shifted.norm();
    if (residual > 1e-6 * scale) {
        throw RankDeficientShift(
            "shift equation residual " + std::to_string(residual) +
            " exceeds 1e-6 * " + std::to_string(scale) +
            "; increase L/M or revisit the rank tolerance");
    }

    out.piece_states.reserve(R);
    for (int pc = 0; pc < R; ++pc) {
        out.piece_states.push_back(Rfac.col(h.col_index(pc, 0)));
    }
    // A valid jump-linear value regardless of later deduplication.
    out.system.X0 = out.piece_states;
    return out;
}

Lssj kalman_ho(const HankelMatrix& h, double tol) {
    KalmanHoResult full = kalman_ho_full(h, tol);
    std::vector<Eigen::VectorXd> unique_states;
    for (const auto& x : full.piece_states) {
        bool duplicate = false;
        for (const auto& u : unique_states) {
            const double scale = std::max(x.norm(), u.norm());
            if ((x - u).norm() <= 1e-9 * std::max(scale, 1e-300)) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) unique_states.push_back(x);
    }
    full.system.X0 = std::move(unique_states);
    return full.system;
}

std::vector<Eigen::MatrixXd> partition_hankel(const HankelMatrix& h,
                                              const Partition& partition) {
    std::vector<int> positions(h.num_pieces());
    for (int i = 0; i < h.num_pieces(); ++i) positions[i] = i;
    validate_partition(partition, positions);
    std::vector<Eigen::MatrixXd> blocks;
    blocks.reserve(partition.blocks.size());
    const int group = h.M + 1;
    for (const auto& block : partition.blocks) {
        Eigen::MatrixXd sub(h.entries.rows(),
                            group * static_cast<int>(block.size()));
        int at = 0;
        for (int pos : block) {
            sub.middleCols(at, group) = h.entries.middleCols(pos * group, group);
            at += group;
        }
        blocks.push_back(std::move(sub));
    }
    return blocks;
}

namespace {

// Rank of the column union of the pieces in `mask`, memoized per mask.
class BlockRankCache {
  public:
    BlockRankCache(const HankelMatrix& h, double tol) : h_(h), tol_(tol) {}

    int rank(std::uint32_t mask) {
        auto it = cache_.find(mask);
        if (it != cache_.end()) return it->second;
        const int group = h_.M + 1;
        std::vector<int> members;
        for (int pos = 0; pos < h_.num_pieces(); ++pos) {
            if (mask & (1u << pos)) members.push_back(pos);
        }
        Eigen::MatrixXd sub(h_.entries.rows(),
                            group * static_cast<int>(members.size()));
        int at = 0;
        for (int pos : members) {
            sub.middleCols(at, group) = h_.entries.middleCols(pos * group, group);
            at += group;
        }
        const int r = numerical_rank(sub, tol_);
        cache_.emplace(mask, r);
        return r;
    }

  private:
    const HankelMatrix& h_;
    double tol_;
    std::map<std::uint32_t, int> cache_;
};

bool exhaustive_search(BlockRankCache& ranks, int num_pieces, int K, int N,
                       int next, std::vector<std::vector<int>>& blocks,
                       std::vector<std::uint32_t>& masks) {
    if (next == num_pieces) return true;
    const std::uint32_t bit = 1u << next;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (ranks.rank(masks[b] | bit) > N) continue;
        blocks[b].push_back(next);
        masks[b] |= bit;
        if (exhaustive_search(ranks, num_pieces, K, N, next + 1, blocks, masks)) {
            return true;
        }
        masks[b] &= ~bit;
        blocks[b].pop_back();
    }
    if (static_cast<int>(blocks.size()) < K && ranks.rank(bit) <= N) {
        blocks.push_back({next});
        masks.push_back(bit);
        if (exhaustive_search(ranks, num_pieces, K, N, next + 1, blocks, masks)) {
            return true;
        }
        masks.pop_back();
        blocks.pop_back();
    }
    return false;
}

}  // namespace

std::optional<Partition> find_kn_partition(const HankelMatrix& h, int K, int N,
                                           double tol, PartitionSearch mode) {
    const int R = h.num_pieces();
    if (K < 1 || N < 0) {
        throw DimensionMismatch("find_kn_partition: need K >= 1 and N >= 0");
    }
    if (R > 31) {
        throw DimensionMismatch("find_kn_partition supports at most 31 pieces");
    }
    BlockRankCache ranks(h, tol);

    // A block's rank dominates each member's own rank, so an over-rank
    // singleton rules out every partition.
    for (int pos = 0; pos < R; ++pos) {
        if (ranks.rank(1u << pos) > N) return std::nullopt;
    }

    if (mode == PartitionSearch::exhaustive) {
        if (R > 12) {
            throw DimensionMismatch(
                "exhaustive partition search supports at most 12 pieces");
        }
        std::vector<std::vector<int>> blocks;
        std::vector<std::uint32_t> masks;
        if (!exhaustive_search(ranks, R, K, N, 0, blocks, masks)) {
            return std::nullopt;
        }
        Partition found;
        found.blocks = std::move(blocks);
        return found;
    }

    // Greedy agglomeration from singletons.
    std::vector<std::vector<int>> blocks(R);
    std::vector<std::uint32_t> masks(R);
    for (int pos = 0; pos < R; ++pos) {
        blocks[pos] = {pos};
        masks[pos] = 1u << pos;
    }
    while (static_cast<int>(blocks.size()) > K) {
        int best_i = -1, best_j = -1, best_rank = N + 1;
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            for (std::size_t j = i + 1; j < blocks.size(); ++j) {
                const int r = ranks.rank(masks[i] | masks[j]);
                if (r < best_rank) {
                    best_rank = r;
                    best_i = static_cast<int>(i);
                    best_j = static_cast<int>(j);
                }
            }
        }
        if (best_i < 0) return std::nullopt;
        blocks[best_i].insert(blocks[best_i].end(), blocks[best_j].begin(),
                              blocks[best_j].end());
        masks[best_i] |= masks[best_j];
        blocks.erase(blocks.begin() + best_j);
        masks.erase(masks.begin() + best_j);
    }
    Partition found;
    found.blocks = std::move(blocks);
    return found;
}

KnRealizeResult kn_realize(const HankelMatrix& h, int K, int N, double tol,
                           PartitionSearch mode) {
    KalmanHoResult full = kalman_ho_full(h, tol);
    std::optional<Partition> partition = find_kn_partition(h, K, N, tol, mode);
    if (!partition) {
        throw KnPartitionNotFound("no partition into at most " +
                                  std::to_string(K) + " blocks of rank at most " +
                                  std::to_string(N) + " exists");
    }
    std::vector<std::pair<int, Eigen::VectorXd>> switch_states;
    switch_states.reserve(full.piece_states.size());
    for (int pos = 0; pos < h.num_pieces(); ++pos) {
        switch_states.emplace_back(pos, full.piece_states[pos]);
    }

    // The realized states carry factorization rounding of order
    // eps * sigma_max(H) / sigma_r(H), which can exceed the default rank
    // cutoff of a block whose orbit span is small relative to the whole
    // system.  Widen the split tolerance by that condition number so block
    // dimensions equal the ranks of the Hankel sub-matrices.
    double split_tol = tol;
    if (split_tol < 0.0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(h.entries);
        const Eigen::VectorXd& sv = svd.singularValues();
        const double rel =
            static_cast<double>(std::max(h.entries.rows(), h.entries.cols())) *
            std::numeric_limits<double>::epsilon();
        const int r = numerical_rank(h.entries, tol);
        if (r > 0 && sv(r - 1) > 0.0) {
            split_tol = rel * sv(0) / sv(r - 1);
        }
    }

    KnRealizeResult out;
    out.system =
        split_by_partition(full.system, *partition, switch_states, split_tol);
    out.partition = *partition;
    out.merged = std::move(full.system);
    return out;
}

}  // namespace pwl
