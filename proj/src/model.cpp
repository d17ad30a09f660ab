#include "pwl/model.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "pwl/numeric.hpp"

namespace pwl {

namespace {

std::string mode_tag(int q) { return "mode " + std::to_string(q); }

void validate_mode(const AffineMode& mode, int output_dim, int q) {
    const Eigen::Index n = mode.A.rows();
    if (mode.A.cols() != n) {
        throw DimensionMismatch(mode_tag(q) + ": A must be square");
    }
    if (mode.a.size() != n) {
        throw DimensionMismatch(mode_tag(q) + ": a must have length " +
                                std::to_string(n));
    }
    if (mode.C.rows() != output_dim || mode.C.cols() != n) {
        throw DimensionMismatch(mode_tag(q) + ": C must be " +
                                std::to_string(output_dim) + "x" +
                                std::to_string(n));
    }
    if (mode.c.size() != output_dim) {
        throw DimensionMismatch(mode_tag(q) + ": c must have length " +
                                std::to_string(output_dim));
    }
    if (!mode.initial_states.unconstrained) {
        if (mode.initial_states.states.empty()) {
            throw DimensionMismatch(mode_tag(q) +
                                    ": finite initial set must be nonempty");
        }
        for (const auto& x : mode.initial_states.states) {
            if (x.size() != n) {
                throw DimensionMismatch(mode_tag(q) +
                                        ": initial state of wrong dimension");
            }
        }
    }
}

}  // namespace

bool AffineMode::is_linear(double tol) const {
    return a.lpNorm<Eigen::Infinity>() <= tol &&
           c.lpNorm<Eigen::Infinity>() <= tol;
}

bool PwlSystem::is_linear() const {
    return std::all_of(modes.begin(), modes.end(),
                       [](const AffineMode& m) { return m.is_linear(); });
}

void PwlSystem::validate() const {
    if (modes.empty()) {
        throw DimensionMismatch("system has no modes");
    }
    if (output_dim <= 0) {
        throw DimensionMismatch("output_dim must be positive");
    }
    for (int q = 0; q < num_modes(); ++q) {
        validate_mode(modes[q], output_dim, q);
    }
}

void Lssj::validate() const {
    if (n < 0 || A.rows() != n || A.cols() != n || C.cols() != n) {
        throw DimensionMismatch("jump-linear system: inconsistent A/C shapes");
    }
    if (C.rows() <= 0) {
        throw DimensionMismatch("jump-linear system: output dimension must be positive");
    }
    if (X0.empty()) {
        throw DimensionMismatch("jump-linear system: X0 must be nonempty");
    }
    for (const auto& x : X0) {
        if (x.size() != n) {
            throw DimensionMismatch("jump-linear system: initial state of wrong dimension");
        }
    }
}

int SarsModel::output_dim() const {
    if (modes.empty() || modes[0].empty()) return 0;
    return static_cast<int>(modes[0][0].rows());
}

void SarsModel::validate() const {
    if (order <= 0) {
        throw DimensionMismatch("autoregressive order must be positive");
    }
    if (modes.empty()) {
        throw DimensionMismatch("autoregressive model has no modes");
    }
    const int p = output_dim();
    if (p <= 0) {
        throw DimensionMismatch("autoregressive model: output dimension must be positive");
    }
    for (const auto& coeffs : modes) {
        if (static_cast<int>(coeffs.size()) != order) {
            throw DimensionMismatch("autoregressive mode needs one coefficient per lag");
        }
        for (const auto& m : coeffs) {
            if (m.rows() != p || m.cols() != p) {
                throw DimensionMismatch("autoregressive coefficients must be p x p");
            }
        }
    }
}

bool dimension_leq(const SystemDimension& lhs, const SystemDimension& rhs) {
    return lhs.num_modes <= rhs.num_modes &&
           lhs.total_continuous <= rhs.total_continuous;
}

SystemDimension dimension(const PwlSystem& sys) {
    const bool linear = sys.is_linear();
    SystemDimension d{sys.num_modes(), 0};
    for (const auto& mode : sys.modes) {
        d.total_continuous += mode.state_dim() + (linear ? 0 : 1);
    }
    return d;
}

SystemDimension dimension(const Lssj& sys) { return {1, sys.n}; }

void validate_partition(const Partition& partition,
                        const std::vector<int>& ground) {
    std::set<int> expected(ground.begin(), ground.end());
    if (expected.size() != ground.size()) {
        throw InconsistentPartition("ground set contains duplicate indices");
    }
    std::set<int> seen;
    for (const auto& block : partition.blocks) {
        if (block.empty()) {
            throw InconsistentPartition("partition block is empty");
        }
        for (int idx : block) {
            if (!expected.count(idx)) {
                throw InconsistentPartition("partition references unknown index " +
                                            std::to_string(idx));
            }
            if (!seen.insert(idx).second) {
                throw InconsistentPartition("index " + std::to_string(idx) +
                                            " appears in two blocks");
            }
        }
    }
    if (seen.size() != expected.size()) {
        throw InconsistentPartition("partition does not cover every index");
    }
}

PwlSystem embed_affine_to_linear(const PwlSystem& sys) {
    sys.validate();
    PwlSystem out;
    out.output_dim = sys.output_dim;
    out.modes.reserve(sys.modes.size());
    for (int q = 0; q < sys.num_modes(); ++q) {
        const AffineMode& mode = sys.modes[q];
        if (mode.initial_states.unconstrained) {
            throw Error(mode_tag(q) +
                        ": cannot extend an unconstrained initial set; the "
                        "extra coordinate must equal 1 on entry");
        }
        const int n = mode.state_dim();
        AffineMode lifted;
        lifted.A = Eigen::MatrixXd::Zero(n + 1, n + 1);
        lifted.A.topLeftCorner(n, n) = mode.A;
        lifted.A.topRightCorner(n, 1) = mode.a;
        lifted.a = Eigen::VectorXd::Zero(n + 1);
        lifted.C.resize(sys.output_dim, n + 1);
        lifted.C.leftCols(n) = mode.C;
        lifted.C.rightCols(1) = mode.c;
        lifted.c = Eigen::VectorXd::Zero(sys.output_dim);
        std::vector<Eigen::VectorXd> lifted_states;
        lifted_states.reserve(mode.initial_states.states.size());
        for (const auto& x : mode.initial_states.states) {
            Eigen::VectorXd xe(n + 1);
            xe.head(n) = x;
            xe(n) = 1.0;
            lifted_states.push_back(std::move(xe));
        }
        lifted.initial_states = InitialStates::of(std::move(lifted_states));
        out.modes.push_back(std::move(lifted));
    }
    return out;
}

Lssj merge_to_lssj(const PwlSystem& sys) {
    sys.validate();
    if (!sys.is_linear()) {
        throw AffineInput("merge requires a linear system; extend affine modes first");
    }
    int total = 0;
    for (const auto& mode : sys.modes) {
        if (mode.initial_states.unconstrained) {
            throw Error("merge requires finite initial sets");
        }
        total += mode.state_dim();
    }
    Lssj out;
    out.n = total;
    out.A = Eigen::MatrixXd::Zero(total, total);
    out.C = Eigen::MatrixXd::Zero(sys.output_dim, total);
    int offset = 0;
    for (const auto& mode : sys.modes) {
        const int n = mode.state_dim();
        out.A.block(offset, offset, n, n) = mode.A;
        out.C.middleCols(offset, n) = mode.C;
        offset += n;
    }
    offset = 0;
    for (const auto& mode : sys.modes) {
        const int n = mode.state_dim();
        for (const auto& x : mode.initial_states.states) {
            Eigen::VectorXd padded = Eigen::VectorXd::Zero(total);
            padded.segment(offset, n) = x;
            out.X0.push_back(std::move(padded));
        }
        offset += n;
    }
    return out;
}

PwlSystem lssj_to_pwl(const Lssj& sys) {
    sys.validate();
    PwlSystem out;
    out.output_dim = sys.output_dim();
    AffineMode mode;
    mode.A = sys.A;
    mode.a = Eigen::VectorXd::Zero(sys.n);
    mode.C = sys.C;
    mode.c = Eigen::VectorXd::Zero(sys.output_dim());
    mode.initial_states = InitialStates::of(sys.X0);
    out.modes.push_back(std::move(mode));
    return out;
}

Eigen::MatrixXd reachability_span_matrix(const Lssj& sys) {
    const int n = sys.n;
    Eigen::MatrixXd span(n, n * static_cast<int>(sys.X0.size()));
    int col = 0;
    for (const auto& x0 : sys.X0) {
        Eigen::VectorXd v = x0;
        for (int k = 0; k < n; ++k) {
            span.col(col++) = v;
            if (k + 1 < n) v = sys.A * v;
        }
    }
    return span;
}

Eigen::MatrixXd observability_matrix(const Eigen::MatrixXd& C,
                                     const Eigen::MatrixXd& A) {
    const Eigen::Index n = A.rows();
    const Eigen::Index p = C.rows();
    Eigen::MatrixXd obs(p * n, n);
    Eigen::MatrixXd block = C;
    for (Eigen::Index k = 0; k < n; ++k) {
        obs.middleRows(k * p, p) = block;
        if (k + 1 < n) block = block * A;
    }
    return obs;
}

bool check_span_reachable(const Lssj& sys, double tol) {
    sys.validate();
    return numerical_rank(reachability_span_matrix(sys), tol) == sys.n;
}

bool check_observable(const Lssj& sys, double tol) {
    sys.validate();
    return numerical_rank(observability_matrix(sys.C, sys.A), tol) == sys.n;
}

Lssj reduce_minimal(const Lssj& sys, double tol) {
    sys.validate();
    // Restrict to the reachable span.
    Eigen::MatrixXd V = range_basis(reachability_span_matrix(sys), tol);
    Lssj reachable;
    reachable.n = static_cast<int>(V.cols());
    reachable.A = V.transpose() * sys.A * V;
    reachable.C = sys.C * V;
    reachable.X0.reserve(sys.X0.size());
    for (const auto& x : sys.X0) reachable.X0.push_back(V.transpose() * x);
    // Factor out the unobservable subspace.
    Eigen::MatrixXd W =
        range_basis(observability_matrix(reachable.C, reachable.A).transpose(), tol);
    Lssj out;
    out.n = static_cast<int>(W.cols());
    out.A = W.transpose() * reachable.A * W;
    out.C = reachable.C * W;
    out.X0.reserve(reachable.X0.size());
    for (const auto& x : reachable.X0) out.X0.push_back(W.transpose() * x);
    return out;
}

PwlSystem split_by_partition(
    const Lssj& sys, const Partition& partition,
    const std::vector<std::pair<int, Eigen::VectorXd>>& switch_states,
    double tol) {
    sys.validate();
    std::vector<int> ground;
    ground.reserve(switch_states.size());
    for (const auto& [piece, state] : switch_states) {
        if (state.size() != sys.n) {
            throw DimensionMismatch("switch state of wrong dimension for piece " +
                                    std::to_string(piece));
        }
        ground.push_back(piece);
    }
    validate_partition(partition, ground);

    std::map<int, const Eigen::VectorXd*> by_piece;
    for (const auto& [piece, state] : switch_states) by_piece[piece] = &state;

    PwlSystem out;
    out.output_dim = sys.output_dim();
    for (const auto& block : partition.blocks) {
        // Span of the forward orbits of the block's switch states.
        Eigen::MatrixXd span(sys.n, sys.n * static_cast<int>(block.size()));
        int col = 0;
        for (int piece : block) {
            Eigen::VectorXd v = *by_piece.at(piece);
            for (int k = 0; k < sys.n; ++k) {
                span.col(col++) = v;
                if (k + 1 < sys.n) v = sys.A * v;
            }
        }
        Eigen::MatrixXd V = range_basis(span, tol);
        AffineMode mode;
        mode.A = V.transpose() * sys.A * V;
        mode.a = Eigen::VectorXd::Zero(V.cols());
        mode.C = sys.C * V;
        mode.c = Eigen::VectorXd::Zero(sys.output_dim());
        std::vector<Eigen::VectorXd> states;
        states.reserve(block.size());
        for (int piece : block) states.push_back(V.transpose() * *by_piece.at(piece));
        mode.initial_states = InitialStates::of(std::move(states));
        out.modes.push_back(std::move(mode));
    }
    return out;
}

PwlSystem sars_to_pwl(const SarsModel& sars) {
    sars.validate();
    const int n = sars.order;
    const int p = sars.output_dim();
    PwlSystem out;
    out.output_dim = p;
    for (const auto& coeffs : sars.modes) {
        AffineMode mode;
        // Block companion over the regressor (f^(n-1), ..., f).
        mode.A = Eigen::MatrixXd::Zero(n * p, n * p);
        for (int k = 0; k < n; ++k) {
            mode.A.block(0, k * p, p, p) = coeffs[k];
        }
        for (int i = 1; i < n; ++i) {
            mode.A.block(i * p, (i - 1) * p, p, p) =
                Eigen::MatrixXd::Identity(p, p);
        }
        mode.a = Eigen::VectorXd::Zero(n * p);
        mode.C = Eigen::MatrixXd::Zero(p, n * p);
        mode.C.rightCols(p) = Eigen::MatrixXd::Identity(p, p);
        mode.c = Eigen::VectorXd::Zero(p);
        mode.initial_states = InitialStates::all_of_space();
        out.modes.push_back(std::move(mode));
    }
    return out;
}

}  // namespace pwl
