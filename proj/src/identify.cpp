#include "pwl/identify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "pwl/numeric.hpp"

namespace pwl {

int Dataset::dim() const {
    return states.empty() ? 0 : static_cast<int>(states.front().size());
}

void Dataset::validate() const {
    if (states.size() != times.size() || derivs.size() != times.size()) {
        throw LengthMismatch("dataset columns have different lengths");
    }
    const int n = dim();
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (states[i].size() != n || derivs[i].size() != n) {
            throw DimensionMismatch("dataset sample of wrong dimension");
        }
        if (!states[i].allFinite() || !derivs[i].allFinite() ||
            !std::isfinite(times[i])) {
            throw Error("dataset contains non-finite values");
        }
        if (i > 0 && !(times[i - 1] < times[i])) {
            throw Error("dataset times must be strictly increasing");
        }
    }
}

Dataset dataset_from_trajectory(const Trajectory& traj) {
    traj.validate();
    if (traj.derivs.empty()) {
        throw Error("trajectory carries no derivative channel");
    }
    Dataset data;
    data.times = traj.times;
    data.states = traj.states;
    data.derivs = traj.derivs;
    data.validate();
    return data;
}

Dataset dataset_by_finite_differences(const Trajectory& traj) {
    traj.validate();
    const int m = traj.size();
    if (m < 3) {
        throw EmptyDataset("need at least three samples for central differences");
    }
    const int n = traj.state_dim();
    for (const auto& x : traj.states) {
        if (x.size() != n) {
            throw DimensionMismatch("finite differences need a uniform dimension");
        }
    }
    const double delta =
        traj.delta > 0.0 ? traj.delta : traj.times[1] - traj.times[0];
    Dataset data;
    for (int i = 1; i + 1 < m; ++i) {
        const double t_lo = traj.times[i - 1] - 0.25 * delta;
        const double t_hi = traj.times[i + 1] + 0.25 * delta;
        bool stencil_clean = true;
        for (double s : traj.switch_times) {
            if (s <= traj.times.front()) continue;  // start marker
            if (s >= t_lo && s <= t_hi) {
                stencil_clean = false;
                break;
            }
        }
        if (!stencil_clean) continue;
        data.times.push_back(traj.times[i]);
        data.states.push_back(traj.states[i]);
        data.derivs.push_back((traj.states[i + 1] - traj.states[i - 1]) /
                              (2.0 * delta));
    }
    if (data.times.empty()) {
        throw EmptyDataset("no usable samples between switches");
    }
    data.validate();
    return data;
}

int ModeParams::dim() const {
    return A.empty() ? 0 : static_cast<int>(A.front().rows());
}

void ModeParams::validate() const {
    if (A.size() != a.size()) {
        throw DimensionMismatch("parameter lists A and a differ in length");
    }
    const int n = dim();
    for (std::size_t q = 0; q < A.size(); ++q) {
        if (A[q].rows() != n || A[q].cols() != n || a[q].size() != n) {
            throw DimensionMismatch("parameters of mode " + std::to_string(q) +
                                    " have wrong shape");
        }
    }
}

Weights Weights::hard(const std::vector<int>& assignment, int num_modes) {
    Weights w;
    w.w = Eigen::MatrixXd::Zero(assignment.size(), num_modes);
    for (std::size_t m = 0; m < assignment.size(); ++m) {
        if (assignment[m] < 0 || assignment[m] >= num_modes) {
            throw DimensionMismatch("assignment index out of range");
        }
        w.w(m, assignment[m]) = 1.0;
    }
    return w;
}

std::vector<int> Weights::assignments() const {
    std::vector<int> out(w.rows());
    for (Eigen::Index m = 0; m < w.rows(); ++m) {
        int best = 0;
        double best_w = w(m, 0);
        for (Eigen::Index q = 1; q < w.cols(); ++q) {
            if (w(m, q) > best_w) {
                best_w = w(m, q);
                best = static_cast<int>(q);
            }
        }
        out[m] = best;
    }
    return out;
}

namespace {

// Shared by the objective and the assignment step so both see identical
// floating-point values.
inline double squared_residual(const Eigen::MatrixXd& A, const Eigen::VectorXd& a,
                               const Eigen::VectorXd& f, const Eigen::VectorXd& df) {
    return (df - A * f - a).squaredNorm();
}

void check_compatible(const Dataset& data, const ModeParams& params) {
    params.validate();
    if (params.num_modes() < 1) {
        throw DimensionMismatch("need at least one mode");
    }
    if (params.dim() != data.dim()) {
        throw DimensionMismatch("parameter dimension does not match the data");
    }
}

}  // namespace

double objective(const Dataset& data, const ModeParams& params,
                 const Weights& w) {
    check_compatible(data, params);
    const int m = data.size();
    const int k = params.num_modes();
    if (w.w.rows() != m || w.w.cols() != k) {
        throw DimensionMismatch("weight matrix of wrong shape");
    }
    if (m == 0) throw EmptyDataset("objective needs at least one sample");
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
        double row = 0.0;
        for (int q = 0; q < k; ++q) {
            const double wq = w.w(i, q);
            if (wq != 0.0) {
                row += wq * squared_residual(params.A[q], params.a[q],
                                             data.states[i], data.derivs[i]);
            }
        }
        acc += row;
    }
    return acc / m;
}

Weights assign_weights(const Dataset& data, const ModeParams& params) {
    check_compatible(data, params);
    if (data.size() == 0) throw EmptyDataset("assignment needs at least one sample");
    const int m = data.size();
    const int k = params.num_modes();
    Weights w;
    w.w = Eigen::MatrixXd::Zero(m, k);
    for (int i = 0; i < m; ++i) {
        int best = 0;
        double best_r = squared_residual(params.A[0], params.a[0],
                                         data.states[i], data.derivs[i]);
        for (int q = 1; q < k; ++q) {
            const double r = squared_residual(params.A[q], params.a[q],
                                              data.states[i], data.derivs[i]);
            if (r < best_r) {
                best_r = r;
                best = q;
            }
        }
        w.w(i, best) = 1.0;
    }
    return w;
}

RefitResult refit_params(const Dataset& data, const Weights& w,
                         const ModeParams& previous) {
    check_compatible(data, previous);
    const int m = data.size();
    const int k = previous.num_modes();
    if (w.w.rows() != m || w.w.cols() != k) {
        throw DimensionMismatch("weight matrix of wrong shape");
    }
    const int n = data.dim();
    RefitResult out;
    out.params = previous;
    out.mode_was_empty.assign(k, false);
    for (int q = 0; q < k; ++q) {
        std::vector<int> members;
        for (int i = 0; i < m; ++i) {
            if (w.w(i, q) > 0.0) members.push_back(i);
        }
        if (members.empty()) {
            out.mode_was_empty[q] = true;
            continue;
        }
        // Weighted least squares via sqrt-weight column scaling; hard 0/1
        // weights reduce to the plain subset problem.
        Eigen::MatrixXd regressors(n + 1, members.size());
        Eigen::MatrixXd targets(n, members.size());
        for (std::size_t j = 0; j < members.size(); ++j) {
            const int i = members[j];
            const double s = std::sqrt(w.w(i, q));
            regressors.col(j).head(n) = s * data.states[i];
            regressors(n, j) = s;
            targets.col(j) = s * data.derivs[i];
        }
        Eigen::MatrixXd sol = solve_min_norm(regressors, targets);
        out.params.A[q] = sol.leftCols(n);
        out.params.a[q] = sol.col(n);
    }
    return out;
}

namespace {

ModeParams random_params(int k, int n, double scale_A, double scale_a,
                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    ModeParams params;
    params.A.reserve(k);
    params.a.reserve(k);
    for (int q = 0; q < k; ++q) {
        Eigen::MatrixXd A(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) A(i, j) = scale_A * unif(rng);
        }
        Eigen::VectorXd a(n);
        for (int i = 0; i < n; ++i) a(i) = scale_a * unif(rng);
        params.A.push_back(std::move(A));
        params.a.push_back(std::move(a));
    }
    return params;
}

// Seed one restart by fitting each mode to a random window of consecutive
// samples.  A short window usually sits inside a single true mode, so the
// initial parameters start near some mode's law instead of in a flat region
// where the first assignment step is essentially arbitrary.
ModeParams random_window_params(const Dataset& data, int k, double scale_A,
                                double scale_a, std::uint64_t seed) {
    const int m = data.size();
    const int n = data.dim();
    const int w = std::max(n + 2, std::min(40, m / (2 * k)));
    if (m < k * (n + 2) || m < w) {
        return random_params(k, n, scale_A, scale_a, seed);
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, m - w);
    std::vector<int> starts;
    starts.reserve(k);
    for (int q = 0; q < k; ++q) {
        int s = pick(rng);
        for (int tries = 0; tries < 50; ++tries) {
            bool clear = true;
            for (int prev : starts) {
                if (std::abs(s - prev) < w) {
                    clear = false;
                    break;
                }
            }
            if (clear) break;
            s = pick(rng);
        }
        starts.push_back(s);
    }
    ModeParams params;
    params.A.reserve(k);
    params.a.reserve(k);
    for (int q = 0; q < k; ++q) {
        Eigen::MatrixXd regressors(n + 1, w);
        Eigen::MatrixXd targets(n, w);
        for (int j = 0; j < w; ++j) {
            regressors.col(j).head(n) = data.states[starts[q] + j];
            regressors(n, j) = 1.0;
            targets.col(j) = data.derivs[starts[q] + j];
        }
        Eigen::MatrixXd sol = solve_min_norm(regressors, targets);
        params.A.push_back(sol.leftCols(n));
        params.a.push_back(sol.col(n));
    }
    return params;
}

struct RestartOutcome {
    ModeParams params;
    Weights weights;
    double objective = 0.0;
    bool converged = false;
    std::vector<double> trace;
};

RestartOutcome run_restart(const Dataset& data, ModeParams params, double eps,
                           double delta_rel, int t_max) {
    RestartOutcome out;
    Weights w = assign_weights(data, params);
    double e = objective(data, params, w);
    out.trace.push_back(e);
    bool converged = e < eps;
    for (int it = 0; it < t_max && !converged; ++it) {
        RefitResult refit = refit_params(data, w, params);
        const double e_refit = objective(data, refit.params, w);
        if (e_refit > e) break;  // numerically at a fixed point already
        params = refit.params;
        Weights w_next = assign_weights(data, params);
        const double e_next = objective(data, params, w_next);
        // e_next <= e_refit <= e holds bit for bit: the assignment picks the
        // pointwise minimum of the very residuals the objective sums, and
        // floating-point accumulation of pointwise-dominated terms is
        // monotone.
        w = std::move(w_next);
        const double drop = e - e_next;
        e = e_next;
        out.trace.push_back(e);
        converged = e < eps;
        if (!converged && drop <= delta_rel * std::max(e, 1.0)) break;
    }
    out.params = std::move(params);
    out.weights = std::move(w);
    out.objective = e;
    out.converged = converged;
    return out;
}

}  // namespace

IdentifyResult identify(const Dataset& data, int num_modes,
                        const IdentifyConfig& config) {
    data.validate();
    if (data.size() == 0) {
        throw EmptyDataset("identification needs at least one sample");
    }
    if (num_modes < 1) {
        throw DimensionMismatch("need at least one mode");
    }
    const int n = data.dim();
    if (n == 0) {
        throw DimensionMismatch("identification needs a nonzero state dimension");
    }

    double mean_sq = 0.0, max_f = 0.0, max_df = 0.0;
    for (int i = 0; i < data.size(); ++i) {
        mean_sq += data.derivs[i].squaredNorm();
        max_f = std::max(max_f, data.states[i].norm());
        max_df = std::max(max_df, data.derivs[i].norm());
    }
    mean_sq /= data.size();
    // Floor the automatic threshold so all-zero derivative data (where the
    // scale-aware default degenerates to 0) can still converge on an exact
    // fit.
    const double eps =
        config.epsilon >= 0.0
            ? config.epsilon
            : std::max(1e-9 * mean_sq, std::numeric_limits<double>::min());
    const double scale_A =
        max_df / (max_f + std::numeric_limits<double>::epsilon());
    const double scale_a = max_df;

    const int restarts = std::max(config.restarts, 1);
    if (config.init) {
        config.init->validate();
        if (config.init->num_modes() != num_modes || config.init->dim() != n) {
            throw DimensionMismatch("explicit initial parameters of wrong shape");
        }
    }

    IdentifyResult result;
    result.epsilon = eps;
    bool have_best = false;
    RestartOutcome best;
    for (int r = 0; r < restarts; ++r) {
        ModeParams start =
            (r == 0 && config.init)
                ? *config.init
                : random_window_params(data, num_modes, scale_A, scale_a,
                                       derive_seed(config.seed, r));
        RestartOutcome outcome =
            run_restart(data, std::move(start), eps, config.delta_rel,
                        config.t_max);
        result.restart_traces.push_back(outcome.trace);
        result.restarts_used = r + 1;
        if (!have_best || outcome.objective < best.objective) {
            best = outcome;
            have_best = true;
        }
        if (outcome.converged) break;
    }

    result.params = std::move(best.params);
    result.weights = std::move(best.weights);
    result.objective = best.objective;
    result.converged = best.converged;
    result.trace = std::move(best.trace);
    result.empty_modes.assign(num_modes, true);
    for (Eigen::Index i = 0; i < result.weights.w.rows(); ++i) {
        for (int q = 0; q < num_modes; ++q) {
            if (result.weights.w(i, q) != 0.0) result.empty_modes[q] = false;
        }
    }
    return result;
}

PwlSystem to_pwl(const ModeParams& params) {
    params.validate();
    if (params.num_modes() < 1) {
        throw DimensionMismatch("need at least one mode");
    }
    const int n = params.dim();
    PwlSystem sys;
    sys.output_dim = n;
    for (int q = 0; q < params.num_modes(); ++q) {
        AffineMode mode;
        mode.A = params.A[q];
        mode.a = params.a[q];
        mode.C = Eigen::MatrixXd::Identity(n, n);
        mode.c = Eigen::VectorXd::Zero(n);
        mode.initial_states = InitialStates::all_of_space();
        sys.modes.push_back(std::move(mode));
    }
    return sys;
}

}  // namespace pwl
