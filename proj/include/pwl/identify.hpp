#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "pwl/model.hpp"
#include "pwl/sim.hpp"

namespace pwl {

// Fully observed samples (t_m, f(t_m), f'(t_m)) with strictly increasing
// times.
struct Dataset {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<Eigen::VectorXd> derivs;

    int size() const { return static_cast<int>(times.size()); }
    int dim() const;
    void validate() const;
};

Dataset dataset_from_trajectory(const Trajectory& traj);

// Derivatives estimated by central differences of the states.  Endpoints
// and every sample whose stencil [t_{i-1}, t_{i+1}] touches a recorded
// switch or junction are dropped.
Dataset dataset_by_finite_differences(const Trajectory& traj);

// Per-mode affine laws f' = A[q] f + a[q].
struct ModeParams {
    std::vector<Eigen::MatrixXd> A;
    std::vector<Eigen::VectorXd> a;

    int num_modes() const { return static_cast<int>(A.size()); }
    int dim() const;
    void validate() const;
};

// Sample-to-mode weight matrix (size x num_modes, rows summing to 1).  The
// optimizer only ever produces hard 0/1 rows, but the objective accepts any
// convex weights.
struct Weights {
    Eigen::MatrixXd w;

    static Weights hard(const std::vector<int>& assignment, int num_modes);
    std::vector<int> assignments() const;  // argmax per row, lowest on ties
};

// Mean over samples of the weighted squared residual
// sum_q w(m, q) * ||f'(t_m) - (A[q] f(t_m) + a[q])||^2.
double objective(const Dataset& data, const ModeParams& params,
                 const Weights& w);

// Hard assignment of every sample to a mode with minimal squared residual
// (lowest mode index on ties).  For fixed parameters this is the exact
// minimizer of the objective over convex weights, and the resulting
// objective value never exceeds the value under any other weights.
Weights assign_weights(const Dataset& data, const ModeParams& params);

struct RefitResult {
    ModeParams params;
    // true for modes with no weight anywhere; such modes keep their
    // previous parameters.
    std::vector<bool> mode_was_empty;
};

// Weighted least squares per mode: [A a] minimizing the weighted residual
// over the mode's samples, minimum-norm when the regressors are rank
// deficient.
RefitResult refit_params(const Dataset& data, const Weights& w,
                         const ModeParams& previous);

struct IdentifyConfig {
    double epsilon = -1.0;    // < 0: 1e-9 * mean squared derivative norm
    double delta_rel = 1e-12; // relative stall threshold
    int t_max = 200;          // iteration cap per restart
    int restarts = 10;
    std::uint64_t seed = 0;
    // Optional explicit initial parameters for the first restart; later
    // restarts always initialize randomly.
    std::optional<ModeParams> init;
};

struct IdentifyResult {
    ModeParams params;
    Weights weights;
    double objective = 0.0;
    bool converged = false;            // objective < epsilon
    int restarts_used = 0;
    double epsilon = 0.0;              // threshold actually applied
    std::vector<double> trace;         // objective per iteration, best restart
    std::vector<std::vector<double>> restart_traces;
    std::vector<bool> empty_modes;     // no samples assigned in final weights
};

// Alternating optimization: assign weights, refit parameters, repeat until
// the objective drops below epsilon, stalls (relative decrease below
// delta_rel), or t_max iterations pass.  A refit that would increase the
// objective in floating point is rejected, so every trace is non-increasing
// bit for bit.  Restarts draw independent initial parameters from seed and
// stop early once one converges; the restart with the smallest final
// objective wins (earliest on ties).
IdentifyResult identify(const Dataset& data, int num_modes,
                        const IdentifyConfig& config = {});

// Publishes fitted laws as a PWL system with identity output maps and
// unconstrained initial sets.
PwlSystem to_pwl(const ModeParams& params);

}  // namespace pwl
