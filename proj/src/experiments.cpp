#include "pwl/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "pwl/numeric.hpp"

namespace pwl {

namespace {

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
}

}  // namespace

ArtificialInstance make_artificial_instance(std::uint64_t seed, int num_modes,
                                            int state_dim) {
    std::mt19937_64 rng(derive_seed(seed, 0xa17f));
    std::uniform_real_distribution<double> box(-2.0, 2.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    // Well-separated cell centers keep the switching surfaces apart.
    std::vector<Eigen::VectorXd> centers;
    double min_gap = 1.2;
    while (static_cast<int>(centers.size()) < num_modes) {
        Eigen::VectorXd c(state_dim);
        for (int i = 0; i < state_dim; ++i) c(i) = box(rng);
        bool ok = true;
        for (const auto& prev : centers) {
            if ((c - prev).norm() < min_gap) {
                ok = false;
                break;
            }
        }
        if (ok) {
            centers.push_back(std::move(c));
        } else {
            min_gap *= 0.999;  // guarantees termination for any mode count
        }
    }

    ArtificialInstance instance;
    instance.law.centers = centers;
    instance.system.output_dim = state_dim;
    for (int q = 0; q < num_modes; ++q) {
        Eigen::MatrixXd A(state_dim, state_dim);
        for (int i = 0; i < state_dim; ++i) {
            for (int j = 0; j < state_dim; ++j) A(i, j) = unif(rng);
        }
        // Shift the spectrum left of -0.5 so trajectories contract onto the
        // goal point, which sits in the next mode's cell and keeps the
        // switching alive.
        const double spread =
            Eigen::EigenSolver<Eigen::MatrixXd>(A).eigenvalues().real().maxCoeff();
        A -= (spread + 0.5) * Eigen::MatrixXd::Identity(state_dim, state_dim);
        const Eigen::VectorXd goal = centers[(q + 1) % num_modes];
        AffineMode mode;
        mode.A = A;
        mode.a = -A * goal;
        mode.C = Eigen::MatrixXd::Identity(state_dim, state_dim);
        mode.c = Eigen::VectorXd::Zero(state_dim);
        mode.initial_states = InitialStates::all_of_space();
        instance.system.modes.push_back(mode);
        instance.true_params.A.push_back(mode.A);
        instance.true_params.a.push_back(mode.a);
    }
    return instance;
}

Trajectory simulate_artificial(const ArtificialInstance& instance,
                               std::uint64_t seed, int runs,
                               int samples_per_run, double delta,
                               double snr_percent) {
    const int n = instance.system.modes.front().state_dim();
    std::mt19937_64 rng(derive_seed(seed, 0x51e0));
    std::uniform_real_distribution<double> start_box(-2.5, 2.5);
    std::vector<Trajectory> parts;
    parts.reserve(runs);
    for (int r = 0; r < runs; ++r) {
        Eigen::VectorXd x0(n);
        for (int i = 0; i < n; ++i) x0(i) = start_box(rng);
        int q0 = 0;
        double best = (x0 - instance.law.centers[0]).squaredNorm();
        for (std::size_t q = 1; q < instance.law.centers.size(); ++q) {
            const double d = (x0 - instance.law.centers[q]).squaredNorm();
            if (d < best) {
                best = d;
                q0 = static_cast<int>(q);
            }
        }
        parts.push_back(simulate_pwl(instance.system, instance.law, x0, q0,
                                     samples_per_run * delta, delta));
    }
    Trajectory traj = concatenate(parts);
    if (snr_percent > 0.0) {
        traj = add_noise(traj, snr_percent, derive_seed(seed, 0x401e));
    }
    return traj;
}

ArtificialTrialReport run_artificial_trial(std::uint64_t seed, int num_modes,
                                           double snr_percent, int restarts) {
    const auto start = std::chrono::steady_clock::now();
    // A mode whose cell the trajectory never enters is unidentifiable from
    // the data, so redraw until every mode contributes a healthy share of
    // samples.  Deterministic: attempts walk derived seed streams.
    ArtificialInstance instance;
    Trajectory traj;
    int best_coverage = -1;
    for (int attempt = 0; attempt < 25; ++attempt) {
        ArtificialInstance candidate = make_artificial_instance(
            derive_seed(seed, 1 + 3 * attempt), num_modes, 2);
        Trajectory sampled =
            simulate_artificial(candidate, derive_seed(seed, 2 + 3 * attempt),
                                6, 300, 0.01, snr_percent);
        std::vector<int> counts(num_modes, 0);
        for (int label : sampled.mode_labels) ++counts[label];
        const int coverage = *std::min_element(counts.begin(), counts.end());
        if (coverage > best_coverage) {
            best_coverage = coverage;
            instance = std::move(candidate);
            traj = std::move(sampled);
        }
        if (best_coverage >= 80) break;
    }
    Dataset data = dataset_from_trajectory(traj);

    IdentifyConfig config;
    config.restarts = restarts;
    config.seed = derive_seed(seed, 3);
    ArtificialTrialReport report;
    report.fit = identify(data, num_modes, config);
    report.match = match_modes(instance.true_params, report.fit.params);

    report.max_rel_error = 0.0;
    for (int q = 0; q < num_modes; ++q) {
        const double err = report.match.per_mode_error[q];
        if (std::isnan(err)) {
            report.max_rel_error = std::numeric_limits<double>::infinity();
        } else {
            report.max_rel_error = std::max(report.max_rel_error, err);
        }
        if (report.match.per_mode_correlation[q] >= 0.95) {
            ++report.modes_matched_tightly;
        }
    }
    report.seconds = elapsed_seconds(start);
    return report;
}

LorenzTrialReport run_lorenz_trial(std::uint64_t seed, int num_modes,
                                   int restarts) {
    const auto start = std::chrono::steady_clock::now();
    Eigen::VectorXd x0(3);
    x0 << -8.0, 8.0, 27.0;
    Trajectory traj = simulate_ode(lorenz_rhs(), x0, 50.0, 0.01);
    Dataset data = dataset_from_trajectory(traj);

    IdentifyConfig config;
    config.restarts = restarts;
    config.seed = derive_seed(seed, 5);
    LorenzTrialReport report;
    report.fit = identify(data, num_modes, config);

    std::vector<int> lobes(data.size());
    for (int i = 0; i < data.size(); ++i) {
        lobes[i] = data.states[i](0) < 0.0 ? 0 : 1;
    }
    report.agreement =
        segmentation_agreement(report.fit.weights.assignments(), lobes);
    report.seconds = elapsed_seconds(start);
    return report;
}

}  // namespace pwl
