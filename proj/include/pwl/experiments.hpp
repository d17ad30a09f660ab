#pragma once

#include <cstdint>

#include "pwl/eval.hpp"
#include "pwl/identify.hpp"
#include "pwl/model.hpp"
#include "pwl/sim.hpp"

namespace pwl {

// Randomized benchmark instance: a Voronoi-switched affine system whose
// modes are stable laws steering the state toward the next cell's center,
// so trajectories keep crossing cell boundaries and visit every mode.
struct ArtificialInstance {
    PwlSystem system;        // identity output, unconstrained initial sets
    VoronoiLaw law;
    ModeParams true_params;  // the per-mode [A a] laws
};

ArtificialInstance make_artificial_instance(std::uint64_t seed,
                                            int num_modes = 5,
                                            int state_dim = 2);

// Concatenation of `runs` simulations from random initial states, optionally
// corrupted by Gaussian noise of the given percent SNR.
Trajectory simulate_artificial(const ArtificialInstance& instance,
                               std::uint64_t seed, int runs,
                               int samples_per_run, double delta,
                               double snr_percent);

struct ArtificialTrialReport {
    IdentifyResult fit;
    MatchReport match;
    double max_rel_error = 0.0;   // worst matched [A a] error, inf if unpaired
    int modes_matched_tightly = 0;  // pairs with correlation >= 0.95
    double seconds = 0.0;
};

// One full benchmark trial: fresh instance, 1800 samples (6 runs x 300),
// identification with the given mode count and restarts, mode matching
// against the generating laws.
ArtificialTrialReport run_artificial_trial(std::uint64_t seed, int num_modes,
                                           double snr_percent, int restarts);

struct LorenzTrialReport {
    IdentifyResult fit;
    double agreement = 0.0;  // vs the sign-of-x1 reference segmentation
    double seconds = 0.0;
};

// Lorenz benchmark: 5000 samples at delta 0.01, two-mode identification,
// segmentation agreement against the lobe labeling sign(x1).
LorenzTrialReport run_lorenz_trial(std::uint64_t seed, int num_modes,
                                   int restarts);

}  // namespace pwl
