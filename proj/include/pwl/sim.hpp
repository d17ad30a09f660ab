#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "pwl/model.hpp"

namespace pwl {

// Uniformly sampled trajectory.  times[i] = i * delta (continued across
// concatenation); derivs[i] is the state derivative at times[i];
// mode_labels, when present, give the active mode at each sample.
// switch_times starts with 0 and records every mode change and every
// concatenation junction.  States of different modes may differ in
// dimension, so states is a list of vectors rather than a matrix.
struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<Eigen::VectorXd> derivs;
    std::vector<int> mode_labels;
    std::vector<double> switch_times;
    double delta = 0.0;

    int size() const { return static_cast<int>(times.size()); }
    int state_dim() const;
    bool has_labels() const { return !mode_labels.empty(); }
    void validate() const;
};

// Pre-planned switching: at entry.time the system jumps to entry.mode with
// state entry.state.  Entries must have strictly increasing positive times;
// each takes effect at the first sample time >= entry.time.  Entry states
// are checked against finite initial sets (1e-9 tolerance).
struct ScheduleEntry {
    double time = 0.0;
    int mode = 0;
    Eigen::VectorXd state;
};

struct ScheduleLaw {
    std::vector<ScheduleEntry> entries;
};

// State-driven switching: after each step the active mode becomes the index
// of the nearest center (lowest index on ties) and the state carries over
// unchanged.  A switch is suppressed within min_dwell of the previous one.
// Requires all modes to share one state dimension.
struct VoronoiLaw {
    std::vector<Eigen::VectorXd> centers;
};

using SwitchingLaw = std::variant<ScheduleLaw, VoronoiLaw>;

// Samples the system on the grid t_i = i * delta, i = 0..round(t_end/delta)-1,
// propagating each step with the exact affine flow (matrix exponential of
// the drift-augmented state matrix).  Labels and derivatives at a switch
// sample belong to the new mode.  min_dwell < 0 selects 5 * delta.
Trajectory simulate_pwl(const PwlSystem& sys, const SwitchingLaw& law,
                        const Eigen::VectorXd& x_init, int q_init,
                        double t_end, double delta, double min_dwell = -1.0);

using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Classic fixed-step fourth-order Runge-Kutta on the same grid as
// simulate_pwl.  Throws NonFiniteState if the state overflows.
Trajectory simulate_ode(const VectorField& rhs, const Eigen::VectorXd& x_init,
                        double t_end, double delta);

VectorField lorenz_rhs(double sigma = 10.0, double rho = 28.0,
                       double beta = 8.0 / 3.0);

// One affine mode per equilibrium: A = Jacobian of rhs, a = -A e (so the
// equilibrium is a rest point of the local model), C = Jacobian of the
// output map, c chosen so the mode output matches output(e) at e.  Each
// mode's initial set is the singleton {e}.  Jacobians use central
// differences with step fd_step; non-equilibrium points are warned about on
// stderr.
PwlSystem linearize_at_equilibria(const VectorField& rhs,
                                  const VectorField& output,
                                  const std::vector<Eigen::VectorXd>& equilibria,
                                  double fd_step = 1e-6);

// Adds independent Gaussian noise to every state and derivative channel
// with per-channel sigma = (snr_percent / 100) * RMS(channel).  Deterministic
// for a fixed seed; snr_percent = 0 returns the input unchanged.
Trajectory add_noise(const Trajectory& traj, double snr_percent,
                     std::uint64_t seed);

// Glues trajectories sampled with one delta into a single time series; the
// junctions become switch times.  Mode labels survive only if every part
// has them.  All parts must share the state dimension.
Trajectory concatenate(const std::vector<Trajectory>& parts);

// Output samples y_i = C_q x_i + c_q with q = mode_labels[i].  A label-free
// trajectory is accepted only for single-mode systems.
std::vector<Eigen::VectorXd> outputs(const PwlSystem& sys,
                                     const Trajectory& traj);

}  // namespace pwl
