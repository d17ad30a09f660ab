#include "pwl/sim.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace pwl {

int Trajectory::state_dim() const {
    return states.empty() ? 0 : static_cast<int>(states.front().size());
}

void Trajectory::validate() const {
    const std::size_t m = times.size();
    if (states.size() != m || (!derivs.empty() && derivs.size() != m)) {
        throw LengthMismatch("trajectory columns have different lengths");
    }
    if (!mode_labels.empty() && mode_labels.size() != m) {
        throw LengthMismatch("mode labels do not cover every sample");
    }
    for (std::size_t i = 0; i + 1 < m; ++i) {
        if (!(times[i] < times[i + 1])) {
            throw Error("trajectory times must be strictly increasing");
        }
    }
    for (std::size_t i = 0; i + 1 < switch_times.size(); ++i) {
        if (!(switch_times[i] < switch_times[i + 1])) {
            throw Error("switch times must be strictly increasing");
        }
    }
}

namespace {

// exp([[A, a], [0, 0]] * dt): one step of the exact affine flow on (x, 1).
Eigen::MatrixXd affine_step_matrix(const Eigen::MatrixXd& A,
                                   const Eigen::VectorXd& a, double dt) {
    const Eigen::Index n = A.rows();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = A;
    aug.topRightCorner(n, 1) = a;
    aug *= dt;
    return aug.exp();
}

Eigen::VectorXd apply_affine_step(const Eigen::MatrixXd& step,
                                  const Eigen::VectorXd& x) {
    const Eigen::Index n = x.size();
    Eigen::VectorXd xe(n + 1);
    xe.head(n) = x;
    xe(n) = 1.0;
    return (step * xe).head(n);
}

void check_membership(const AffineMode& mode, const Eigen::VectorXd& x,
                      const std::string& what) {
    if (mode.initial_states.unconstrained) return;
    for (const auto& s : mode.initial_states.states) {
        if ((x - s).norm() <= 1e-9 * std::max(1.0, s.norm())) return;
    }
    throw InvalidEntryState(what + " is not a member of the mode's initial set");
}

int nearest_center(const std::vector<Eigen::VectorXd>& centers,
                   const Eigen::VectorXd& x) {
    int best = 0;
    double best_dist = (x - centers[0]).squaredNorm();
    for (std::size_t i = 1; i < centers.size(); ++i) {
        const double d = (x - centers[i]).squaredNorm();
        if (d < best_dist) {
            best_dist = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

long long sample_count(double t_end, double delta) {
    if (!(delta > 0.0)) throw Error("delta must be positive");
    const long long m = std::llround(t_end / delta);
    if (m < 1) throw Error("t_end must cover at least one sample");
    return m;
}

}  // namespace

Trajectory simulate_pwl(const PwlSystem& sys, const SwitchingLaw& law,
                        const Eigen::VectorXd& x_init, int q_init,
                        double t_end, double delta, double min_dwell) {
    sys.validate();
    const long long m = sample_count(t_end, delta);
    if (min_dwell < 0.0) min_dwell = 5.0 * delta;
    if (q_init < 0 || q_init >= sys.num_modes()) {
        throw Error("initial mode index out of range");
    }

    const VoronoiLaw* voronoi = std::get_if<VoronoiLaw>(&law);
    const ScheduleLaw* schedule = std::get_if<ScheduleLaw>(&law);
    if (voronoi) {
        if (static_cast<int>(voronoi->centers.size()) != sys.num_modes()) {
            throw DimensionMismatch("need exactly one center per mode");
        }
        const int n = sys.modes.front().state_dim();
        for (const auto& mode : sys.modes) {
            if (mode.state_dim() != n) {
                throw DimensionMismatch(
                    "state-driven switching requires a shared state dimension");
            }
        }
        for (const auto& c : voronoi->centers) {
            if (c.size() != n) {
                throw DimensionMismatch("center of wrong dimension");
            }
        }
    }
    std::vector<ScheduleEntry> entries;
    if (schedule) {
        entries = schedule->entries;
        double prev = 0.0;
        for (const auto& e : entries) {
            if (!(e.time > prev)) {
                throw Error("schedule times must be strictly increasing and positive");
            }
            prev = e.time;
            if (e.mode < 0 || e.mode >= sys.num_modes()) {
                throw Error("scheduled mode index out of range");
            }
            if (e.state.size() != sys.modes[e.mode].state_dim()) {
                throw DimensionMismatch("scheduled state of wrong dimension");
            }
            check_membership(sys.modes[e.mode], e.state, "scheduled entry state");
        }
    }

    int q = q_init;
    if (x_init.size() != sys.modes[q].state_dim()) {
        throw DimensionMismatch("x_init of wrong dimension for the initial mode");
    }
    check_membership(sys.modes[q], x_init, "initial state");
    Eigen::VectorXd x = x_init;

    std::vector<Eigen::MatrixXd> step_cache(sys.num_modes());
    auto step_for = [&](int mode) -> const Eigen::MatrixXd& {
        if (step_cache[mode].size() == 0) {
            step_cache[mode] =
                affine_step_matrix(sys.modes[mode].A, sys.modes[mode].a, delta);
        }
        return step_cache[mode];
    };

    Trajectory traj;
    traj.delta = delta;
    traj.times.reserve(m);
    traj.states.reserve(m);
    traj.derivs.reserve(m);
    traj.mode_labels.reserve(m);
    traj.switch_times.push_back(0.0);

    auto push_sample = [&](double t) {
        traj.times.push_back(t);
        traj.states.push_back(x);
        traj.derivs.push_back(sys.modes[q].A * x + sys.modes[q].a);
        traj.mode_labels.push_back(q);
        if (!traj.states.back().allFinite()) {
            throw NonFiniteState("state became non-finite at t = " +
                                 std::to_string(t));
        }
    };

    push_sample(0.0);
    double last_switch = 0.0;
    std::size_t next_entry = 0;
    for (long long i = 1; i < m; ++i) {
        const double t = static_cast<double>(i) * delta;
        x = apply_affine_step(step_for(q), x);
        if (schedule) {
            while (next_entry < entries.size() &&
                   entries[next_entry].time <= t + 1e-9 * delta) {
                q = entries[next_entry].mode;
                x = entries[next_entry].state;
                if (traj.switch_times.back() != t) traj.switch_times.push_back(t);
                last_switch = t;
                ++next_entry;
            }
        } else if (voronoi) {
            const int cell = nearest_center(voronoi->centers, x);
            if (cell != q && t - last_switch >= min_dwell - 1e-9 * delta) {
                q = cell;
                traj.switch_times.push_back(t);
                last_switch = t;
            }
        }
        push_sample(t);
    }
    return traj;
}

Trajectory simulate_ode(const VectorField& rhs, const Eigen::VectorXd& x_init,
                        double t_end, double delta) {
    const long long m = sample_count(t_end, delta);
    Trajectory traj;
    traj.delta = delta;
    traj.switch_times.push_back(0.0);
    Eigen::VectorXd x = x_init;
    for (long long i = 0; i < m; ++i) {
        const double t = static_cast<double>(i) * delta;
        if (i > 0) {
            const Eigen::VectorXd k1 = rhs(x);
            const Eigen::VectorXd k2 = rhs(x + 0.5 * delta * k1);
            const Eigen::VectorXd k3 = rhs(x + 0.5 * delta * k2);
            const Eigen::VectorXd k4 = rhs(x + delta * k3);
            x = x + (delta / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (!x.allFinite()) {
            throw NonFiniteState("state became non-finite at t = " +
                                 std::to_string(t));
        }
        traj.times.push_back(t);
        traj.states.push_back(x);
        traj.derivs.push_back(rhs(x));
    }
    return traj;
}

VectorField lorenz_rhs(double sigma, double rho, double beta) {
    return [sigma, rho, beta](const Eigen::VectorXd& x) {
        Eigen::VectorXd dx(3);
        dx(0) = sigma * (x(1) - x(0));
        dx(1) = x(0) * (rho - x(2)) - x(1);
        dx(2) = x(0) * x(1) - beta * x(2);
        return dx;
    };
}

namespace {

Eigen::MatrixXd central_jacobian(const VectorField& f, const Eigen::VectorXd& x,
                                 double h) {
    const Eigen::Index n = x.size();
    const Eigen::Index p = f(x).size();
    Eigen::MatrixXd jac(p, n);
    Eigen::VectorXd lo = x, hi = x;
    for (Eigen::Index j = 0; j < n; ++j) {
        hi(j) = x(j) + h;
        lo(j) = x(j) - h;
        jac.col(j) = (f(hi) - f(lo)) / (2.0 * h);
        hi(j) = x(j);
        lo(j) = x(j);
    }
    return jac;
}

}  // namespace

PwlSystem linearize_at_equilibria(const VectorField& rhs,
                                  const VectorField& output,
                                  const std::vector<Eigen::VectorXd>& equilibria,
                                  double fd_step) {
    if (equilibria.empty()) throw Error("need at least one equilibrium");
    PwlSystem sys;
    sys.output_dim = static_cast<int>(output(equilibria.front()).size());
    for (const auto& e : equilibria) {
        const Eigen::VectorXd residual = rhs(e);
        if (residual.norm() > 1e-6 * (1.0 + e.norm())) {
            std::cerr << "warning: linearization point is not an equilibrium "
                         "(|f| = "
                      << residual.norm() << ")\n";
        }
        AffineMode mode;
        mode.A = central_jacobian(rhs, e, fd_step);
        mode.a = -mode.A * e;
        mode.C = central_jacobian(output, e, fd_step);
        mode.c = output(e) - mode.C * e;
        mode.initial_states = InitialStates::single(e);
        sys.modes.push_back(std::move(mode));
    }
    return sys;
}

Trajectory add_noise(const Trajectory& traj, double snr_percent,
                     std::uint64_t seed) {
    traj.validate();
    if (snr_percent < 0.0) throw Error("noise level must be nonnegative");
    if (snr_percent == 0.0 || traj.size() == 0) return traj;
    const int n = traj.state_dim();
    for (const auto& x : traj.states) {
        if (x.size() != n) {
            throw DimensionMismatch("noise requires a uniform state dimension");
        }
    }
    const int m = traj.size();
    auto channel_rms = [&](const std::vector<Eigen::VectorXd>& rows, int ch) {
        double acc = 0.0;
        for (const auto& v : rows) acc += v(ch) * v(ch);
        return std::sqrt(acc / m);
    };
    Trajectory noisy = traj;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double level = snr_percent / 100.0;
    for (int ch = 0; ch < n; ++ch) {
        const double sigma = level * channel_rms(traj.states, ch);
        for (int i = 0; i < m; ++i) noisy.states[i](ch) += sigma * gauss(rng);
    }
    if (!traj.derivs.empty()) {
        for (int ch = 0; ch < n; ++ch) {
            const double sigma = level * channel_rms(traj.derivs, ch);
            for (int i = 0; i < m; ++i) noisy.derivs[i](ch) += sigma * gauss(rng);
        }
    }
    return noisy;
}

Trajectory concatenate(const std::vector<Trajectory>& parts) {
    if (parts.empty()) throw Error("nothing to concatenate");
    for (const auto& part : parts) {
        part.validate();
        if (part.size() == 0) throw Error("cannot concatenate an empty trajectory");
    }
    const double delta = parts.front().delta;
    const int n = parts.front().state_dim();
    bool keep_labels = true;
    bool keep_derivs = true;
    for (const auto& part : parts) {
        if (std::abs(part.delta - delta) > 1e-12 * std::max(delta, 1.0)) {
            throw Error("concatenation requires one shared sample spacing");
        }
        if (part.state_dim() != n) {
            throw DimensionMismatch("concatenation requires one state dimension");
        }
        keep_labels = keep_labels && part.has_labels();
        keep_derivs = keep_derivs && !part.derivs.empty();
    }
    Trajectory out;
    out.delta = delta;
    double shift = 0.0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const Trajectory& part = parts[k];
        if (k > 0) shift = out.times.back() + delta;
        for (int i = 0; i < part.size(); ++i) {
            out.times.push_back(shift + part.times[i]);
            out.states.push_back(part.states[i]);
            if (keep_derivs) out.derivs.push_back(part.derivs[i]);
            if (keep_labels) out.mode_labels.push_back(part.mode_labels[i]);
        }
        for (double s : part.switch_times) {
            const double shifted = shift + s;
            if (out.switch_times.empty() || out.switch_times.back() < shifted) {
                out.switch_times.push_back(shifted);
            }
        }
    }
    return out;
}

std::vector<Eigen::VectorXd> outputs(const PwlSystem& sys,
                                     const Trajectory& traj) {
    sys.validate();
    traj.validate();
    if (!traj.has_labels() && sys.num_modes() != 1) {
        throw Error("trajectory without mode labels needs a single-mode system");
    }
    std::vector<Eigen::VectorXd> ys;
    ys.reserve(traj.size());
    for (int i = 0; i < traj.size(); ++i) {
        const int q = traj.has_labels() ? traj.mode_labels[i] : 0;
        if (q < 0 || q >= sys.num_modes()) {
            throw Error("mode label out of range at sample " + std::to_string(i));
        }
        const AffineMode& mode = sys.modes[q];
        if (traj.states[i].size() != mode.state_dim()) {
            throw DimensionMismatch("state dimension does not match its mode");
        }
        ys.push_back(mode.C * traj.states[i] + mode.c);
    }
    return ys;
}

}  // namespace pwl
