#include "pwl/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pwl/eval.hpp"
#include "pwl/experiments.hpp"
#include "pwl/identify.hpp"
#include "pwl/io.hpp"
#include "pwl/model.hpp"
#include "pwl/numeric.hpp"
#include "pwl/realization.hpp"
#include "pwl/sim.hpp"

namespace pwl {

namespace {

void emit_error(int code, const std::string& kind, const std::string& message) {
    json line;
    line["error"] = true;
    line["code"] = code;
    line["kind"] = kind;
    line["message"] = message;
    std::cerr << line.dump() << "\n";
}

Eigen::VectorXd parse_vector_arg(const std::string& text) {
    std::vector<double> values;
    std::stringstream in(text);
    std::string field;
    while (std::getline(in, field, ',')) {
        try {
            values.push_back(std::stod(field));
        } catch (const std::exception&) {
            throw Error("cannot parse \"" + field + "\" as a number");
        }
    }
    if (values.empty()) throw Error("empty vector argument");
    Eigen::VectorXd v(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) v(i) = values[i];
    return v;
}

ModeParams mode_params_from_system(const PwlSystem& sys) {
    sys.validate();
    ModeParams params;
    for (const auto& mode : sys.modes) {
        if (mode.A.rows() != mode.C.cols() || mode.a.size() != mode.A.rows()) {
            throw DimensionMismatch("mode has inconsistent shapes");
        }
        params.A.push_back(mode.A);
        params.a.push_back(mode.a);
    }
    params.validate();
    return params;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulatePwlOpts {
    std::string model, voronoi, schedule, x0_text, out;
    int q0 = -1;
    int concat = 1;
    double t_end = 0.0, delta = 0.0, min_dwell = -1.0, snr = 0.0;
    std::uint64_t seed = 0;
};

int do_simulate_pwl(const SimulatePwlOpts& o) {
    PwlSystem sys = pwl_from_json(load_json_file(o.model));
    if (!o.voronoi.empty() && !o.schedule.empty()) {
        throw Error("--voronoi and --schedule are mutually exclusive");
    }

    SwitchingLaw law = ScheduleLaw{};
    bool is_voronoi = false;
    if (!o.voronoi.empty()) {
        const json doc = load_json_file(o.voronoi);
        if (!doc.contains("centers") || !doc["centers"].is_array()) {
            throw ParseError("switching law document needs a \"centers\" array");
        }
        VoronoiLaw vor;
        for (const auto& c : doc["centers"]) {
            vor.centers.push_back(vector_from_json(c, "center"));
        }
        law = std::move(vor);
        is_voronoi = true;
    } else if (!o.schedule.empty()) {
        const json doc = load_json_file(o.schedule);
        if (!doc.contains("entries") || !doc["entries"].is_array()) {
            throw ParseError("schedule document needs an \"entries\" array");
        }
        ScheduleLaw sched;
        for (const auto& e : doc["entries"]) {
            ScheduleEntry entry;
            if (!e.contains("time") || !e.contains("mode") || !e.contains("state")) {
                throw ParseError("schedule entries need time, mode and state");
            }
            entry.time = e["time"].get<double>();
            entry.mode = e["mode"].get<int>();
            entry.state = vector_from_json(e["state"], "schedule state");
            sched.entries.push_back(std::move(entry));
        }
        law = std::move(sched);
    }

    std::mt19937_64 rng(derive_seed(o.seed, 0xc0de));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    // Box for random starting points: the inflated hull of the centers for
    // state-driven switching, [-1, 1]^n otherwise.
    Eigen::VectorXd box_lo, box_hi;
    if (is_voronoi) {
        const auto& centers = std::get<VoronoiLaw>(law).centers;
        box_lo = centers.front();
        box_hi = centers.front();
        for (const auto& c : centers) {
            box_lo = box_lo.cwiseMin(c);
            box_hi = box_hi.cwiseMax(c);
        }
        const Eigen::VectorXd pad =
            0.25 * (box_hi - box_lo).cwiseMax(Eigen::VectorXd::Ones(box_lo.size()));
        box_lo -= pad;
        box_hi += pad;
    }

    auto pick_mode = [&](const Eigen::VectorXd& x) {
        if (is_voronoi) {
            const auto& centers = std::get<VoronoiLaw>(law).centers;
            int best = 0;
            double best_d = (x - centers[0]).squaredNorm();
            for (std::size_t q = 1; q < centers.size(); ++q) {
                const double d = (x - centers[q]).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(q);
                }
            }
            return best;
        }
        return o.q0 < 0 ? 0 : o.q0;
    };

    auto random_start = [&](int q) {
        const AffineMode& mode = sys.modes.at(q);
        if (!mode.initial_states.unconstrained) {
            const auto& states = mode.initial_states.states;
            std::uniform_int_distribution<std::size_t> pick(0, states.size() - 1);
            return states[pick(rng)];
        }
        const int n = mode.state_dim();
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) {
            const double u = unit(rng);
            x(i) = is_voronoi ? box_lo(i) + 0.5 * (u + 1.0) * (box_hi(i) - box_lo(i))
                              : u;
        }
        return x;
    };

    std::vector<Trajectory> parts;
    for (int run = 0; run < std::max(o.concat, 1); ++run) {
        Eigen::VectorXd x0;
        int q0 = o.q0;
        if (run == 0 && !o.x0_text.empty()) {
            x0 = parse_vector_arg(o.x0_text);
            if (is_voronoi || q0 < 0) q0 = pick_mode(x0);
        } else {
            q0 = is_voronoi ? 0 : (o.q0 < 0 ? 0 : o.q0);
            x0 = random_start(q0);
            if (is_voronoi) q0 = pick_mode(x0);
        }
        parts.push_back(simulate_pwl(sys, law, x0, q0, o.t_end, o.delta,
                                     o.min_dwell));
    }
    Trajectory traj = parts.size() == 1 ? parts.front() : concatenate(parts);
    if (o.snr > 0.0) traj = add_noise(traj, o.snr, derive_seed(o.seed, 0x0153));
    write_trajectory_csv(o.out, traj);
    std::cout << "wrote " << traj.size() << " samples to " << o.out << "\n";
    return 0;
}

struct SimulateLorenzOpts {
    double sigma = 10.0, rho = 28.0, beta = 8.0 / 3.0;
    std::string x0_text = "-8,8,27", out;
    double t_end = 0.0, delta = 0.0, snr = 0.0;
    std::uint64_t seed = 0;
};

int do_simulate_lorenz(const SimulateLorenzOpts& o) {
    const Eigen::VectorXd x0 = parse_vector_arg(o.x0_text);
    if (x0.size() != 3) throw Error("--x0 must have three components");
    Trajectory traj =
        simulate_ode(lorenz_rhs(o.sigma, o.rho, o.beta), x0, o.t_end, o.delta);
    if (o.snr > 0.0) traj = add_noise(traj, o.snr, derive_seed(o.seed, 0x0153));
    write_trajectory_csv(o.out, traj);
    std::cout << "wrote " << traj.size() << " samples to " << o.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// identify

struct IdentifyOpts {
    std::string data, out, assign_out;
    int k = 0;
    int restarts = 10, t_max = 200;
    double epsilon = -1.0, delta_rel = 1e-12;
    std::uint64_t seed = 0;
    bool fd = false;
};

int do_identify(const IdentifyOpts& o) {
    Trajectory traj = read_trajectory_csv(o.data);
    if (traj.derivs.empty() && !o.fd) {
        throw Error("data has no derivative columns; pass --fd to estimate them");
    }
    const Dataset data =
        o.fd ? dataset_by_finite_differences(traj) : dataset_from_trajectory(traj);

    IdentifyConfig config;
    config.epsilon = o.epsilon;
    config.delta_rel = o.delta_rel;
    config.t_max = o.t_max;
    config.restarts = o.restarts;
    config.seed = o.seed;
    const IdentifyResult result = identify(data, o.k, config);

    save_json_file(o.out, to_json(result));
    if (!o.assign_out.empty()) {
        std::ofstream out(o.assign_out);
        if (!out) throw Error("cannot open " + o.assign_out + " for writing");
        out << "t,mode\n";
        const std::vector<int> assignment = result.weights.assignments();
        for (std::size_t i = 0; i < assignment.size(); ++i) {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", data.times[i]);
            out << buf << "," << assignment[i] << "\n";
        }
    }
    std::cout << "objective " << result.objective << " after "
              << result.restarts_used << " restart(s)\n";
    if (!result.converged) {
        emit_error(4, "not_converged",
                   "objective " + std::to_string(result.objective) +
                       " did not drop below " + std::to_string(result.epsilon));
        return 4;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// realize

struct RealizeOpts {
    std::string model, hankel, out, hankel_out;
    int l = -1, m = -1, r = -1;
    double rank_tol = -1.0;
    std::vector<int> kn;
    bool exhaustive = false;
    bool n_after_embedding = false;
};

int do_realize(const RealizeOpts& o) {
    if (o.model.empty() == o.hankel.empty()) {
        throw Error("pass exactly one of --model or --hankel");
    }

    HankelMatrix h;
    bool embedded = false;
    if (!o.model.empty()) {
        PwlSystem sys = pwl_from_json(load_json_file(o.model));
        if (!sys.is_linear()) {
            sys = embed_affine_to_linear(sys);
            embedded = true;
        }
        const Lssj merged = merge_to_lssj(sys);
        const int L = o.l >= 0 ? o.l : merged.n;
        const int M = o.m >= 0 ? o.m : merged.n;
        const int pieces = static_cast<int>(merged.X0.size());
        int R = o.r >= 1 ? o.r : pieces;
        if (R > pieces) {
            throw Error("only " + std::to_string(pieces) + " pieces available");
        }
        const MarkovTable table = markov_table(merged, L + M + 1);
        h = build_hankel(table, L, M + 1, R);
        if (R < pieces) {
            // Using more pieces can only grow the realized behavior; warn
            // when it actually does.
            const HankelMatrix wider = build_hankel(table, L, M + 1, R + 1);
            const KalmanHoResult base = kalman_ho_full(h, o.rank_tol);
            const KalmanHoResult more = kalman_ho_full(wider, o.rank_tol);
            double diff = 0.0, scale = 0.0;
            for (int pc = 0; pc < R; ++pc) {
                const auto seq_base =
                    markov_sequence(base.system, base.piece_states[pc], L + M);
                const auto seq_more =
                    markov_sequence(more.system, more.piece_states[pc], L + M);
                for (std::size_t k = 0; k < seq_base.size(); ++k) {
                    diff += (seq_base[k] - seq_more[k]).squaredNorm();
                    scale += seq_base[k].squaredNorm();
                }
            }
            if (std::sqrt(diff) > 1e-6 * std::max(std::sqrt(scale), 1e-12) ||
                more.system.n != base.system.n) {
                json warn;
                warn["warning"] = "raising --r changes the realization";
                warn["r"] = R;
                warn["dimension_at_r"] = base.system.n;
                warn["dimension_at_r_plus_1"] = more.system.n;
                std::cerr << warn.dump() << "\n";
            }
        }
    } else {
        h = hankel_from_json(load_json_file(o.hankel));
    }
    if (!o.hankel_out.empty()) save_json_file(o.hankel_out, to_json(h));

    if (!o.kn.empty()) {
        const int K = o.kn[0];
        int N = o.kn[1];
        if (embedded && !o.n_after_embedding) N += 1;
        const KnRealizeResult result =
            kn_realize(h, K, N, o.rank_tol,
                       o.exhaustive ? PartitionSearch::exhaustive
                                    : PartitionSearch::greedy);
        json doc = to_json(result.system);
        doc["partition"] = result.partition.blocks;
        json dims = json::array();
        for (const auto& mode : result.system.modes) dims.push_back(mode.state_dim());
        doc["mode_dims"] = std::move(dims);
        save_json_file(o.out, doc);
        std::cout << "realized " << result.system.num_modes()
                  << " mode(s) from " << h.num_pieces() << " piece(s)\n";
    } else {
        const Lssj sys = kalman_ho(h, o.rank_tol);
        save_json_file(o.out, to_json(sys));
        std::cout << "realized dimension " << sys.n << " from "
                  << h.num_pieces() << " piece(s)\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalMatchOpts {
    std::string reference, estimated, out;
};

int do_eval_match(const EvalMatchOpts& o) {
    const ModeParams ref =
        mode_params_from_system(pwl_from_json(load_json_file(o.reference)));
    const ModeParams est =
        mode_params_from_system(pwl_from_json(load_json_file(o.estimated)));
    const MatchReport report = match_modes(ref, est);
    if (!o.out.empty()) save_json_file(o.out, to_json(report));
    double worst = 0.0;
    for (double e : report.per_mode_error) {
        if (!std::isnan(e)) worst = std::max(worst, e);
    }
    std::cout << "total_error " << report.total_error << " max_rel_error "
              << worst << " unmatched " << report.unmatched.size() << "\n";
    return 0;
}

struct EvalSegmentOpts {
    std::string a, b, out;
};

int do_eval_segment(const EvalSegmentOpts& o) {
    const Trajectory ta = read_trajectory_csv(o.a);
    const Trajectory tb = read_trajectory_csv(o.b);
    if (!ta.has_labels() || !tb.has_labels()) {
        throw Error("both files need a mode column");
    }
    const double agreement =
        segmentation_agreement(ta.mode_labels, tb.mode_labels);
    if (!o.out.empty()) {
        json doc;
        doc["agreement"] = agreement;
        save_json_file(o.out, doc);
    }
    std::cout << "agreement " << agreement << "\n";
    return 0;
}

struct EvalArOpts {
    std::string traj, coeffs, out;
    int mode = 0;
};

int do_eval_ar(const EvalArOpts& o) {
    const Trajectory traj = read_trajectory_csv(o.traj);
    const json doc = load_json_file(o.coeffs);
    std::vector<Eigen::MatrixXd> coeffs;
    if (doc.contains("coeffs")) {
        for (const auto& c : doc["coeffs"]) {
            coeffs.push_back(matrix_from_json(c, "coefficient"));
        }
    } else {
        const SarsModel sars = sars_from_json(doc);
        if (o.mode < 0 || o.mode >= static_cast<int>(sars.modes.size())) {
            throw Error("--mode out of range");
        }
        coeffs = sars.modes[o.mode];
    }
    const double residual = verify_ar(traj, coeffs);
    if (!o.out.empty()) {
        json out;
        out["residual"] = residual;
        save_json_file(o.out, out);
    }
    std::cout << "residual " << residual << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// reproduce

struct ReproduceOpts {
    std::string preset, out_dir = ".";
    std::uint64_t seed = 0;
    int trials = 10;
    double snr = 0.0;
    int k = -1;
    int restarts = 10;
};

int do_reproduce(const ReproduceOpts& o) {
    std::filesystem::create_directories(o.out_dir);
    if (o.preset == "paper-artificial") {
        const int k = o.k > 0 ? o.k : 5;
        json per_trial = json::array();
        int successes = 0;
        int tight_majorities = 0;
        for (int t = 0; t < o.trials; ++t) {
            const ArtificialTrialReport report =
                run_artificial_trial(derive_seed(o.seed, t), k, o.snr,
                                     o.restarts);
            const bool success = report.max_rel_error < 1e-6;
            successes += success ? 1 : 0;
            tight_majorities += report.modes_matched_tightly >= (k + 1) / 2 ? 1 : 0;
            json row;
            row["trial"] = t;
            row["max_rel_error"] = report.max_rel_error;
            row["modes_matched_tightly"] = report.modes_matched_tightly;
            row["objective"] = report.fit.objective;
            row["converged"] = report.fit.converged;
            row["seconds"] = report.seconds;
            per_trial.push_back(std::move(row));
            std::cout << "trial " << t << ": max_rel_error "
                      << report.max_rel_error << ", tight matches "
                      << report.modes_matched_tightly << "/" << k << ", "
                      << report.seconds << " s\n";
        }
        json summary;
        summary["preset"] = o.preset;
        summary["snr_percent"] = o.snr;
        summary["trials"] = o.trials;
        summary["successes"] = successes;
        summary["tight_majorities"] = tight_majorities;
        summary["per_trial"] = std::move(per_trial);
        save_json_file(o.out_dir + "/artificial_summary.json", summary);
        std::cout << successes << "/" << o.trials
                  << " trials recovered every mode below 1e-6\n";
        if (o.snr > 0.0) {
            std::cout << tight_majorities << "/" << o.trials
                      << " trials matched a majority of modes at correlation "
                         ">= 0.95\n";
        }
        return 0;
    }
    if (o.preset == "paper-lorenz") {
        const int k = o.k > 0 ? o.k : 2;
        const LorenzTrialReport report = run_lorenz_trial(o.seed, k, o.restarts);
        json summary;
        summary["preset"] = o.preset;
        summary["agreement"] = report.agreement;
        summary["objective"] = report.fit.objective;
        summary["seconds"] = report.seconds;
        save_json_file(o.out_dir + "/lorenz_summary.json", summary);
        std::cout << "lobe agreement " << report.agreement << "\n";
        return 0;
    }
    throw Error("unknown preset \"" + o.preset +
                "\" (expected paper-artificial or paper-lorenz)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"realization and identification of piecewise-linear systems"};
    app.name("pwlid");
    app.set_version_flag("--version", "pwlid 0.1.0");
    app.require_subcommand(1);

    int rc = 0;

    // simulate
    auto* simulate = app.add_subcommand("simulate", "sample trajectories");
    simulate->require_subcommand(1);

    SimulatePwlOpts sim_pwl;
    auto* sp = simulate->add_subcommand("pwl", "simulate a piecewise-linear model");
    sp->add_option("--model", sim_pwl.model, "model JSON")->required();
    sp->add_option("--voronoi", sim_pwl.voronoi, "nearest-center switching law JSON");
    sp->add_option("--schedule", sim_pwl.schedule, "scheduled switching JSON");
    sp->add_option("--x0", sim_pwl.x0_text, "initial state, comma separated");
    sp->add_option("--q0", sim_pwl.q0, "initial mode index");
    sp->add_option("--t-end", sim_pwl.t_end, "duration per run")->required();
    sp->add_option("--delta", sim_pwl.delta, "sample spacing")->required();
    sp->add_option("--min-dwell", sim_pwl.min_dwell,
                   "minimum time between switches (default 5*delta)");
    sp->add_option("--concat", sim_pwl.concat, "number of concatenated runs");
    sp->add_option("--noise-snr", sim_pwl.snr, "noise level in percent");
    sp->add_option("--seed", sim_pwl.seed, "random seed");
    sp->add_option("--out", sim_pwl.out, "output CSV")->required();
    sp->callback([&] { rc = do_simulate_pwl(sim_pwl); });

    SimulateLorenzOpts sim_lorenz;
    auto* sl = simulate->add_subcommand("lorenz", "simulate the Lorenz system");
    sl->add_option("--sigma", sim_lorenz.sigma, "sigma parameter");
    sl->add_option("--rho", sim_lorenz.rho, "rho parameter");
    sl->add_option("--beta", sim_lorenz.beta, "beta parameter");
    sl->add_option("--x0", sim_lorenz.x0_text, "initial state");
    sl->add_option("--t-end", sim_lorenz.t_end, "duration")->required();
    sl->add_option("--delta", sim_lorenz.delta, "sample spacing")->required();
    sl->add_option("--noise-snr", sim_lorenz.snr, "noise level in percent");
    sl->add_option("--seed", sim_lorenz.seed, "random seed");
    sl->add_option("--out", sim_lorenz.out, "output CSV")->required();
    sl->callback([&] { rc = do_simulate_lorenz(sim_lorenz); });

    // identify
    IdentifyOpts ident;
    auto* id = app.add_subcommand("identify",
                                  "fit switched affine laws to sampled data");
    id->add_option("--data", ident.data, "trajectory CSV")->required();
    id->add_option("--k", ident.k, "number of modes")->required();
    id->add_option("--restarts", ident.restarts, "random restarts");
    id->add_option("--seed", ident.seed, "random seed");
    id->add_option("--epsilon", ident.epsilon,
                   "absolute convergence threshold (default: auto)");
    id->add_option("--delta-rel", ident.delta_rel, "relative stall threshold");
    id->add_option("--t-max", ident.t_max, "iteration cap per restart");
    id->add_flag("--fd", ident.fd,
                 "estimate derivatives by central differences");
    id->add_option("--out", ident.out, "result JSON")->required();
    id->add_option("--assign-out", ident.assign_out, "assignment CSV");
    id->callback([&] { rc = do_identify(ident); });

    // realize
    RealizeOpts real;
    auto* re = app.add_subcommand("realize",
                                  "minimal realization from output data");
    re->add_option("--model", real.model, "model JSON to realize from");
    re->add_option("--hankel", real.hankel, "prebuilt Hankel JSON");
    re->add_option("--l", real.l, "row depth L (default: merged dimension)");
    re->add_option("--m", real.m, "column depth M (default: merged dimension)");
    re->add_option("--r", real.r, "number of pieces (default: all)");
    re->add_option("--rank-tol", real.rank_tol, "relative rank tolerance");
    re->add_option("--kn", real.kn, "mode and dimension bounds K N")
        ->expected(2);
    re->add_flag("--exhaustive", real.exhaustive,
                 "exhaustive partition search (oracle, small inputs)");
    re->add_flag("--n-bound-after-embedding", real.n_after_embedding,
                 "interpret N in extended coordinates");
    re->add_option("--hankel-out", real.hankel_out, "dump the built Hankel");
    re->add_option("--out", real.out, "realized model JSON")->required();
    re->callback([&] { rc = do_realize(real); });

    // eval
    auto* eval = app.add_subcommand("eval", "compare models and labelings");
    eval->require_subcommand(1);

    EvalMatchOpts match;
    auto* em = eval->add_subcommand("match", "pair estimated and reference modes");
    em->add_option("--true", match.reference, "reference model JSON")->required();
    em->add_option("--est", match.estimated, "estimated model JSON")->required();
    em->add_option("--out", match.out, "match report JSON");
    em->callback([&] { rc = do_eval_match(match); });

    EvalSegmentOpts segment;
    auto* es = eval->add_subcommand("segment", "compare mode labelings");
    es->add_option("--a", segment.a, "first labeled CSV")->required();
    es->add_option("--b", segment.b, "second labeled CSV")->required();
    es->add_option("--out", segment.out, "agreement JSON");
    es->callback([&] { rc = do_eval_segment(segment); });

    EvalArOpts ar;
    auto* ea = eval->add_subcommand("ar", "autoregressive residual check");
    ea->add_option("--traj", ar.traj, "trajectory CSV")->required();
    ea->add_option("--coeffs", ar.coeffs, "coefficient JSON")->required();
    ea->add_option("--mode", ar.mode, "mode index inside a multi-mode document");
    ea->add_option("--out", ar.out, "residual JSON");
    ea->callback([&] { rc = do_eval_ar(ar); });

    // reproduce
    ReproduceOpts repro;
    auto* rp = app.add_subcommand("reproduce", "run a benchmark preset");
    rp->add_option("--preset", repro.preset,
                   "paper-artificial or paper-lorenz")
        ->required();
    rp->add_option("--seed", repro.seed, "random seed");
    rp->add_option("--trials", repro.trials, "number of trials");
    rp->add_option("--snr", repro.snr, "noise level in percent");
    rp->add_option("--k", repro.k, "mode count override");
    rp->add_option("--restarts", repro.restarts, "random restarts");
    rp->add_option("--out-dir", repro.out_dir, "directory for reports");
    rp->callback([&] { rc = do_reproduce(repro); });

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.push_back("pwlid");
    for (const auto& a : args) argv_storage.push_back(a);
    std::vector<const char*> argv;
    argv.reserve(argv_storage.size());
    for (const auto& a : argv_storage) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        return rc;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help / --version
        }
        emit_error(2, "usage", e.what());
        return 2;
    } catch (const KnPartitionNotFound& e) {
        emit_error(5, "kn_not_found", e.what());
        return 5;
    } catch (const RankDeficientShift& e) {
        emit_error(6, "rank_deficient_shift", e.what());
        return 6;
    } catch (const NonFiniteState& e) {
        emit_error(3, "divergence", e.what());
        return 3;
    } catch (const ParseError& e) {
        emit_error(2, "parse", e.what());
        return 2;
    } catch (const Error& e) {
        emit_error(2, "config", e.what());
        return 2;
    } catch (const std::exception& e) {
        emit_error(2, "internal", e.what());
        return 2;
    }
}

}  // namespace pwl
