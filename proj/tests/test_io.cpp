#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "pwl/errors.hpp"
#include "pwl/identify.hpp"
#include "pwl/io.hpp"
#include "pwl/model.hpp"
#include "pwl/realization.hpp"
#include "pwl/sim.hpp"

using namespace pwl;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

PwlSystem sample_system(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    PwlSystem sys;
    sys.output_dim = 2;
    for (int q = 0; q < 2; ++q) {
        AffineMode m;
        m.A = Eigen::MatrixXd::NullaryExpr(3, 3, [&] { return gauss(rng); });
        m.a = Eigen::VectorXd::NullaryExpr(3, [&] { return gauss(rng); });
        m.C = Eigen::MatrixXd::NullaryExpr(2, 3, [&] { return gauss(rng); });
        m.c = Eigen::VectorXd::NullaryExpr(2, [&] { return gauss(rng); });
        if (q == 0) {
            m.initial_states = InitialStates::of(
                {Eigen::VectorXd::NullaryExpr(3, [&] { return gauss(rng); }),
                 Eigen::VectorXd::NullaryExpr(3, [&] { return gauss(rng); })});
        } else {
            m.initial_states = InitialStates::all_of_space();
        }
        sys.modes.push_back(std::move(m));
    }
    return sys;
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("model documents round trip bit for bit") {
    PwlSystem sys = sample_system(3);
    const std::string path = temp_path("pwl_model_roundtrip.json");
    save_json_file(path, to_json(sys));
    PwlSystem back = pwl_from_json(load_json_file(path));

    REQUIRE(back.num_modes() == sys.num_modes());
    CHECK(back.output_dim == sys.output_dim);
    for (int q = 0; q < sys.num_modes(); ++q) {
        CHECK((back.modes[q].A - sys.modes[q].A).norm() == 0.0);
        CHECK((back.modes[q].a - sys.modes[q].a).norm() == 0.0);
        CHECK((back.modes[q].C - sys.modes[q].C).norm() == 0.0);
        CHECK((back.modes[q].c - sys.modes[q].c).norm() == 0.0);
        CHECK(back.modes[q].initial_states.unconstrained ==
              sys.modes[q].initial_states.unconstrained);
        REQUIRE(back.modes[q].initial_states.states.size() ==
                sys.modes[q].initial_states.states.size());
        for (std::size_t i = 0; i < sys.modes[q].initial_states.states.size();
             ++i) {
            CHECK((back.modes[q].initial_states.states[i] -
                   sys.modes[q].initial_states.states[i])
                      .norm() == 0.0);
        }
    }
    std::remove(path.c_str());
}

TEST_CASE("jump systems serialize as one mode linear documents") {
    Lssj sys;
    sys.n = 2;
    sys.A = Eigen::MatrixXd(2, 2);
    sys.A << 0, 1, -1, 0;
    sys.C = Eigen::MatrixXd(1, 2);
    sys.C << 1, 0;
    sys.X0 = {Eigen::Vector2d(0, 1), Eigen::Vector2d(1, 0)};

    json doc = to_json(sys);
    CHECK(doc["modes"].size() == 1);
    Lssj back = lssj_from_json(doc);
    CHECK(back.n == 2);
    CHECK((back.A - sys.A).norm() == 0.0);
    CHECK((back.C - sys.C).norm() == 0.0);
    REQUIRE(back.X0.size() == 2);
    CHECK((back.X0[0] - sys.X0[0]).norm() == 0.0);

    SUBCASE("affine or multi mode documents are rejected") {
        PwlSystem affine = sample_system(9);
        CHECK_THROWS_AS(lssj_from_json(to_json(affine)), Error);
    }
}

TEST_CASE("autoregressive model documents") {
    SarsModel sars;
    sars.order = 2;
    sars.modes = {{Eigen::MatrixXd::Constant(1, 1, -0.3),
                   Eigen::MatrixXd::Constant(1, 1, -1.0)},
                  {Eigen::MatrixXd::Zero(1, 1),
                   Eigen::MatrixXd::Constant(1, 1, 0.25)}};
    SarsModel back = sars_from_json(to_json(sars));
    CHECK(back.order == 2);
    REQUIRE(back.modes.size() == 2);
    for (int q = 0; q < 2; ++q) {
        for (int k = 0; k < 2; ++k) {
            CHECK((back.modes[q][k] - sars.modes[q][k]).norm() == 0.0);
        }
    }
}

TEST_CASE("hankel documents") {
    MarkovTable table;
    table.sequences = {{}};
    for (int k = 0; k <= 4; ++k) {
        table.sequences[0].push_back(Eigen::VectorXd::Constant(1, k + 1.0));
    }
    HankelMatrix h = build_hankel(table, 2, 2, 1);
    HankelMatrix back = hankel_from_json(to_json(h));
    CHECK(back.L == h.L);
    CHECK(back.M == h.M);
    CHECK(back.p == h.p);
    CHECK(back.pieces == h.pieces);
    CHECK((back.entries - h.entries).norm() == 0.0);

    SUBCASE("fields must carry the documented types") {
        json doc = to_json(h);
        doc["L"] = "two";
        CHECK_THROWS_AS(hankel_from_json(doc), ParseError);
        json doc2 = to_json(h);
        doc2["M"] = 1.5;
        CHECK_THROWS_AS(hankel_from_json(doc2), ParseError);
    }
}

TEST_CASE("identification results serialize with diagnostics") {
    Dataset data;
    for (int i = 0; i < 10; ++i) {
        data.times.push_back(i * 0.1);
        data.states.push_back(Eigen::VectorXd::Constant(1, double(i)));
        data.derivs.push_back(Eigen::VectorXd::Constant(1, 2.0 * i + 1.0));
    }
    IdentifyConfig config;
    config.restarts = 2;
    IdentifyResult fit = identify(data, 1, config);
    json doc = to_json(fit);
    CHECK(doc.contains("modes"));
    CHECK(doc.contains("objective"));
    CHECK(doc.contains("assignments"));
    CHECK(doc.contains("trace"));
    CHECK(doc.contains("converged"));
    CHECK(doc.contains("restarts_used"));
    CHECK(doc.contains("epsilon"));
    CHECK(doc["assignments"].size() == 10);
    PwlSystem published = pwl_from_json(doc);
    CHECK(published.num_modes() == 1);
}

TEST_CASE("trajectory csv round trip") {
    PwlSystem sys = sample_system(5);
    sys.modes[1].initial_states =
        InitialStates::single(Eigen::VectorXd::Zero(3));
    ScheduleLaw law;
    law.entries.push_back({0.25, 1, Eigen::VectorXd::Zero(3)});
    Trajectory traj = simulate_pwl(sys, law,
                                   sys.modes[0].initial_states.states[0], 0,
                                   0.5, 0.01);
    const std::string path = temp_path("pwl_traj_roundtrip.csv");
    write_trajectory_csv(path, traj);
    Trajectory back = read_trajectory_csv(path);

    REQUIRE(back.size() == traj.size());
    CHECK(back.delta == traj.delta);
    REQUIRE(back.switch_times.size() == traj.switch_times.size());
    for (std::size_t i = 0; i < traj.switch_times.size(); ++i) {
        CHECK(back.switch_times[i] == traj.switch_times[i]);
    }
    for (int i = 0; i < traj.size(); ++i) {
        CHECK(back.times[i] == traj.times[i]);
        CHECK((back.states[i] - traj.states[i]).norm() == 0.0);
        CHECK((back.derivs[i] - traj.derivs[i]).norm() == 0.0);
        CHECK(back.mode_labels[i] == traj.mode_labels[i]);
    }

    SUBCASE("reader works without the sidecar") {
        std::remove(sidecar_path(path).c_str());
        Trajectory bare = read_trajectory_csv(path);
        CHECK(bare.size() == traj.size());
        CHECK(bare.delta == doctest::Approx(traj.delta));
        for (int i = 0; i < traj.size(); ++i) {
            CHECK((bare.states[i] - traj.states[i]).norm() == 0.0);
        }
    }
    std::remove(path.c_str());
    std::remove(sidecar_path(path).c_str());
}

TEST_CASE("csv without derivative or mode columns") {
    const std::string path = temp_path("pwl_traj_slim.csv");
    {
        std::ofstream out(path);
        out << "t,x1\n0,1.5\n0.1,2.5\n0.2,3.5\n";
    }
    Trajectory traj = read_trajectory_csv(path);
    CHECK(traj.size() == 3);
    CHECK(traj.derivs.empty());
    CHECK(traj.mode_labels.empty());
    CHECK(traj.delta == doctest::Approx(0.1));
    CHECK(traj.states[2](0) == 3.5);
    std::remove(path.c_str());
}

TEST_CASE("sidecar path replaces the extension") {
    CHECK(sidecar_path("runs/a.csv") == "runs/a.meta.json");
    CHECK(sidecar_path("plain") == "plain.meta.json");
}

TEST_CASE("malformed documents raise parse errors") {
    const std::string path = temp_path("pwl_bad_doc.json");
    {
        std::ofstream out(path);
        out << "{ not json ]";
    }
    CHECK_THROWS_AS(load_json_file(path), ParseError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_json_file(temp_path("pwl_missing_file.json")),
                    Error);

    json doc;
    doc["output_dim"] = 1;
    doc["modes"] = json::array();
    doc["modes"].push_back({{"A", json::array({json::array({"x"})})},
                            {"a", json::array({0.0})},
                            {"C", json::array({json::array({1.0})})},
                            {"c", json::array({0.0})},
                            {"initial_states", "unconstrained"}});
    CHECK_THROWS_AS(pwl_from_json(doc), ParseError);
}

TEST_CASE("match reports serialize") {
    ModeParams params;
    params.A = {Eigen::MatrixXd::Identity(2, 2)};
    params.a = {Eigen::VectorXd::Zero(2)};
    MatchReport report = match_modes(params, params);
    json doc = to_json(report);
    CHECK(doc.contains("permutation"));
    CHECK(doc.contains("per_mode_error"));
    CHECK(doc.contains("per_mode_correlation"));
    CHECK(doc.contains("unmatched"));
    CHECK(doc.contains("total_error"));
    CHECK(doc["permutation"][0] == 0);
}

TEST_SUITE_END();
