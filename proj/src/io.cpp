#include "pwl/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace pwl {

namespace {

double number_from_json(const json& j, const std::string& what) {
    if (!j.is_number()) throw ParseError(what + " must be a number");
    return j.get<double>();
}

const json& require_key(const json& doc, const std::string& key,
                        const std::string& what) {
    auto it = doc.find(key);
    if (it == doc.end()) {
        throw ParseError(what + " is missing the \"" + key + "\" field");
    }
    return *it;
}

}  // namespace

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + " must be an array");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(i) = number_from_json(j[i], what + " entry");
    }
    return v;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + " must be an array of rows");
    const std::size_t rows = j.size();
    std::size_t cols = 0;
    if (rows > 0) {
        if (!j[0].is_array()) throw ParseError(what + " rows must be arrays");
        cols = j[0].size();
    }
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols) {
            throw ParseError(what + " must be rectangular");
        }
        for (std::size_t k = 0; k < cols; ++k) {
            m(i, k) = number_from_json(j[i][k], what + " entry");
        }
    }
    return m;
}

json to_json(const PwlSystem& sys) {
    json doc;
    doc["output_dim"] = sys.output_dim;
    json modes = json::array();
    for (const auto& mode : sys.modes) {
        json m;
        m["A"] = matrix_to_json(mode.A);
        m["a"] = vector_to_json(mode.a);
        m["C"] = matrix_to_json(mode.C);
        m["c"] = vector_to_json(mode.c);
        if (mode.initial_states.unconstrained) {
            m["initial_states"] = "unconstrained";
        } else {
            json states = json::array();
            for (const auto& x : mode.initial_states.states) {
                states.push_back(vector_to_json(x));
            }
            m["initial_states"] = std::move(states);
        }
        modes.push_back(std::move(m));
    }
    doc["modes"] = std::move(modes);
    return doc;
}

PwlSystem pwl_from_json(const json& doc) {
    if (!doc.is_object()) throw ParseError("model document must be an object");
    PwlSystem sys;
    const json& dim = require_key(doc, "output_dim", "model document");
    if (!dim.is_number_integer()) {
        throw ParseError("output_dim must be an integer");
    }
    sys.output_dim = dim.get<int>();
    const json& modes = require_key(doc, "modes", "model document");
    if (!modes.is_array() || modes.empty()) {
        throw ParseError("modes must be a nonempty array");
    }
    for (std::size_t q = 0; q < modes.size(); ++q) {
        const json& m = modes[q];
        const std::string tag = "mode " + std::to_string(q);
        if (!m.is_object()) throw ParseError(tag + " must be an object");
        AffineMode mode;
        mode.A = matrix_from_json(require_key(m, "A", tag), tag + " A");
        mode.a = vector_from_json(require_key(m, "a", tag), tag + " a");
        mode.C = matrix_from_json(require_key(m, "C", tag), tag + " C");
        mode.c = vector_from_json(require_key(m, "c", tag), tag + " c");
        const json& init = require_key(m, "initial_states", tag);
        if (init.is_string()) {
            if (init.get<std::string>() != "unconstrained") {
                throw ParseError(tag + ": unknown initial_states keyword");
            }
            mode.initial_states = InitialStates::all_of_space();
        } else if (init.is_array()) {
            std::vector<Eigen::VectorXd> states;
            for (const auto& s : init) {
                states.push_back(vector_from_json(s, tag + " initial state"));
            }
            mode.initial_states = InitialStates::of(std::move(states));
        } else {
            throw ParseError(tag + ": initial_states must be an array or keyword");
        }
        sys.modes.push_back(std::move(mode));
    }
    sys.validate();
    return sys;
}

json to_json(const Lssj& sys) { return to_json(lssj_to_pwl(sys)); }

Lssj lssj_from_json(const json& doc) {
    PwlSystem sys = pwl_from_json(doc);
    if (sys.num_modes() != 1) {
        throw ParseError("jump-linear document must hold exactly one mode");
    }
    const AffineMode& mode = sys.modes.front();
    if (!mode.is_linear()) {
        throw ParseError("jump-linear document must be strictly linear");
    }
    if (mode.initial_states.unconstrained) {
        throw ParseError("jump-linear document needs a finite initial set");
    }
    Lssj out;
    out.n = mode.state_dim();
    out.A = mode.A;
    out.C = mode.C;
    out.X0 = mode.initial_states.states;
    out.validate();
    return out;
}

json to_json(const SarsModel& sars) {
    json doc;
    doc["output_dim"] = sars.output_dim();
    doc["order"] = sars.order;
    json modes = json::array();
    for (const auto& coeffs : sars.modes) {
        json m;
        json list = json::array();
        for (const auto& c : coeffs) list.push_back(matrix_to_json(c));
        m["coeffs"] = std::move(list);
        modes.push_back(std::move(m));
    }
    doc["modes"] = std::move(modes);
    return doc;
}

SarsModel sars_from_json(const json& doc) {
    if (!doc.is_object()) throw ParseError("autoregressive document must be an object");
    SarsModel sars;
    const json& order = require_key(doc, "order", "autoregressive document");
    if (!order.is_number_integer()) throw ParseError("order must be an integer");
    sars.order = order.get<int>();
    const json& modes = require_key(doc, "modes", "autoregressive document");
    if (!modes.is_array() || modes.empty()) {
        throw ParseError("modes must be a nonempty array");
    }
    for (const auto& m : modes) {
        const json& coeffs = require_key(m, "coeffs", "autoregressive mode");
        if (!coeffs.is_array()) throw ParseError("coeffs must be an array");
        std::vector<Eigen::MatrixXd> list;
        for (const auto& c : coeffs) {
            list.push_back(matrix_from_json(c, "coefficient"));
        }
        sars.modes.push_back(std::move(list));
    }
    sars.validate();
    return sars;
}

json to_json(const HankelMatrix& h) {
    json doc;
    doc["L"] = h.L;
    doc["M"] = h.M;
    doc["R"] = h.num_pieces();
    doc["p"] = h.p;
    doc["pieces"] = h.pieces;
    doc["entries"] = matrix_to_json(h.entries);
    return doc;
}

HankelMatrix hankel_from_json(const json& doc) {
    if (!doc.is_object()) throw ParseError("Hankel document must be an object");
    HankelMatrix h;
    auto int_field = [&doc](const char* key) {
        const json& v = require_key(doc, key, "Hankel document");
        if (!v.is_number_integer()) {
            throw ParseError(std::string(key) + " must be an integer");
        }
        return v.get<int>();
    };
    h.L = int_field("L");
    h.M = int_field("M");
    h.p = int_field("p");
    const int r = int_field("R");
    const json& pieces = require_key(doc, "pieces", "Hankel document");
    if (!pieces.is_array() || static_cast<int>(pieces.size()) != r) {
        throw ParseError("pieces must list exactly R entries");
    }
    for (const auto& pc : pieces) {
        if (!pc.is_number_integer()) throw ParseError("piece indices must be integers");
        h.pieces.push_back(pc.get<int>());
    }
    h.entries = matrix_from_json(require_key(doc, "entries", "Hankel document"),
                                 "entries");
    if (h.L < 0 || h.M < 0 || h.p < 1 ||
        h.entries.rows() != (h.L + 1) * h.p ||
        h.entries.cols() != static_cast<Eigen::Index>((h.M + 1) * r)) {
        throw ParseError("Hankel entries do not match the stated shape");
    }
    return h;
}

json to_json(const IdentifyResult& result) {
    json doc = to_json(to_pwl(result.params));
    doc["objective"] = result.objective;
    doc["assignments"] = result.weights.assignments();
    doc["trace"] = result.trace;
    doc["converged"] = result.converged;
    doc["restarts_used"] = result.restarts_used;
    doc["epsilon"] = result.epsilon;
    doc["restart_traces"] = result.restart_traces;
    json empty = json::array();
    for (bool b : result.empty_modes) empty.push_back(b);
    doc["empty_modes"] = std::move(empty);
    return doc;
}

json to_json(const MatchReport& report) {
    json doc;
    doc["permutation"] = report.permutation;
    doc["per_mode_error"] = report.per_mode_error;
    doc["per_mode_correlation"] = report.per_mode_correlation;
    doc["unmatched"] = report.unmatched;
    doc["total_error"] = report.total_error;
    return doc;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

}  // namespace

std::string sidecar_path(const std::string& csv_path) {
    const std::size_t slash = csv_path.find_last_of('/');
    const std::size_t dot = csv_path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
        return csv_path + ".meta.json";
    }
    return csv_path.substr(0, dot) + ".meta.json";
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    traj.validate();
    if (traj.derivs.empty()) {
        throw Error("trajectory carries no derivative channel");
    }
    const int n = traj.state_dim();
    for (const auto& x : traj.states) {
        if (x.size() != n) {
            throw DimensionMismatch("CSV output needs a uniform state dimension");
        }
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "t";
    for (int i = 1; i <= n; ++i) out << ",x" << i;
    for (int i = 1; i <= n; ++i) out << ",dx" << i;
    if (traj.has_labels()) out << ",mode";
    out << "\n";
    for (int i = 0; i < traj.size(); ++i) {
        out << format_double(traj.times[i]);
        for (int j = 0; j < n; ++j) out << "," << format_double(traj.states[i](j));
        for (int j = 0; j < n; ++j) out << "," << format_double(traj.derivs[i](j));
        if (traj.has_labels()) out << "," << traj.mode_labels[i];
        out << "\n";
    }
    if (!out) throw Error("write to " + path + " failed");
    out.close();

    json meta;
    meta["switch_times"] = traj.switch_times;
    meta["delta"] = traj.delta;
    save_json_file(sidecar_path(path), meta);
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_line(line);
    if (header.empty() || header[0] != "t") {
        throw ParseError(path + ": header must start with t");
    }
    int n_x = 0, n_dx = 0;
    bool has_mode = false;
    for (std::size_t i = 1; i < header.size(); ++i) {
        const std::string& h = header[i];
        if (h.rfind("dx", 0) == 0) {
            ++n_dx;
        } else if (h.rfind('x', 0) == 0) {
            ++n_x;
        } else if (h == "mode") {
            has_mode = true;
        } else {
            throw ParseError(path + ": unknown column \"" + h + "\"");
        }
    }
    if (n_x < 1) throw ParseError(path + ": no state columns");
    if (n_dx != 0 && n_dx != n_x) {
        throw ParseError(path + ": state and derivative column counts differ");
    }
    const std::size_t expected = 1 + n_x + n_dx + (has_mode ? 1 : 0);

    Trajectory traj;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_line(line);
        if (fields.size() != expected) {
            throw ParseError(path + ":" + std::to_string(line_no) +
                             ": expected " + std::to_string(expected) + " fields");
        }
        try {
            std::size_t at = 0;
            traj.times.push_back(std::stod(fields[at++]));
            Eigen::VectorXd x(n_x);
            for (int j = 0; j < n_x; ++j) x(j) = std::stod(fields[at++]);
            traj.states.push_back(std::move(x));
            if (n_dx > 0) {
                Eigen::VectorXd dx(n_dx);
                for (int j = 0; j < n_dx; ++j) dx(j) = std::stod(fields[at++]);
                traj.derivs.push_back(std::move(dx));
            }
            if (has_mode) {
                traj.mode_labels.push_back(std::stoi(fields[at++]));
            }
        } catch (const std::invalid_argument&) {
            throw ParseError(path + ":" + std::to_string(line_no) +
                             ": malformed number");
        } catch (const std::out_of_range&) {
            throw ParseError(path + ":" + std::to_string(line_no) +
                             ": number out of range");
        }
    }

    std::ifstream meta_in(sidecar_path(path));
    if (meta_in) {
        json meta;
        try {
            meta = json::parse(meta_in);
        } catch (const json::parse_error& e) {
            throw ParseError(sidecar_path(path) + ": " + e.what());
        }
        if (meta.contains("delta")) traj.delta = meta["delta"].get<double>();
        if (meta.contains("switch_times")) {
            for (const auto& s : meta["switch_times"]) {
                traj.switch_times.push_back(s.get<double>());
            }
        }
    } else if (traj.times.size() > 1) {
        traj.delta = traj.times[1] - traj.times[0];
    }
    traj.validate();
    return traj;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void save_json_file(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << doc.dump(2) << "\n";
    if (!out) throw Error("write to " + path + " failed");
}

}  // namespace pwl
