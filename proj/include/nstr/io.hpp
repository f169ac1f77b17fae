#pragma once

// JSON file formats: LFT plant files, generic problem files, and run
// reports. Plant files carry the keys A,Bp,Bw,Cq,Dqp,Dqw,Cz,Dzp,Dzw as
// row-major arrays of arrays plus "structure"; every dimension is validated
// on load.

#include "nstr/bench.hpp"
#include "nstr/control.hpp"
#include "nstr/core.hpp"
#include "nstr/solver.hpp"

#include <json.hpp>

#include <fstream>

namespace nstr {

using Json = nlohmann::json;

class FileFormatError : public std::runtime_error {
  public:
    explicit FileFormatError(const std::string& what) : std::runtime_error(what) {}
};

namespace iodetail {

inline Mat parse_matrix(const Json& j, const std::string& key, int want_rows = -1,
                        int want_cols = -1) {
    if (!j.contains(key)) throw FileFormatError("missing key: " + key);
    const Json& a = j.at(key);
    if (!a.is_array()) throw FileFormatError("key " + key + " must be an array of rows");
    int rows = static_cast<int>(a.size());
    if (rows == 0) {
        if (want_rows > 0 && want_cols > 0)
            throw FileFormatError("key " + key + " must not be empty");
        return Mat(std::max(want_rows, 0), std::max(want_cols, 0));
    }
    int cols = -1;
    Mat M;
    for (int i = 0; i < rows; ++i) {
        const Json& row = a.at(i);
        if (!row.is_array())
            throw FileFormatError("key " + key + ", row " + std::to_string(i) +
                                  ": expected an array");
        if (cols < 0) {
            cols = static_cast<int>(row.size());
            M.resize(rows, cols);
        }
        if (static_cast<int>(row.size()) != cols)
            throw FileFormatError("key " + key + ", row " + std::to_string(i) +
                                  ": ragged row length");
        for (int c = 0; c < cols; ++c) {
            if (!row.at(c).is_number())
                throw FileFormatError("key " + key + ", row " + std::to_string(i) + ", col " +
                                      std::to_string(c) + ": expected a number");
            M(i, c) = row.at(c).get<double>();
        }
    }
    if (want_rows >= 0 && M.rows() != want_rows)
        throw FileFormatError("key " + key + ": expected " + std::to_string(want_rows) + " rows");
    if (want_cols >= 0 && M.cols() != want_cols)
        throw FileFormatError("key " + key + ": expected " + std::to_string(want_cols) +
                              " columns");
    return M;
}

inline Vec parse_vector(const Json& j, const std::string& key) {
    if (!j.contains(key)) throw FileFormatError("missing key: " + key);
    const Json& a = j.at(key);
    if (!a.is_array()) throw FileFormatError("key " + key + " must be an array");
    Vec v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a.at(i).is_number())
            throw FileFormatError("key " + key + ", entry " + std::to_string(i) +
                                  ": expected a number");
        v[static_cast<int>(i)] = a.at(i).get<double>();
    }
    return v;
}

inline Json matrix_json(const Mat& M) {
    Json rows = Json::array();
    for (int i = 0; i < M.rows(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline Json vector_json(const Vec& v) {
    Json a = Json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

}  // namespace iodetail

inline LftPlant plant_from_json(const Json& j) {
    LftPlant p;
    if (!j.contains("structure")) throw FileFormatError("missing key: structure");
    for (const auto& r : j.at("structure")) {
        if (!r.is_number_integer() || r.get<int>() < 1)
            throw FileFormatError("structure entries must be positive integers");
        p.structure.push_back(r.get<int>());
    }
    int q = 0;
    for (int r : p.structure) q += r;
    p.A = iodetail::parse_matrix(j, "A");
    int n = static_cast<int>(p.A.rows());
    p.Bp = iodetail::parse_matrix(j, "Bp", n, q);
    p.Cq = iodetail::parse_matrix(j, "Cq", q, n);
    p.Dqp = iodetail::parse_matrix(j, "Dqp", q, q);
    p.Bw = iodetail::parse_matrix(j, "Bw", n, -1);
    int m1 = static_cast<int>(p.Bw.cols());
    p.Dqw = iodetail::parse_matrix(j, "Dqw", q, m1);
    p.Cz = iodetail::parse_matrix(j, "Cz", -1, n);
    int p1 = static_cast<int>(p.Cz.rows());
    p.Dzp = iodetail::parse_matrix(j, "Dzp", p1, q);
    p.Dzw = iodetail::parse_matrix(j, "Dzw", p1, m1);
    p.validate();
    return p;
}

inline Json plant_to_json(const LftPlant& p) {
    Json j;
    j["A"] = iodetail::matrix_json(p.A);
    j["Bp"] = iodetail::matrix_json(p.Bp);
    j["Bw"] = iodetail::matrix_json(p.Bw);
    j["Cq"] = iodetail::matrix_json(p.Cq);
    j["Dqp"] = iodetail::matrix_json(p.Dqp);
    j["Dqw"] = iodetail::matrix_json(p.Dqw);
    j["Cz"] = iodetail::matrix_json(p.Cz);
    j["Dzp"] = iodetail::matrix_json(p.Dzp);
    j["Dzw"] = iodetail::matrix_json(p.Dzw);
    j["structure"] = p.structure;
    return j;
}

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileFormatError("cannot open file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw FileFormatError(path + ": " + e.what());
    }
    return j;
}

// Generic problem file: a max-affine objective over a feasible set, with a
// model choice and optional config overrides.
inline ProblemInstance problem_from_json(const Json& j) {
    if (!j.contains("objective")) throw FileFormatError("missing key: objective");
    const Json& obj = j.at("objective");
    if (obj.value("type", "") != "max_affine")
        throw FileFormatError("objective.type must be \"max_affine\"");
    MaxAffine m;
    if (!obj.contains("planes") || !obj.at("planes").is_array() || obj.at("planes").empty())
        throw FileFormatError("objective.planes must be a nonempty array");
    for (const auto& pl : obj.at("planes")) {
        if (!pl.contains("c") || !pl.contains("g"))
            throw FileFormatError("objective plane needs fields c and g");
        m.c.push_back(pl.at("c").get<double>());
        m.g.push_back(iodetail::parse_vector(pl, "g"));
        if (m.g.back().size() != m.g.front().size())
            throw FileFormatError("objective planes disagree on dimension");
    }

    ProblemInstance p;
    std::string model = j.value("model", "convex_self");
    if (model == "convex_self")
        p.model = std::make_shared<ConvexSelfModel>(m.oracle());
    else if (model == "standard")
        p.model = std::make_shared<StandardModel>(m.oracle());
    else
        throw FileFormatError("model must be convex_self or standard");

    if (!j.contains("feasible")) {
        p.feasible = FeasibleSet::all_space();
    } else {
        const Json& fs = j.at("feasible");
        std::string kind = fs.value("type", "all");
        if (kind == "all")
            p.feasible = FeasibleSet::all_space();
        else if (kind == "box")
            p.feasible =
                FeasibleSet::box(iodetail::parse_vector(fs, "lower"), iodetail::parse_vector(fs, "upper"));
        else if (kind == "polyhedron")
            p.feasible = FeasibleSet::polyhedron(iodetail::parse_matrix(fs, "rows"),
                                                 iodetail::parse_vector(fs, "rhs"));
        else
            throw FileFormatError("feasible.type must be all, box, or polyhedron");
    }
    p.x0 = iodetail::parse_vector(j, "x0");
    if (p.x0.size() != m.dim()) throw FileFormatError("x0 dimension does not match objective");
    p.name = j.value("name", "problem");
    return p;
}

// Partial config overrides from a problem file's "config" object.
inline void apply_config_json(const Json& j, SolverConfig& cfg) {
    if (!j.is_object()) throw FileFormatError("config must be an object");
    auto num = [&](const char* key, double& slot) {
        if (j.contains(key)) slot = j.at(key).get<double>();
    };
    auto integer = [&](const char* key, int& slot) {
        if (j.contains(key)) slot = j.at(key).get<int>();
    };
    num("gamma", cfg.gamma);
    num("gamma_tilde", cfg.gamma_tilde);
    num("Gamma", cfg.Gamma);
    num("theta", cfg.theta);
    num("M", cfg.M);
    num("R0", cfg.R_init);
    num("tol1", cfg.tol1);
    num("tol2", cfg.tol2);
    num("tol3", cfg.tol3);
    integer("k_max", cfg.k_max);
    integer("nu_max", cfg.nu_max);
    integer("max_serious", cfg.max_serious);
    if (j.contains("norm")) {
        std::string n = j.at("norm").get<std::string>();
        if (n == "inf")
            cfg.norm = TrustNorm::Inf;
        else if (n == "l1")
            cfg.norm = TrustNorm::L1;
        else
            throw FileFormatError("config.norm must be inf or l1");
    }
    if (j.contains("mode")) {
        std::string m = j.at("mode").get<std::string>();
        if (m == "bundle")
            cfg.mode = SolveMode::Bundle;
        else if (m == "classical")
            cfg.mode = SolveMode::Classical;
        else
            throw FileFormatError("config.mode must be bundle or classical");
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
}

inline Json config_to_json(const SolverConfig& cfg) {
    Json j;
    j["gamma"] = cfg.gamma;
    j["gamma_tilde"] = cfg.gamma_tilde;
    j["Gamma"] = cfg.Gamma;
    j["theta"] = cfg.theta;
    j["M"] = cfg.M;
    j["R0"] = cfg.R_init;
    j["tol1"] = cfg.tol1;
    j["tol2"] = cfg.tol2;
    j["tol3"] = cfg.tol3;
    j["k_max"] = cfg.k_max;
    j["nu_max"] = cfg.nu_max;
    j["max_serious"] = cfg.max_serious;
    j["norm"] = cfg.norm == TrustNorm::Inf ? "inf"
               : cfg.norm == TrustNorm::L1 ? "l1"
                                           : "l2_single_plane";
    j["mode"] = cfg.mode == SolveMode::Bundle ? "bundle" : "classical";
    j["seed"] = cfg.seed;
    return j;
}

inline Json report_json(const std::string& problem, const SolveResult& res,
                        const SolverConfig& cfg) {
    Json j;
    j["problem"] = problem;
    j["status"] = to_string(res.status);
    j["x_final"] = iodetail::vector_json(res.x_final);
    j["f_final"] = res.f_final;
    j["serious_steps"] = res.serious_steps;
    j["inner_iterations"] = res.inner_iterations;
    j["seed"] = cfg.seed;
    j["config"] = config_to_json(cfg);
    return j;
}

inline void write_json_file(const Json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace nstr
