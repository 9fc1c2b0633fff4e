#include "laxqsl/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace laxqsl {

using nlohmann::json;

namespace {

json vec_json(const VecR& v) {
    json a = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
    return a;
}

VecR json_vec(const json& a, const char* what) {
    if (!a.is_array()) throw DocumentError(std::string("document: ") + what + " must be an array");
    VecR v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (!a[k].is_number()) throw DocumentError(std::string("document: ") + what + " must hold numbers");
        v[static_cast<Eigen::Index>(k)] = a[k].get<double>();
    }
    return v;
}

// JSON has no infinity; non-finite values are stored as null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double null_as_inf(const json& v) {
    return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
}

template <class T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw DocumentError(std::string("document: missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw DocumentError(std::string("document: bad field '") + key + "': " + e.what());
    }
}

}  // namespace

void RunConfig::validate() const {
    if (schema_version != kSchemaVersion) throw std::invalid_argument("run config: unsupported schema_version");
    if (!(integration_tol > 0.0) || !(accept_tol > 0.0) || !(stop_tol > 0.0))
        throw std::invalid_argument("run config: tolerances must be positive");
    if (max_iterations < 1) throw std::invalid_argument("run config: max_iterations must be >= 1");
    if (threads < 1) throw std::invalid_argument("run config: threads must be >= 1");
    if (restarts < 0) throw std::invalid_argument("run config: restarts must be >= 0");
}

SolveOptions RunConfig::solve_options() const {
    SolveOptions o;
    o.guess = guess;
    o.seed = seed;
    o.restarts = restarts;
    o.integration_tol = integration_tol;
    o.accept_tol = accept_tol;
    o.stop_tol = stop_tol;
    o.max_iterations = max_iterations;
    o.threads = threads;
    o.trajectory_samples = trajectory_samples;
    return o;
}

json to_json(const InvariantReport& r) {
    json j{{"max_norm_drift", r.max_norm_drift},
           {"max_orthogonality_drift", r.max_orthogonality_drift},
           {"max_coupling_norm_drift", r.max_coupling_norm_drift},
           {"drift_flag", r.drift_flag}};
    j["lax_eigenvalue_drift"] = r.lax_eigenvalue_drift ? json(*r.lax_eigenvalue_drift) : json(nullptr);
    return j;
}

json to_json(const ScalingFit& f) {
    return json{{"c0", f.c0},
                {"c1", f.c1},
                {"c2", f.c2},
                {"se0", f.se0},
                {"se1", f.se1},
                {"se2", f.se2},
                {"rms_residual", f.rms_residual},
                {"relative_deviation", f.relative_deviation}};
}

json to_json(const SolutionDocument& doc) {
    const auto& r = doc.run;
    const auto& s = doc.solution;
    json run{{"command", r.command},
             {"n_sites", r.n_sites},
             {"guess", to_string(r.guess)},
             {"seed", r.seed},
             {"restarts", r.restarts},
             {"integration_tol", r.integration_tol},
             {"accept_tol", r.accept_tol},
             {"stop_tol", r.stop_tol},
             {"max_iterations", r.max_iterations},
             {"threads", r.threads},
             {"trajectory_samples", r.trajectory_samples},
             {"initial", r.initial},
             {"schema_version", r.schema_version}};
    json sol{{"n_sites", s.config.n_sites},
             {"boundary", to_string(s.config.boundary)},
             {"l0", s.l0},
             {"tau", s.tau},
             {"j0", s.j0},
             {"j0_tau", s.j0_tau},
             {"residual_norm", finite_or_null(s.residual_norm)},
             {"converged", s.converged},
             {"iterations", s.iterations},
             {"attempts", s.attempts},
             {"jacobian_condition", finite_or_null(s.jacobian_condition)},
             {"message", s.message},
             {"a0", json{{"x", vec_json(s.a0.x)}, {"y", vec_json(s.a0.y)}}},
             {"invariants", to_json(s.invariants)}};
    json out{{"schema_version", doc.schema_version},
             {"tool", json{{"name", doc.tool_name}, {"version", doc.tool_version}}},
             {"created", doc.created ? json(*doc.created) : json(nullptr)},
             {"run_config", run},
             {"solution", sol}};
    if (s.trajectory) {
        json xs = json::array(), ys = json::array();
        for (const auto& a : s.trajectory->states) {
            xs.push_back(vec_json(a.x));
            ys.push_back(vec_json(a.y));
        }
        out["trajectory"] = json{{"times", vec_json(s.trajectory->times)}, {"x", xs}, {"y", ys}};
    }
    return out;
}

SolutionDocument document_from_json(const json& j) {
    if (!j.is_object()) throw DocumentError("document: top level must be an object");
    SolutionDocument doc;
    doc.schema_version = field<int>(j, "schema_version");
    if (doc.schema_version != kSchemaVersion)
        throw DocumentError("document: unsupported schema_version " + std::to_string(doc.schema_version));
    const json& tool = j.at("tool");
    doc.tool_name = field<std::string>(tool, "name");
    doc.tool_version = field<std::string>(tool, "version");
    if (j.contains("created") && !j["created"].is_null()) doc.created = j["created"].get<std::string>();

    const json& run = j.contains("run_config") ? j["run_config"] : json::object();
    auto& r = doc.run;
    if (!run.empty()) {
        r.command = field<std::string>(run, "command");
        r.n_sites = field<int>(run, "n_sites");
        try {
            r.guess = guess_from_string(field<std::string>(run, "guess"));
        } catch (const std::invalid_argument& e) {
            throw DocumentError(std::string("document: ") + e.what());
        }
        r.seed = field<std::uint64_t>(run, "seed");
        r.restarts = field<int>(run, "restarts");
        r.integration_tol = field<double>(run, "integration_tol");
        r.accept_tol = field<double>(run, "accept_tol");
        r.stop_tol = field<double>(run, "stop_tol");
        r.max_iterations = field<int>(run, "max_iterations");
        r.threads = field<int>(run, "threads");
        r.trajectory_samples = field<int>(run, "trajectory_samples");
        r.initial = field<std::string>(run, "initial");
        r.schema_version = field<int>(run, "schema_version");
        try {
            r.validate();
        } catch (const std::invalid_argument& e) {
            throw DocumentError(std::string("document: ") + e.what());
        }
    }

    if (!j.contains("solution")) throw DocumentError("document: missing field 'solution'");
    const json& sj = j["solution"];
    auto& s = doc.solution;
    const int n = field<int>(sj, "n_sites");
    s.l0 = field<double>(sj, "l0");
    s.tau = field<double>(sj, "tau");
    s.config = make_ring(n, 1.0, 1.0);
    s.config.boundary = boundary_from_string(field<std::string>(sj, "boundary"));
    s.config.lax_scale = s.l0;
    s.config.transfer_time = s.tau;
    try {
        s.config.validate();
    } catch (const std::invalid_argument& e) {
        throw DocumentError(std::string("document: ") + e.what());
    }
    s.j0 = field<double>(sj, "j0");
    s.j0_tau = field<double>(sj, "j0_tau");
    s.residual_norm = null_as_inf(sj.at("residual_norm"));
    s.converged = field<bool>(sj, "converged");
    s.iterations = field<int>(sj, "iterations");
    s.attempts = field<int>(sj, "attempts");
    s.jacobian_condition = null_as_inf(sj.at("jacobian_condition"));
    s.message = field<std::string>(sj, "message");
    const json& a0 = sj.at("a0");
    VecR x = json_vec(a0.at("x"), "a0.x"), y = json_vec(a0.at("y"), "a0.y");
    if (x.size() != n || y.size() != n) throw DocumentError("document: a0 length does not match n_sites");
    s.a0 = LaxEigenvector(std::move(x), std::move(y));
    if (sj.contains("invariants")) {
        const json& iv = sj["invariants"];
        s.invariants.max_norm_drift = field<double>(iv, "max_norm_drift");
        s.invariants.max_orthogonality_drift = field<double>(iv, "max_orthogonality_drift");
        s.invariants.max_coupling_norm_drift = field<double>(iv, "max_coupling_norm_drift");
        s.invariants.drift_flag = field<bool>(iv, "drift_flag");
        if (iv.contains("lax_eigenvalue_drift") && !iv["lax_eigenvalue_drift"].is_null())
            s.invariants.lax_eigenvalue_drift = iv["lax_eigenvalue_drift"].get<double>();
    }

    if (j.contains("trajectory") && !j["trajectory"].is_null()) {
        const json& tj = j["trajectory"];
        Trajectory t;
        t.config = s.config;
        t.times = json_vec(tj.at("times"), "trajectory.times");
        const json& xs = tj.at("x");
        const json& ys = tj.at("y");
        if (xs.size() != static_cast<std::size_t>(t.times.size()) || ys.size() != xs.size())
            throw DocumentError("document: trajectory arrays have inconsistent lengths");
        for (std::size_t k = 0; k < xs.size(); ++k) {
            VecR tx = json_vec(xs[k], "trajectory.x"), ty = json_vec(ys[k], "trajectory.y");
            if (tx.size() != n || ty.size() != n) throw DocumentError("document: trajectory state length mismatch");
            t.states.emplace_back(std::move(tx), std::move(ty));
        }
        s.trajectory = std::move(t);
    }
    return doc;
}

std::string dump_document(const SolutionDocument& doc) { return to_json(doc).dump(2) + "\n"; }

SolutionDocument parse_document(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DocumentError(std::string("document: invalid JSON: ") + e.what());
    }
    try {
        return document_from_json(j);
    } catch (const json::exception& e) {
        throw DocumentError(std::string("document: ") + e.what());
    }
}

void save_document(const SolutionDocument& doc, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DocumentError("cannot open " + path.string() + " for writing");
    os << dump_document(doc);
    if (!os) throw DocumentError("failed writing " + path.string());
}

SolutionDocument load_document(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DocumentError("cannot read " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_document(ss.str());
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_long_csv(std::ostream& os, const std::vector<CsvRow>& rows) {
    os << "time,site,quantity,value\n";
    for (const auto& r : rows)
        os << format_double(r.time) << ',' << r.site << ',' << r.quantity << ',' << format_double(r.value) << '\n';
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "n_sites,converged,l0_tau,j0_tau,residual\n";
    for (const auto& r : rows) {
        os << r.n_sites << ',' << (r.converged ? 1 : 0) << ',';
        if (r.converged)
            os << format_double(r.l0_tau) << ',' << format_double(r.j0_tau);
        else
            os << ',';  // gap for failed sizes
        os << ',' << format_double(r.residual) << '\n';
    }
}

std::vector<SweepRow> read_sweep_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw DocumentError("sweep table: empty input");
    if (line != "n_sites,converged,l0_tau,j0_tau,residual") throw DocumentError("sweep table: unexpected header");
    std::vector<SweepRow> rows;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
        if (line.back() == ',') cols.emplace_back();
        if (cols.size() != 5) throw DocumentError("sweep table: line " + std::to_string(lineno) + " needs 5 columns");
        try {
            SweepRow r;
            r.n_sites = std::stoi(cols[0]);
            r.converged = cols[1] == "1";
            if (r.converged) {
                r.l0_tau = std::stod(cols[2]);
                r.j0_tau = std::stod(cols[3]);
            }
            r.residual = cols[4].empty() ? 0.0 : std::stod(cols[4]);
            rows.push_back(r);
        } catch (const std::exception&) {
            throw DocumentError("sweep table: malformed number on line " + std::to_string(lineno));
        }
    }
    return rows;
}

}  // namespace laxqsl
