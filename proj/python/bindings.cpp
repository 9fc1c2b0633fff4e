#include "laxqsl/analysis.hpp"
#include "laxqsl/bvp.hpp"
#include "laxqsl/io.hpp"
#include "laxqsl/oracle.hpp"
#include "laxqsl/ring.hpp"
#include "laxqsl/verify.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace laxqsl;

namespace {

Gauge gauge_arg(const std::string& g) { return gauge_from_string(g); }

py::dict trajectory_dict(const Trajectory& t) {
    const auto n = static_cast<Eigen::Index>(t.config.n_sites);
    const auto k = static_cast<Eigen::Index>(t.size());
    MatR xs(k, n), ys(k, n);
    for (Eigen::Index i = 0; i < k; ++i) {
        xs.row(i) = t.states[static_cast<std::size_t>(i)].x.transpose();
        ys.row(i) = t.states[static_cast<std::size_t>(i)].y.transpose();
    }
    py::dict d;
    d["times"] = t.times;
    d["x"] = xs;
    d["y"] = ys;
    return d;
}

}  // namespace

PYBIND11_MODULE(_laxqsl, m) {
    m.doc() = "Lax-pair brachistochrone solver for the antiperiodic qubit ring";
    m.attr("__version__") = kToolVersion;

    py::class_<RingConfig>(m, "RingConfig")
        .def(py::init(&make_ring), py::arg("n_sites"), py::arg("lax_scale") = 1.0, py::arg("transfer_time") = 1.0)
        .def_readwrite("n_sites", &RingConfig::n_sites)
        .def_readwrite("lax_scale", &RingConfig::lax_scale)
        .def_readwrite("transfer_time", &RingConfig::transfer_time)
        .def("validate", &RingConfig::validate);

    py::class_<LaxEigenvector>(m, "LaxEigenvector")
        .def(py::init<VecR, VecR>(), py::arg("x"), py::arg("y"))
        .def_readwrite("x", &LaxEigenvector::x)
        .def_readwrite("y", &LaxEigenvector::y)
        .def("complex", &LaxEigenvector::complex)
        .def("norm_defect", &LaxEigenvector::norm_defect)
        .def("orthogonality_defect", &LaxEigenvector::orthogonality_defect)
        .def("is_valid", &LaxEigenvector::is_valid, py::arg("tol") = 1e-10);

    py::class_<InvariantReport>(m, "InvariantReport")
        .def_readonly("max_norm_drift", &InvariantReport::max_norm_drift)
        .def_readonly("max_orthogonality_drift", &InvariantReport::max_orthogonality_drift)
        .def_readonly("max_coupling_norm_drift", &InvariantReport::max_coupling_norm_drift)
        .def_readonly("drift_flag", &InvariantReport::drift_flag);

    py::class_<BrachSolution>(m, "BrachSolution")
        .def_readonly("config", &BrachSolution::config)
        .def_readonly("a0", &BrachSolution::a0)
        .def_readonly("l0", &BrachSolution::l0)
        .def_readonly("tau", &BrachSolution::tau)
        .def_readonly("j0", &BrachSolution::j0)
        .def_readonly("j0_tau", &BrachSolution::j0_tau)
        .def_readonly("residual_norm", &BrachSolution::residual_norm)
        .def_readonly("converged", &BrachSolution::converged)
        .def_readonly("iterations", &BrachSolution::iterations)
        .def_readonly("jacobian_condition", &BrachSolution::jacobian_condition)
        .def_readonly("message", &BrachSolution::message)
        .def_readonly("invariants", &BrachSolution::invariants);

    m.def("ring_neighbor", [](int site, int direction, const RingConfig& c) {
        const auto nb = ring_neighbor(site, direction, c);
        return py::make_tuple(nb.site, nb.sign);
    }, py::arg("site"), py::arg("direction"), py::arg("config"));
    m.def("partial_theta", &partial_theta, py::arg("p"), py::arg("q"), py::arg("tol") = 1e-16);
    m.def("initial_guess_fit", &initial_guess_fit, py::arg("config"));
    m.def("couplings_from_lax", [](const LaxEigenvector& a, const RingConfig& c) {
        return couplings_from_lax(a, c).j;
    }, py::arg("a"), py::arg("config"));
    m.def("wavefunction_from_lax", [](const LaxEigenvector& a, const std::string& gauge) {
        return wavefunction_from_lax(a, gauge_arg(gauge)).amplitudes;
    }, py::arg("a"), py::arg("gauge") = "q");
    m.def("hamiltonian_matrix", [](const VecR& j, const std::string& gauge, const RingConfig& c) {
        return hamiltonian_matrix({j}, gauge_arg(gauge), c).entries;
    }, py::arg("j"), py::arg("gauge"), py::arg("config"));
    m.def("rhs", &rhs, py::arg("a"), py::arg("config"));
    m.def("rhs_via_hamiltonian", &rhs_via_hamiltonian, py::arg("a"), py::arg("config"));

    m.def("integrate", [](const LaxEigenvector& a0, double t_end, const RingConfig& c, double tol, int samples) {
        IntegrationOptions io;
        io.rtol = io.atol = tol;
        io.samples = samples;
        const auto res = integrate(a0, t_end, c, io);
        py::dict d = trajectory_dict(res.trajectory);
        d["invariants"] = res.invariants;
        return d;
    }, py::arg("a0"), py::arg("t_end"), py::arg("config"), py::arg("tol") = 1e-10, py::arg("samples") = 100);

    m.def("solve", [](int n, const std::string& guess, std::uint64_t seed, double tol, double accept, int threads) {
        SolveOptions o;
        o.guess = guess_from_string(guess);
        if (o.guess == GuessMode::file) throw std::invalid_argument("solve: guess='file' is not available here");
        o.seed = seed;
        o.integration_tol = tol;
        o.accept_tol = accept;
        o.threads = threads;
        py::gil_scoped_release nogil;
        return solve(n, o);
    }, py::arg("n"), py::arg("guess") = "fit", py::arg("seed") = 1, py::arg("tol") = 1e-10,
       py::arg("accept") = 1e-8, py::arg("threads") = 1);

    m.def("sweep", [](const std::vector<int>& ns, bool warm_start) {
        SweepOptions o;
        o.warm_start = warm_start;
        SweepResult r;
        {
            py::gil_scoped_release nogil;
            r = sweep(ns, o);
        }
        py::list rows;
        for (const auto& row : r.rows) {
            py::dict d;
            d["n_sites"] = row.n_sites;
            d["converged"] = row.converged;
            d["l0_tau"] = row.l0_tau;
            d["j0_tau"] = row.j0_tau;
            d["residual"] = row.residual;
            rows.append(d);
        }
        py::dict out;
        out["rows"] = rows;
        if (r.fit) {
            out["fit"] = py::make_tuple(r.fit->c0, r.fit->c1, r.fit->c2);
            out["stderr"] = py::make_tuple(r.fit->se0, r.fit->se1, r.fit->se2);
        } else {
            out["fit"] = py::none();
        }
        return out;
    }, py::arg("n_list"), py::arg("warm_start") = true);

    m.def("verify", [](const BrachSolution& sol, std::vector<std::string> checks, double tol) {
        if (checks.empty()) checks = check_names();
        VerifyOptions vo;
        vo.tol = tol;
        VerifyReport rep;
        {
            py::gil_scoped_release nogil;
            rep = verify_solution(sol, checks, vo);
        }
        return rep.to_json().dump();
    }, py::arg("solution"), py::arg("checks") = std::vector<std::string>{}, py::arg("tol") = 1e-12,
       "Runs the named checks and returns the JSON report as a string.");

    m.def("save_solution", [](const BrachSolution& sol, const std::string& path) {
        SolutionDocument doc;
        doc.run.n_sites = sol.config.n_sites;
        doc.solution = sol;
        save_document(doc, path);
    }, py::arg("solution"), py::arg("path"));
    m.def("load_solution", [](const std::string& path) { return load_document(path).solution; }, py::arg("path"));

    m.def("aa_phase", [](const VecR& times, const std::vector<VecC>& psi, const VecR& energies, double winding) {
        const auto r = aa_phase(times, psi, energies, winding);
        py::dict d;
        d["winding_phase"] = r.winding_phase;
        d["dynamical_integral"] = r.dynamical_integral;
        d["aa_phase"] = r.aa_phase;
        d["closure_defect"] = r.closure_defect;
        return d;
    }, py::arg("times"), py::arg("psi"), py::arg("energies"), py::arg("winding") = std::numbers::pi);

    m.def("subspace_closure_check", [](int n, int trials, std::uint64_t seed) {
        const auto r = subspace_closure_check(n, trials, seed);
        py::dict d;
        d["aa_leakage"] = r.aa_leakage;
        d["ab_leakage"] = r.ab_leakage;
        d["chiral_defect"] = r.chiral_defect;
        d["orthonormality_defect"] = r.orthonormality_defect;
        return d;
    }, py::arg("n"), py::arg("trials") = 20, py::arg("seed") = 1);

    py::register_exception<DocumentError>(m, "DocumentError", PyExc_ValueError);
}
