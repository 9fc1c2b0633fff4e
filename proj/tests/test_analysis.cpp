#include "laxqsl/analysis.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace laxqsl;

namespace {

constexpr double pi = std::numbers::pi;

Trajectory traveling_wave(int n, double tau, int per_period, int periods) {
    Trajectory tr;
    tr.config = make_ring(n, 1.0, tau);
    const int ns = per_period * periods;
    tr.times = VecR::LinSpaced(ns + 1, 0.0, tau * periods);
    for (int k = 0; k <= ns; ++k) {
        VecR x(n), y(n);
        for (int m = 1; m <= n; ++m) {
            const double s = pi * (tr.times[k] + (n - m) * tau) / (n * tau);
            x[m - 1] = std::cos(s);
            y[m - 1] = 0.5 * std::sin(3.0 * s);
        }
        tr.states.push_back({x, y});
    }
    return tr;
}

struct SolvedRun {
    BrachSolution sol;
    Trajectory period;  // [0, tau], 40 intervals
};

const SolvedRun& run7() {
    static const SolvedRun r = [] {
        SolvedRun s{solve(7), {}};
        IntegrationOptions io;
        io.rtol = io.atol = 1e-12;
        io.samples = 40;
        s.period = integrate(s.sol.a0, s.sol.tau, s.sol.config, io).trajectory;
        return s;
    }();
    return r;
}

}  // namespace

TEST_CASE("wrap_angle and simpson") {
    CHECK(wrap_angle(pi) == pi);
    CHECK(wrap_angle(-pi) == doctest::Approx(pi));
    CHECK(wrap_angle(3.0 * pi / 2.0) == doctest::Approx(-pi / 2.0));
    CHECK(wrap_angle(0.25) == 0.25);
    CHECK(wrap_angle(0.25 + 8.0 * pi) == doctest::Approx(0.25));

    auto cubic = [](double t) { return 2.0 - t + 3.0 * t * t * t; };  // integral over [0, 2] = 14
    for (int intervals : {1, 2, 3, 4, 5, 8, 9}) {
        const VecR t = VecR::LinSpaced(intervals + 1, 0.0, 2.0);
        const VecR v = t.unaryExpr(cubic);
        CAPTURE(intervals);
        if (intervals == 1)
            CHECK(simpson(t, v) == doctest::Approx(0.5 * 2.0 * (cubic(0.0) + cubic(2.0))));
        else
            CHECK(simpson(t, v) == doctest::Approx(14.0).epsilon(1e-13));
    }
    const VecR bad = (VecR(4) << 0.0, 0.1, 0.3, 0.4).finished();
    CHECK_THROWS_AS(simpson(bad, VecR::Ones(4)), std::invalid_argument);
}

TEST_CASE("Aharonov-Anandan phase of a precessing spin") {
    const double omega = 1.7;
    const double period = 2.0 * pi / omega;
    for (double theta : {0.3, 1.0, 2.2}) {
        const VecR t = VecR::LinSpaced(201, 0.0, period);
        std::vector<VecC> psi;
        VecR e(t.size());
        for (Eigen::Index k = 0; k < t.size(); ++k) {
            VecC v(2);
            v << std::cos(theta / 2) * std::exp(cplx(0, -omega * t[k] / 2)),
                std::sin(theta / 2) * std::exp(cplx(0, omega * t[k] / 2));
            psi.push_back(v);
            e[k] = 0.5 * omega * std::cos(theta);
        }
        const auto r = aa_phase(t, psi, e);
        CAPTURE(theta);
        CHECK(r.winding_phase == doctest::Approx(pi).epsilon(1e-12));
        CHECK(std::abs(wrap_angle(r.aa_phase - pi * (1.0 + std::cos(theta)))) < 1e-12);
        CHECK(r.closure_defect < 1e-12);

        // a global phase on every sample changes nothing
        std::vector<VecC> rotated = psi;
        for (auto& v : rotated) v *= std::exp(cplx(0, 0.9));
        CHECK(aa_phase(t, rotated, e).aa_phase == doctest::Approx(r.aa_phase).epsilon(1e-12));

        // run backwards: phi and the dynamical integral both flip sign
        std::vector<VecC> reversed(psi.rbegin(), psi.rend());
        const auto rr = aa_phase(t, reversed, -e, -pi);
        CHECK(std::abs(wrap_angle(rr.aa_phase + r.aa_phase)) < 1e-12);
    }
    CHECK_THROWS_AS(aa_phase(VecR::LinSpaced(3, 0, 1), std::vector<VecC>(2, VecC::Ones(2)), VecR::Zero(3)),
                    std::invalid_argument);
}

TEST_CASE("speed limit of a current-free trajectory") {
    Trajectory tr;
    tr.config = make_ring(5);
    tr.times = VecR::LinSpaced(3, 0.0, 1.0);
    for (int k = 0; k < 3; ++k) tr.states.push_back({VecR::Constant(5, 0.3), VecR::Zero(5)});
    const auto s = speed_limit(tr);
    CHECK(s.j0 == 0.0);
    CHECK(s.j0_tau == 0.0);
    CHECK(s.relative_variation == 0.0);
    CHECK(s.coupling_norm_series.size() == 3);
}

TEST_CASE("speed limit of a converged solution") {
    const auto& r = run7();
    const auto s = speed_limit(r.period);
    CHECK(s.j0_tau == doctest::Approx(r.sol.j0_tau).epsilon(1e-9));
    CHECK(s.relative_variation < 1e-8);
    CHECK(speed_limit(r.sol, 20).j0_tau == doctest::Approx(r.sol.j0_tau).epsilon(1e-9));
}

TEST_CASE("traveling-wave check on synthetic profiles") {
    const auto tr = traveling_wave(5, 0.7, 16, 7);
    const auto pc = traveling_wave_check(tr);
    CHECK(pc.samples_per_period == 16);
    CHECK(pc.comparisons > 0);
    CHECK(pc.max_error < 1e-13);

    Trajectory broken = tr;
    broken.states[20].x[2] += 1e-3;
    CHECK(traveling_wave_check(broken).max_error == doctest::Approx(1e-3).epsilon(1e-6));

    Trajectory coarse = traveling_wave(5, 0.7, 1, 7);
    CHECK_THROWS_AS(traveling_wave_check(coarse), std::invalid_argument);
    Trajectory short_run = tr;
    short_run.times.conservativeResize(10);
    short_run.states.resize(10);
    CHECK_THROWS_AS(traveling_wave_check(short_run), std::invalid_argument);
}

TEST_CASE("traveling-wave check on the solver output and a negative control") {
    const auto& r = run7();
    CHECK(traveling_wave_check(r.period).max_error < 1e-8);

    // 1% wrong L0: the state no longer shifts by one site per tau
    const auto wrong = make_ring(7, 1.01 * r.sol.l0, r.sol.tau);
    IntegrationOptions io;
    io.rtol = io.atol = 1e-12;
    io.samples = 120;
    const auto tr = integrate(r.sol.a0, 3.0 * r.sol.tau, wrong, io).trajectory;
    const double err = traveling_wave_check(tr).max_error;
    MESSAGE("profile error with L0 off by 1%: " << err);
    CHECK(err > 1e-3);
}

TEST_CASE("instantaneous spectrum along a solution") {
    const auto& r = run7();
    for (Gauge g : {Gauge::q_transformed, Gauge::site}) {
        const auto spec = instantaneous_spectrum(r.period, g, 2);
        REQUIRE(spec.size() == r.period.size());
        const auto sum = summarize_spectrum(spec);
        CHECK(sum.max_asymmetry < 1e-10);
        CHECK(sum.max_overlap_norm_defect < 1e-10);
        CHECK(sum.max_min_abs_eigenvalue < 1e-10);  // odd N: zero mode
        CHECK(sum.max_dominant_overlap < 1.0);
        // gauge choice cannot change |c_m|
        const auto q = instantaneous_spectrum(r.period, Gauge::q_transformed, 1);
        for (std::size_t k = 0; k < spec.size(); k += 10)
            CHECK((spec[k].overlap_coeffs.cwiseAbs() - q[k].overlap_coeffs.cwiseAbs()).norm() < 1e-8);
    }
}

TEST_CASE("geometric phase of the ring transit") {
    const auto& r = run7();
    IntegrationOptions io;
    io.rtol = io.atol = 1e-12;
    io.samples = 7 * 40;
    const auto full = integrate(r.sol.a0, 7.0 * r.sol.tau, r.sol.config, io).trajectory;
    const auto ph = aa_phase(full);
    CHECK(std::abs(wrap_angle(ph.aa_phase - pi)) < 1e-3);
    CHECK(ph.closure_defect < 1e-5);
    CHECK(std::abs(ph.dynamical_integral) < 1e-12);
    const VecC e = expectation_energy(full);
    CHECK(e.cwiseAbs().maxCoeff() < 1e-12);
}
