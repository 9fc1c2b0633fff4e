#include "laxqsl/ode.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace laxqsl::ode;

namespace {

// harmonic oscillator y'' = -y
const RhsFn oscillator = [](double, const State& y, State& dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
};

double oscillator_error(double tol, double t1) {
    State y(2);
    y << 1.0, 0.0;
    Options o;
    o.rtol = o.atol = tol;
    dopri5(oscillator, y, 0.0, t1, o);
    return std::hypot(y[0] - std::cos(t1), y[1] + std::sin(t1));
}

}  // namespace

TEST_CASE("dopri5 end state accuracy") {
    CHECK(oscillator_error(1e-10, 10.0) < 1e-8);
    CHECK(oscillator_error(1e-12, 10.0) < 1e-10);
}

TEST_CASE("dopri5 error decreases with the tolerance at roughly fifth order") {
    // step size scales as tol^(1/5); global error should track tol
    const double e1 = oscillator_error(1e-6, 20.0);
    const double e2 = oscillator_error(1e-8, 20.0);
    const double e3 = oscillator_error(1e-10, 20.0);
    CHECK(e2 < e1);
    CHECK(e3 < e2);
    const double slope = std::log10(e1 / e3) / 4.0;  // decades of error per decade of tol
    CHECK(slope > 0.7);
    CHECK(slope < 1.3);
}

TEST_CASE("dense output matches the exact solution between steps") {
    State y(2);
    y << 1.0, 0.0;
    std::vector<double> ts;
    for (int k = 0; k <= 400; ++k) ts.push_back(10.0 * k / 400);
    double worst = 0.0;
    std::size_t seen = 0;
    Options o;
    o.rtol = o.atol = 1e-11;
    const SampleFn sample = [&](std::size_t idx, double t, const State& s) {
        CHECK(idx == seen);
        CHECK(t == ts[idx]);
        ++seen;
        worst = std::max(worst, std::hypot(s[0] - std::cos(t), s[1] + std::sin(t)));
    };
    const auto st = dopri5(oscillator, y, 0.0, 10.0, ts, sample, nullptr, o);
    CHECK(seen == ts.size());
    CHECK(worst < 1e-9);
    CHECK(st.accepted < ts.size());  // interpolation, not one step per sample
    CHECK(st.evaluations > 0);
}

TEST_CASE("exponential growth and decay") {
    const RhsFn lin = [](double, const State& y, State& dy) { dy = -2.0 * y; };
    State y = State::Constant(3, 1.5);
    Options o;
    o.rtol = o.atol = 1e-12;
    dopri5(lin, y, 0.0, 3.0, o);
    CHECK(std::abs(y[0] - 1.5 * std::exp(-6.0)) < 1e-12);
}

TEST_CASE("blow-up raises an integration error with the failure time") {
    const RhsFn blow = [](double, const State& y, State& dy) { dy[0] = y[0] * y[0]; };
    State y(1);
    y[0] = 1.0;  // y = 1 / (1 - t)
    Options o;
    o.rtol = o.atol = 1e-10;
    bool thrown = false;
    try {
        dopri5(blow, y, 0.0, 2.0, o);
    } catch (const IntegrationError& e) {
        thrown = true;
        CHECK(e.time() > 0.99);
        CHECK(e.time() <= 1.0);
    }
    CHECK(thrown);
}

TEST_CASE("step budget is enforced") {
    State y(2);
    y << 1.0, 0.0;
    Options o;
    o.max_steps = 5;
    CHECK_THROWS_AS(dopri5(oscillator, y, 0.0, 100.0, o), IntegrationError);
}

TEST_CASE("step callback may modify the state") {
    State y(2);
    y << 1.0, 0.0;
    int calls = 0;
    const StepFn renorm = [&](double, State& s) {
        ++calls;
        s.normalize();
    };
    Options o;
    o.rtol = o.atol = 1e-6;
    dopri5(oscillator, y, 0.0, 50.0, {}, nullptr, renorm, o);
    CHECK(calls > 0);
    CHECK(std::abs(y.norm() - 1.0) < 1e-15);
}
