// ode.hpp - Dormand-Prince 5(4) integrator with continuous output
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace laxqsl::ode {

using State = Eigen::VectorXd;

// dydt = f(t, y); dydt is pre-sized.
using RhsFn = std::function<void(double, const State&, State&)>;

// Called for every requested output time with the interpolated state.
using SampleFn = std::function<void(std::size_t, double, const State&)>;

// Called after every accepted step. May modify y (projection).
using StepFn = std::function<void(double, State&)>;

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double t) : std::runtime_error(what), time_(t) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

struct Options {
    double rtol = 1e-10;
    double atol = 1e-10;
    double initial_step = 0.0;  // 0 selects automatically
    double max_step = 0.0;      // 0 means unbounded
    std::size_t max_steps = 5'000'000;
};

struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
};

// Integrates y from t0 to t1 > t0 in place. sample_times must be sorted and lie
// in [t0, t1]; each is reported through on_sample using the dense-output
// interpolant of the step that covers it.
Stats dopri5(const RhsFn& f, State& y, double t0, double t1, std::span<const double> sample_times,
             const SampleFn& on_sample, const StepFn& on_step, const Options& opts);

inline Stats dopri5(const RhsFn& f, State& y, double t0, double t1, const Options& opts) {
    return dopri5(f, y, t0, t1, {}, nullptr, nullptr, opts);
}

}  // namespace laxqsl::ode
