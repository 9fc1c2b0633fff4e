#include "laxqsl/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace laxqsl::ode {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// continuous extension (Hairer, Norsett & Wanner)
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

double scaled_rms(const State& e, const State& y0, const State& y1, double rtol, double atol) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = e[i] / sc;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(1, e.size())));
}

double initial_step(const RhsFn& f, double t0, const State& y0, const State& f0, double span,
                    const Options& o, Stats& st) {
    const Eigen::Index n = y0.size();
    double dnf = 0.0, dny = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sk = o.atol + o.rtol * std::abs(y0[i]);
        dnf += (f0[i] / sk) * (f0[i] / sk);
        dny += (y0[i] / sk) * (y0[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
    h = std::min(h, span);
    State y1 = y0 + h * f0;
    State f1(n);
    f(t0 + h, y1, f1);
    ++st.evaluations;
    double der2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sk = o.atol + o.rtol * std::abs(y0[i]);
        der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
    }
    der2 = std::sqrt(der2 / static_cast<double>(n)) / h;
    const double der12 = std::max(der2, std::sqrt(dnf / static_cast<double>(n)));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, span});
}

}  // namespace

Stats dopri5(const RhsFn& f, State& y, double t0, double t1, std::span<const double> sample_times,
             const SampleFn& on_sample, const StepFn& on_step, const Options& o) {
    if (!(t1 > t0)) throw std::invalid_argument("dopri5: t1 must exceed t0");
    if (!(o.rtol > 0.0) || !(o.atol > 0.0)) throw std::invalid_argument("dopri5: tolerances must be positive");
    for (std::size_t s = 0; s < sample_times.size(); ++s) {
        if (sample_times[s] < t0 || sample_times[s] > t1 || (s > 0 && sample_times[s] < sample_times[s - 1])) {
            throw std::invalid_argument("dopri5: sample times must be sorted within [t0, t1]");
        }
    }

    Stats st;
    const Eigen::Index n = y.size();
    State k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
    State r1(n), r2(n), r3(n), r4(n), r5(n), ys(n);

    f(t0, y, k1);
    ++st.evaluations;

    std::size_t next_sample = 0;
    while (next_sample < sample_times.size() && sample_times[next_sample] == t0) {
        if (on_sample) on_sample(next_sample, t0, y);
        ++next_sample;
    }

    double t = t0;
    double h = o.initial_step > 0.0 ? o.initial_step : initial_step(f, t0, y, k1, t1 - t0, o, st);
    if (o.max_step > 0.0) h = std::min(h, o.max_step);
    bool last_rejected = false;

    while (t < t1) {
        if (st.accepted + st.rejected >= o.max_steps) {
            throw IntegrationError("dopri5: step budget exhausted", t);
        }
        const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
        if (h < h_min) throw IntegrationError("dopri5: step size underflow", t);
        bool final_step = false;
        if (t + h >= t1 || t + 1.01 * h >= t1) {
            h = t1 - t;
            final_step = true;
        }

        ytmp = y + h * a21 * k1;
        f(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        f(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + h, ytmp, k6);
        ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        f(t + h, ynew, k7);
        st.evaluations += 6;

        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double en = scaled_rms(err, y, ynew, o.rtol, o.atol);
        if (!std::isfinite(en)) {
            ++st.rejected;
            h *= 0.1;
            last_rejected = true;
            continue;
        }

        if (en <= 1.0) {
            const double t_new = final_step ? t1 : t + h;
            if (on_sample && next_sample < sample_times.size() && sample_times[next_sample] <= t_new) {
                r1 = y;
                r2 = ynew - y;
                r3 = h * k1 - r2;
                r4 = r2 - h * k7 - r3;
                r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
                while (next_sample < sample_times.size() && sample_times[next_sample] <= t_new) {
                    const double s = sample_times[next_sample];
                    if (s == t_new) {
                        ys = ynew;
                    } else {
                        const double th = (s - t) / h;
                        const double th1 = 1.0 - th;
                        ys = r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
                    }
                    on_sample(next_sample, s, ys);
                    ++next_sample;
                }
            }
            y.swap(ynew);
            t = t_new;
            ++st.accepted;
            if (on_step) {
                on_step(t, y);
                f(t, y, k1);
                ++st.evaluations;
            } else {
                k1.swap(k7);
            }
            double fac = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 10.0;
            fac = std::clamp(fac, 0.2, 10.0);
            if (last_rejected) fac = std::min(fac, 1.0);
            h *= fac;
            if (o.max_step > 0.0) h = std::min(h, o.max_step);
            last_rejected = false;
        } else {
            ++st.rejected;
            h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
            last_rejected = true;
        }
    }
    return st;
}

}  // namespace laxqsl::ode
