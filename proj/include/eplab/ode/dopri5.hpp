#pragma once

// Dormand-Prince 5(4) embedded pair with PI step-size control and the
// standard fourth-order continuous extension. Coefficients and controller
// constants follow Hairer, Norsett & Wanner, "Solving ODEs I", DOPRI5.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "eplab/errors.hpp"
#include "eplab/format.hpp"

namespace eplab::ode {

struct StepperSettings {
    double rtol = 1e-10;
    double atol = 1e-14;
    double h_init = 0.0;  // 0 selects the step automatically
    double h_max = std::numeric_limits<double>::infinity();
    double h_min = 1e-18;  // underflow threshold, units of 1/omega
};

template <std::size_t N, class Rhs>
class DormandPrince5 {
public:
    using State = std::array<double, N>;

    DormandPrince5(Rhs rhs, const State& y0, double t0, const StepperSettings& s)
        : rhs_(std::move(rhs)), s_(s), t_(t0), y_(y0)
    {
        k1_ = rhs_(y_);
        ++evals_;
        h_ = s_.h_init > 0.0 ? s_.h_init : initial_step();
    }

    double t() const { return t_; }
    const State& y() const { return y_; }
    double h() const { return h_; }
    double t_prev() const { return t_prev_; }
    std::size_t accepted() const { return accepted_; }
    std::size_t rejected() const { return rejected_; }
    std::size_t evaluations() const { return evals_; }
    const State& derivative() const { return k1_; }

    // Advances by one accepted step, never past t_limit.
    void step(double t_limit)
    {
        bool last_rejected = false;
        for (;;) {
            double h = std::min(h_, s_.h_max);
            bool clipped = false;
            if (t_ + h >= t_limit) {
                h = t_limit - t_;
                clipped = true;
            }
            if (!(h >= s_.h_min) && !clipped)
                throw StepUnderflowError("step size underflow at t = " + format_double(t_), t_);
            if (h <= 0.0)
                return;

            State k2, k3, k4, k5, k6, k7, ytmp, ynew;
            for (std::size_t i = 0; i < N; ++i) ytmp[i] = y_[i] + h * a21 * k1_[i];
            k2 = rhs_(ytmp);
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2[i]);
            k3 = rhs_(ytmp);
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2[i] + a43 * k3[i]);
            k4 = rhs_(ytmp);
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            k5 = rhs_(ytmp);
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                       a65 * k5[i]);
            k6 = rhs_(ytmp);
            for (std::size_t i = 0; i < N; ++i)
                ynew[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] +
                                       a76 * k6[i]);
            k7 = rhs_(ynew);
            evals_ += 6;

            double err = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const double e = h * (e1 * k1_[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                      e6 * k6[i] + e7 * k7[i]);
                const double sk = s_.atol + s_.rtol * std::max(std::abs(y_[i]), std::abs(ynew[i]));
                err += (e / sk) * (e / sk);
            }
            err = std::sqrt(err / static_cast<double>(N));
            if (!std::isfinite(err))
                err = 1e10;

            const double fac11 = std::pow(err, expo1);
            if (err <= 1.0) {
                double fac = fac11 / std::pow(facold_, beta);
                fac = std::clamp(fac / safe, 1.0 / facmax, 1.0 / facmin);
                double hnew = h / fac;
                if (last_rejected)
                    hnew = std::min(hnew, h);
                facold_ = std::max(err, 1e-4);

                for (std::size_t i = 0; i < N; ++i) {
                    const double ydiff = ynew[i] - y_[i];
                    const double bspl = h * k1_[i] - ydiff;
                    r1_[i] = y_[i];
                    r2_[i] = ydiff;
                    r3_[i] = bspl;
                    r4_[i] = ydiff - h * k7[i] - bspl;
                    r5_[i] = h * (d1 * k1_[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                  d6 * k6[i] + d7 * k7[i]);
                }
                t_prev_ = t_;
                h_prev_ = h;
                t_ = clipped ? t_limit : t_ + h;
                y_ = ynew;
                k1_ = k7;
                ++accepted_;
                // A clipped step says nothing about the natural step size.
                if (!clipped || hnew < h_)
                    h_ = hnew;
                return;
            }
            ++rejected_;
            last_rejected = true;
            h_ = h / std::min(1.0 / facmin, fac11 / safe);
            if (h_ < s_.h_min)
                throw StepUnderflowError("step size underflow at t = " + format_double(t_), t_);
        }
    }

    // Continuous extension inside the last accepted step [t_prev, t].
    State dense(double t) const
    {
        const double theta = h_prev_ > 0.0 ? (t - t_prev_) / h_prev_ : 1.0;
        const double theta1 = 1.0 - theta;
        State out;
        for (std::size_t i = 0; i < N; ++i)
            out[i] = r1_[i] +
                     theta * (r2_[i] + theta1 * (r3_[i] + theta * (r4_[i] + theta1 * r5_[i])));
        return out;
    }

private:
    double weighted_norm(const State& v) const
    {
        double acc = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = s_.atol + s_.rtol * std::abs(y_[i]);
            acc += (v[i] / sk) * (v[i] / sk);
        }
        return std::sqrt(acc / static_cast<double>(N));
    }

    double initial_step()
    {
        const double dnf = weighted_norm(k1_);
        const double dny = weighted_norm(y_);
        double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
        h = std::min(h, s_.h_max);
        State y1;
        for (std::size_t i = 0; i < N; ++i) y1[i] = y_[i] + h * k1_[i];
        const State f1 = rhs_(y1);
        ++evals_;
        State diff;
        for (std::size_t i = 0; i < N; ++i) diff[i] = f1[i] - k1_[i];
        const double der2 = weighted_norm(diff) / h;
        const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
        const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3)
                                         : std::pow(0.01 / der12, 1.0 / 5.0);
        return std::min({100.0 * h, h1, s_.h_max});
    }

    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                            a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                            a65 = -5103.0 / 18656.0;
    static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                            a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    static constexpr double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

    static constexpr double safe = 0.9;
    static constexpr double facmin = 0.2;   // smallest allowed h_new / h
    static constexpr double facmax = 10.0;  // largest allowed h_new / h
    static constexpr double beta = 0.04;
    static constexpr double expo1 = 0.2 - beta * 0.75;

    Rhs rhs_;
    StepperSettings s_;
    double t_;
    State y_;
    State k1_{};
    double h_ = 0.0;
    double t_prev_ = 0.0;
    double h_prev_ = 0.0;
    double facold_ = 1e-4;
    State r1_{}, r2_{}, r3_{}, r4_{}, r5_{};
    std::size_t accepted_ = 0;
    std::size_t rejected_ = 0;
    std::size_t evals_ = 0;
};

}  // namespace eplab::ode
