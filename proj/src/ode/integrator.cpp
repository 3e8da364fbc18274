#include "eplab/ode/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "eplab/errors.hpp"
#include "eplab/format.hpp"

namespace eplab::ode {

using model::MeanFieldState;
using model::ModelParams;

namespace {

using Vec4 = std::array<double, 4>;

auto make_rhs(const ModelParams& p)
{
    return [p](const Vec4& y) { return mean_field_rhs(p, MeanFieldState::from_array(y)).to_array(); };
}

void check_settings(const StepperSettings& s)
{
    if (!(s.rtol > 0.0) || !(s.atol > 0.0))
        throw DomainError("step controls: tolerances must be positive");
}

bool finite(const Vec4& y)
{
    return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

Trajectory integrate(const ModelParams& p, const MeanFieldState& x0, double t_end,
                     const StepControls& ctrl)
{
    if (!(t_end > 0.0) || !std::isfinite(t_end))
        throw DomainError("integrate: t_end must be positive, got " + format_double(t_end));
    check_settings(ctrl.stepper);
    if (!x0.finite())
        throw DomainError("integrate: initial state is not finite");

    std::vector<double> targets = ctrl.sample_times;
    if (targets.empty()) {
        const std::size_t count = std::max<std::size_t>(ctrl.samples, 2);
        for (std::size_t i = 1; i < count; ++i)
            targets.push_back(t_end * static_cast<double>(i) / static_cast<double>(count - 1));
        targets.back() = t_end;
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!(targets[i] > 0.0) || targets[i] > t_end || (i > 0 && !(targets[i] > targets[i - 1])))
            throw DomainError("integrate: sample times must be strictly increasing in (0, t_end]");
    }

    Trajectory traj;
    traj.params = p;
    traj.times.reserve(targets.size() + 1);
    traj.states.reserve(targets.size() + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(x0);

    DormandPrince5<4, decltype(make_rhs(p))> stepper(make_rhs(p), x0.to_array(), 0.0,
                                                      ctrl.stepper);
    std::size_t next = 0;
    while (next < targets.size()) {
        stepper.step(t_end);
        if (!finite(stepper.y()))
            throw Error("integrate: state became non-finite at t = " + format_double(stepper.t()));
        while (next < targets.size() && targets[next] <= stepper.t()) {
            const double ts = targets[next];
            const Vec4 y = ts == stepper.t() ? stepper.y() : stepper.dense(ts);
            traj.times.push_back(ts);
            traj.states.push_back(MeanFieldState::from_array(y));
            ++next;
        }
    }
    traj.accepted_steps = stepper.accepted();
    traj.rejected_steps = stepper.rejected();
    return traj;
}

MeanFieldState default_initial_state(const ModelParams& p)
{
    return {0.0, model::derive_rates(p).d0, 1e-9, 0.0};
}

double default_horizon(const ModelParams& p)
{
    const double gs = model::gamma_sigma(p);
    const double rates[] = {2.0 * p.gamma_a, p.gamma_p + p.gamma_d,
                            gs + p.gamma_a + p.gamma_cor / 4.0, 2.0 * gs + p.gamma_cor};
    double slowest = std::numeric_limits<double>::infinity();
    for (double r : rates)
        if (r > 0.0)
            slowest = std::min(slowest, r);
    if (!std::isfinite(slowest))
        throw DomainError("default horizon: all relaxation rates vanish");
    return 100.0 / slowest;
}

MeanFieldState newton_polish(const ModelParams& p, MeanFieldState x, bool& ok, int max_iter)
{
    ok = false;
    double res = residual_norm(p, x);
    for (int it = 0; it < max_iter; ++it) {
        const auto j = model::mean_field_jacobian(p, x);
        Eigen::Matrix4d jac;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) jac(r, c) = j[r][c];
        const auto f = mean_field_rhs(p, x).to_array();
        const Eigen::Vector4d fv(f[0], f[1], f[2], f[3]);
        Eigen::FullPivLU<Eigen::Matrix4d> lu(jac);
        if (!lu.isInvertible())
            return x;
        const Eigen::Vector4d dx = lu.solve(fv);
        const MeanFieldState trial{x.n - dx(0), x.d - dx(1), x.phi - dx(2), x.s - dx(3)};
        const double trial_res = residual_norm(p, trial);
        if (!(trial_res < res)) {
            // No further progress; roundoff floor reached.
            ok = it > 0;
            return x;
        }
        x = trial;
        res = trial_res;
        ok = true;
    }
    return x;
}

SteadyReport steady_state(const ModelParams& p, const MeanFieldState& x0,
                          const SteadyOptions& opts)
{
    check_settings(opts.stepper);
    const double horizon = opts.horizon > 0.0 ? opts.horizon : default_horizon(p);

    SteadyReport rep;
    auto threshold = [&](const MeanFieldState& x) {
        return opts.tolerance * std::max(1.0, x.norm());
    };

    rep.state = x0;
    rep.residual = residual_norm(p, x0);
    rep.tolerance = threshold(x0);
    if (rep.residual < rep.tolerance) {
        rep.converged = true;
        return rep;
    }

    DormandPrince5<4, decltype(make_rhs(p))> stepper(make_rhs(p), x0.to_array(), 0.0,
                                                      opts.stepper);
    double last_polish_residual = std::numeric_limits<double>::infinity();
    while (stepper.t() < horizon) {
        stepper.step(horizon);
        const auto x = MeanFieldState::from_array(stepper.y());
        if (!x.finite())
            break;
        const double res = residual_norm(p, x);
        const double tol = threshold(x);
        rep.state = x;
        rep.residual = res;
        rep.tolerance = tol;
        rep.elapsed_time = stepper.t();
        if (res < tol) {
            rep.converged = true;
            return rep;
        }
        // Near the attractor a Newton step lands on the fixed point directly.
        if (opts.newton_polish && res < 1e3 * tol && res < 0.1 * last_polish_residual) {
            last_polish_residual = res;
            bool ok = false;
            const auto polished = newton_polish(p, x, ok);
            MeanFieldState diff{polished.n - x.n, polished.d - x.d, polished.phi - x.phi,
                                polished.s - x.s};
            const double pres = residual_norm(p, polished);
            if (ok && pres < threshold(polished) && diff.norm() < 1e-6 * std::max(1.0, x.norm())) {
                rep.state = polished;
                rep.residual = pres;
                rep.tolerance = threshold(polished);
                rep.converged = true;
                rep.polished = true;
                return rep;
            }
        }
    }
    return rep;
}

std::vector<DstRow> dst_curve(const ModelParams& p, std::span<const double> pump_ratios,
                              const SteadyOptions& opts)
{
    for (double r : pump_ratios)
        if (!(r >= 0.0) || !std::isfinite(r))
            throw DomainError("dst curve: pump ratios must be finite and >= 0, got " +
                              format_double(r));

    std::vector<DstRow> rows;
    rows.reserve(pump_ratios.size());
    for (double ratio : pump_ratios) {
        ModelParams q = p;
        q.gamma_p = ratio * p.gamma_d;
        const double d0 = model::derive_rates(q).d0;
        const auto rep = steady_state(q, default_initial_state(q), opts);
        rows.push_back({ratio, rep.state.d, d0, rep.converged, rep.residual});
    }
    return rows;
}

}  // namespace eplab::ode
