#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "eplab/model/mean_field.hpp"
#include "eplab/ode/dopri5.hpp"

namespace eplab::ode {

struct StepControls {
    StepperSettings stepper;
    // Output times in (0, t_end]. When empty, `samples` uniformly spaced
    // points on [0, t_end] are produced.
    std::vector<double> sample_times;
    std::size_t samples = 101;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<model::MeanFieldState> states;
    model::ModelParams params;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
};

// Integrates the four mean-field equations from x0 at t = 0 to t_end.
// Throws DomainError for t_end <= 0, non-positive tolerances or bad sample
// times, StepUnderflowError when the controller collapses, and Error if the
// state becomes non-finite.
Trajectory integrate(const model::ModelParams& p, const model::MeanFieldState& x0,
                     double t_end, const StepControls& ctrl = {});

struct SteadyOptions {
    double horizon = 0.0;        // 0 selects default_horizon(p)
    double tolerance = 1e-12;    // converged when residual < tolerance * max(1, |x|)
    bool newton_polish = true;
    StepperSettings stepper;
};

struct SteadyReport {
    model::MeanFieldState state;
    bool converged = false;
    bool polished = false;
    double residual = 0.0;
    double tolerance = 0.0;  // absolute threshold that was applied
    double elapsed_time = 0.0;
};

// (0, D_0, 1e-9, 0): field-free inversion with a small seed on phi.
model::MeanFieldState default_initial_state(const model::ModelParams& p);

// 100 over the slowest of the bare relaxation rates 2 gamma_a,
// gamma_p + gamma_d, gamma_sigma + gamma_a + gamma_cor/4, 2 gamma_sigma + gamma_cor.
double default_horizon(const model::ModelParams& p);

// Newton iteration on the full four-equation system. Returns the polished
// point; `ok` is cleared when the iteration fails to reduce the residual.
model::MeanFieldState newton_polish(const model::ModelParams& p, model::MeanFieldState x,
                                    bool& ok, int max_iter = 30);

// Integrates until the residual criterion holds or the horizon is reached.
// Non-convergence is reported through the flag, not thrown.
SteadyReport steady_state(const model::ModelParams& p, const model::MeanFieldState& x0,
                          const SteadyOptions& opts = {});

struct DstRow {
    double pump_ratio = 0.0;
    double d_st = 0.0;
    double d0 = 0.0;
    bool converged = false;
    double residual = 0.0;
};

// One steady_state solve per gamma_p / gamma_d ratio, rows in input order.
// Throws DomainError for negative ratios.
std::vector<DstRow> dst_curve(const model::ModelParams& p, std::span<const double> pump_ratios,
                              const SteadyOptions& opts = {});

}  // namespace eplab::ode
