#include "eplab/model/mean_field.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "eplab/errors.hpp"
#include "eplab/format.hpp"

namespace eplab::model {

double MeanFieldState::norm() const
{
    return std::sqrt(n * n + d * d + phi * phi + s * s);
}

bool MeanFieldState::finite() const
{
    return std::isfinite(n) && std::isfinite(d) && std::isfinite(phi) && std::isfinite(s);
}

MeanFieldState mean_field_rhs(const ModelParams& p, const MeanFieldState& x)
{
    const double sn = p.sqrt_n();
    const double g = sn * p.omega_r;
    const double gs = gamma_sigma(p);
    const double cross = (p.n_mol - 1.0) / sn * p.omega_r;

    MeanFieldState dx;
    dx.n = -2.0 * p.gamma_a * x.n + 2.0 * g * x.phi;
    dx.d = p.gamma_p * (1.0 - x.d) - p.gamma_d * (1.0 + x.d) - 4.0 * g * x.phi;
    dx.phi = -(gs + p.gamma_a + p.gamma_cor / 4.0) * x.phi + p.omega_r / 2.0 * (x.d + 1.0) +
             g * x.n * x.d + cross * x.s;
    dx.s = -(2.0 * gs + p.gamma_cor) * x.s + 2.0 * g * x.phi * x.d;
    return dx;
}

std::array<std::array<double, 4>, 4> mean_field_jacobian(const ModelParams& p,
                                                         const MeanFieldState& x)
{
    const double sn = p.sqrt_n();
    const double g = sn * p.omega_r;
    const double gs = gamma_sigma(p);
    const double cross = (p.n_mol - 1.0) / sn * p.omega_r;

    std::array<std::array<double, 4>, 4> j{};
    j[0] = {-2.0 * p.gamma_a, 0.0, 2.0 * g, 0.0};
    j[1] = {0.0, -(p.gamma_p + p.gamma_d), -4.0 * g, 0.0};
    j[2] = {g * x.d, p.omega_r / 2.0 + g * x.n, -(gs + p.gamma_a + p.gamma_cor / 4.0), cross};
    j[3] = {0.0, 2.0 * g * x.phi, 2.0 * g * x.d, -(2.0 * gs + p.gamma_cor)};
    return j;
}

double residual_norm(const ModelParams& p, const MeanFieldState& x)
{
    return mean_field_rhs(p, x).norm();
}

std::array<double, 3> stationarity_residuals(const ModelParams& p, double d0,
                                             const StationaryTriple& t)
{
    const auto dx = mean_field_rhs(p, t.at(d0));
    return {dx.n, dx.phi, dx.s};
}

StationaryTriple stationary_printed(const ModelParams& p, double d0)
{
    if (d0 == 0.0)
        throw DomainError("closed-form stationary values divide by d0; d0 = 0 is excluded");
    if (p.omega_r == 0.0)
        throw DomainError("closed-form stationary values divide by omega_r; omega_r = 0 is excluded");

    const double n = p.n_mol;
    const double gs = gamma_sigma(p);
    const double relax = p.gamma_cor + 2.0 * gs;
    const double relax_a = relax + 2.0 * p.gamma_a;

    StationaryTriple t;
    t.source = StationarySource::printed_formula;
    t.n_st = -(1.0 + d0) * relax / (2.0 * n * d0 * relax_a);
    t.phi_st = -p.gamma_a * (1.0 + d0) * relax /
               (2.0 * d0 * std::pow(n, 1.5) * p.omega_r * relax_a);
    t.s_st = -(1.0 + d0) * gs / (n * relax_a);
    return t;
}

StationaryTriple stationary_exact(const ModelParams& p, double d0)
{
    const double sn = p.sqrt_n();
    const double g = sn * p.omega_r;
    const double gs = gamma_sigma(p);

    // Linear part in (n, phi, s) at fixed D = d0, plus the constant source.
    Eigen::Matrix3d a;
    a << -2.0 * p.gamma_a, 2.0 * g, 0.0,
         g * d0, -(gs + p.gamma_a + p.gamma_cor / 4.0), (p.n_mol - 1.0) / sn * p.omega_r,
         0.0, 2.0 * g * d0, -(2.0 * gs + p.gamma_cor);
    const Eigen::Vector3d rhs(0.0, -p.omega_r / 2.0 * (d0 + 1.0), 0.0);

    Eigen::FullPivLU<Eigen::Matrix3d> lu(a);
    if (!lu.isInvertible())
        throw SingularSystemError("stationarity system is singular at d0 = " + format_double(d0),
                                  d0);
    Eigen::Vector3d x = lu.solve(rhs);
    // One step of iterative refinement.
    x += lu.solve(rhs - a * x);

    StationaryTriple t;
    t.source = StationarySource::exact_solve;
    t.n_st = x(0);
    t.phi_st = x(1);
    t.s_st = x(2);
    return t;
}

}  // namespace eplab::model
