#pragma once

#include <array>

#include "eplab/model/params.hpp"

namespace eplab::model {

// (n, D, phi, s): photons per molecule, population inversion, scaled energy
// flow between field and molecules, scaled intermolecular polarization
// correlation.
struct MeanFieldState {
    double n = 0.0;
    double d = 0.0;
    double phi = 0.0;
    double s = 0.0;

    std::array<double, 4> to_array() const { return {n, d, phi, s}; }
    static MeanFieldState from_array(const std::array<double, 4>& a)
    {
        return {a[0], a[1], a[2], a[3]};
    }
    double norm() const;
    bool finite() const;

    friend bool operator==(const MeanFieldState&, const MeanFieldState&) = default;
};

enum class StationarySource { printed_formula, exact_solve };

struct StationaryTriple {
    double n_st = 0.0;
    double phi_st = 0.0;
    double s_st = 0.0;
    StationarySource source = StationarySource::exact_solve;

    MeanFieldState at(double d0) const { return {n_st, d0, phi_st, s_st}; }
};

// Time derivative of the four mean-field equations.
MeanFieldState mean_field_rhs(const ModelParams& p, const MeanFieldState& x);

// d(rhs)/d(n, D, phi, s), row-major.
std::array<std::array<double, 4>, 4> mean_field_jacobian(const ModelParams& p,
                                                         const MeanFieldState& x);

// Euclidean norm of mean_field_rhs(p, x).
double residual_norm(const ModelParams& p, const MeanFieldState& x);

// Components (dn/dt, dphi/dt, ds/dt) evaluated at D frozen to d0.
std::array<double, 3> stationarity_residuals(const ModelParams& p, double d0,
                                             const StationaryTriple& t);

// Literal closed-form stationary values with the molecule count N in every
// place the closed form carries it. Throws DomainError at d0 == 0 or
// omega_r == 0 (both appear in denominators).
StationaryTriple stationary_printed(const ModelParams& p, double d0);

// Solves dn/dt = dphi/dt = ds/dt = 0 at D = d0 as a 3x3 linear system,
// keeping the spontaneous source (omega_r/2)(d0 + 1). gamma_sigma comes from
// p as given. Throws SingularSystemError when the system has no unique
// solution.
StationaryTriple stationary_exact(const ModelParams& p, double d0);

}  // namespace eplab::model
