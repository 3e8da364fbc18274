#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace eplab::model {

// All rates are dimensionless multiples of the transition frequency omega;
// time is measured in units of 1/omega.
struct ModelParams {
    double gamma_a = 0.0;    // cavity field relaxation
    double gamma_ph = 0.0;   // dephasing
    double gamma_d = 0.0;    // longitudinal decay
    double gamma_p = 0.0;    // incoherent pump
    double gamma_cor = 0.0;  // extra relaxation of polarization correlations
    double omega_r = 0.0;    // single-molecule coupling constant
    double n_mol = 2.0;      // molecule count N

    // Throws DomainError on negative rates or n_mol < 2.
    void validate() const;

    double sqrt_n() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct DerivedRates {
    double gamma_sigma = 0.0;  // transverse relaxation
    double d0 = 0.0;           // field-free stationary inversion
};

// gamma_a=5e-5, gamma_ph=5e-4, gamma_d=2e-5, omega_r=1e-5, n_mol=1e6,
// gamma_cor=0. The pump is not part of the preset and is left at zero.
ModelParams paper_defaults();

// gamma_sigma = gamma_ph + gamma_p/2 + gamma_d/2 and
// d0 = (gamma_p - gamma_d)/(gamma_p + gamma_d).
// Throws DegeneratePumpError when gamma_p + gamma_d == 0.
DerivedRates derive_rates(const ModelParams& p);

double gamma_sigma(const ModelParams& p);

// Inverse of the d0 formula: gamma_d (1 + d0) / (1 - d0).
// Throws DomainError unless d0 is in [-1, 1).
double pump_from_d0(const ModelParams& p, double d0);

// Copy of p with gamma_p chosen so that derive_rates(result).d0 == d0.
ModelParams with_d0(ModelParams p, double d0);

// Flat "key = value" text. Lines starting with '#' and blank lines are
// ignored. Unknown keys and malformed numbers throw DomainError. Keys not
// present keep their value from `base`.
ModelParams parse_config(std::string_view text, ModelParams base);
ModelParams load_config(const std::filesystem::path& path, ModelParams base);

// Inverse of parse_config; values written with round-trip precision.
std::string format_config(const ModelParams& p);

std::ostream& operator<<(std::ostream& os, const ModelParams& p);

}  // namespace eplab::model
