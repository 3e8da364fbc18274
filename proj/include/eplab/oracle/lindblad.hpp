#pragma once

// Exact density-matrix model of two two-level molecules coupled to one
// truncated cavity mode, used to check the relaxation terms of the
// mean-field equations against explicit Lindblad dissipators.
//
// Basis ordering is molecule 1 (g, e) x molecule 2 (g, e) x Fock (0..n_max),
// Fock index fastest. Everything is written in the frame rotating at the
// common resonance frequency, so the Hamiltonian is the coupling term only.

#include <array>
#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "eplab/model/params.hpp"

namespace eplab::oracle {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr int kMolecules = 2;

class HilbertSpace {
public:
    // Throws DomainError for n_max < 1.
    explicit HilbertSpace(int n_max);

    int n_max() const { return n_max_; }
    int dim() const { return 4 * (n_max_ + 1); }
    // m1, m2 in {0 = g, 1 = e}; photons in [0, n_max].
    int index(int m1, int m2, int photons) const;

private:
    int n_max_;
};

struct OperatorSet {
    CMatrix identity;
    CMatrix a;
    CMatrix a_dag;
    std::array<CMatrix, kMolecules> sigma;      // lowering, |g><e|
    std::array<CMatrix, kMolecules> sigma_dag;
    std::array<CMatrix, kMolecules> inversion;  // sigma_dag sigma - sigma sigma_dag

    static OperatorSet build(const HilbertSpace& space);

    // omega_r * sum_j (a_dag sigma_j + a sigma_dag_j), hbar = 1.
    CMatrix hamiltonian(double omega_r) const;
};

class DensityMatrix {
public:
    DensityMatrix() = default;
    explicit DensityMatrix(CMatrix rho) : rho_(std::move(rho)) {}

    static DensityMatrix from_ket(const CVector& psi);

    const CMatrix& matrix() const { return rho_; }
    int dim() const { return static_cast<int>(rho_.rows()); }

    double trace_error() const;        // |tr rho - 1|
    double hermiticity_error() const;  // |rho - rho^dagger|_F
    double min_eigenvalue() const;     // of the Hermitian part

    // Throws DomainError unless Hermitian and unit-trace to 1e-12 with
    // minimum eigenvalue >= -1e-10.
    void validate() const;

private:
    CMatrix rho_;
};

enum class Channel { cavity, dephasing, decay, pump, correlation };

const char* to_string(Channel c);
// Accepts cavity, ph|dephasing, decay, pump, cor|correlation.
Channel parse_channel(std::string_view name);

struct DissipatorSpec {
    std::vector<Channel> channels;
    bool hamiltonian = true;

    static DissipatorSpec all();
    static DissipatorSpec none();  // pure Hamiltonian evolution
    static DissipatorSpec only(Channel c);
    bool has(Channel c) const;
};

// Generator acting on column-stacked vec(rho).
struct Liouvillian {
    CMatrix matrix;
    int dim = 0;  // Hilbert-space dimension
};

// -i[H, .] plus the selected dissipators. Coefficients are chosen so that
// operator averages relax with the rates of the mean-field equations:
//   cavity       jump a,         rate 2 gamma_a
//   dephasing    jump D_j,       rate gamma_ph / 2  (coherence decays at gamma_ph)
//   decay        jump sigma_j,   rate gamma_d
//   pump         jump sigma_j^+, rate gamma_p
//   correlation  (gamma_cor / 4N) sum_{i<j} [ (D_i - D_j) rho (D_i - D_j)
//                 - (1 - D_i D_j) rho - rho (1 - D_i D_j) ],  N = 2
Liouvillian build_liouvillian(const HilbertSpace& space, const OperatorSet& ops,
                              const model::ModelParams& p, const DissipatorSpec& spec);

// exp(L t) vec(rho0). Throws PositivityError if the result has an
// eigenvalue below -1e-8.
DensityMatrix evolve(const Liouvillian& l, const DensityMatrix& rho0, double t);

// Fixed-step propagator exp(L dt), reused for sampled evolution.
class Propagator {
public:
    Propagator(const Liouvillian& l, double dt);
    DensityMatrix apply(const DensityMatrix& rho) const;
    double dt() const { return dt_; }

private:
    CMatrix step_;
    int dim_ = 0;
    double dt_ = 0.0;
};

// count + 1 states at t = 0, dt, ..., count * dt.
std::vector<DensityMatrix> evolve_series(const Liouvillian& l, const DensityMatrix& rho0,
                                         double dt, std::size_t count);

enum class Observable { n, d, phi, s, raw_sigma12, raw_adag_sigma1 };

const char* to_string(Observable o);

// tr(rho O) with the mean-field scalings at N = 2:
//   n = <a^+ a>/N, D = sum_j <D_j>/N,
//   phi = i/(2 N^{3/2}) <a sum_j sigma_j^+ - a^+ sum_j sigma_j>,
//   s = sum_{i != j} <sigma_i^+ sigma_j> / (N(N-1)).
// raw_sigma12 is <sigma_1^+ sigma_2>, raw_adag_sigma1 is <a^+ sigma_1>.
std::complex<double> expectation(const OperatorSet& ops, const DensityMatrix& rho, Observable o);

// Population on the highest Fock level, where truncation distorts a and a^+.
double top_fock_population(const HilbertSpace& space, const DensityMatrix& rho);

struct DecayFit {
    double rate = 0.0;
    double residual = 0.0;  // RMS of log|value| about the fitted line
    bool non_exponential = false;
};

// Least-squares slope of log|value| against t, negated. Needs at least 10
// samples with nonzero values; throws DomainError otherwise.
DecayFit fit_decay_rate(std::span<const double> t, std::span<const double> values);
DecayFit fit_decay_rate(std::span<const double> t, std::span<const std::complex<double>> values);

struct CorRates {
    double phi_rate = 0.0;
    double s_rate = 0.0;
    double ratio = 0.0;  // s_rate / phi_rate = 2N / (N - 1)
};

// (gamma_cor (N-1)/(2N), gamma_cor, 2N/(N-1)). Throws DomainError for N < 2.
CorRates analytic_cor_rates(double n_mol, double gamma_cor);

struct VerificationRow {
    std::string dissipator;
    std::string observable;
    double fitted_rate = 0.0;
    double analytic_rate = 0.0;
    double rel_err = 0.0;
    bool passed = false;
};

struct VerificationReport {
    Channel channel = Channel::cavity;
    double rate = 0.0;
    int n_max = 0;
    double tolerance = 5e-3;
    std::vector<VerificationRow> rows;
    std::vector<std::string> warnings;

    bool passed() const;
    // Fitted rate of `observable`, or NaN when absent.
    double fitted(std::string_view observable) const;
    std::string summary() const;
};

// Rate of `which` taken from p (gamma_a, gamma_ph, gamma_d, gamma_p or
// gamma_cor); every other rate and the coupling are switched off. Each
// relevant observable is evolved from a state where it is nonzero, sampled
// at 50 points on [0, 2/rate] and fitted. Dephasing and correlation add a
// "ratio" row: fitted sigma1_dag_sigma2 rate over a_dag_sigma1 rate.
VerificationReport verify_dissipator(const model::ModelParams& p, Channel which, int n_max = 3);

// The rate field of p that drives `which`.
double channel_rate(const model::ModelParams& p, Channel which);

}  // namespace eplab::oracle
