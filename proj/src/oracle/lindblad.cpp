#include "eplab/oracle/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "eplab/errors.hpp"
#include "eplab/format.hpp"

namespace eplab::oracle {

using cd = std::complex<double>;

HilbertSpace::HilbertSpace(int n_max) : n_max_(n_max)
{
    if (n_max < 1)
        throw DomainError("Fock cutoff n_max must be >= 1");
}

int HilbertSpace::index(int m1, int m2, int photons) const
{
    return (m1 * 2 + m2) * (n_max_ + 1) + photons;
}

OperatorSet OperatorSet::build(const HilbertSpace& space)
{
    const int nf = space.n_max() + 1;
    CMatrix a_fock = CMatrix::Zero(nf, nf);
    for (int k = 1; k < nf; ++k) a_fock(k - 1, k) = std::sqrt(static_cast<double>(k));

    CMatrix lower = CMatrix::Zero(2, 2);  // |g><e| with g = 0, e = 1
    lower(0, 1) = 1.0;
    const CMatrix id2 = CMatrix::Identity(2, 2);
    const CMatrix idf = CMatrix::Identity(nf, nf);

    OperatorSet ops;
    ops.identity = CMatrix::Identity(space.dim(), space.dim());
    ops.a = Eigen::kroneckerProduct(id2, Eigen::kroneckerProduct(id2, a_fock)).eval();
    ops.a_dag = ops.a.adjoint();
    ops.sigma[0] = Eigen::kroneckerProduct(lower, Eigen::kroneckerProduct(id2, idf)).eval();
    ops.sigma[1] = Eigen::kroneckerProduct(id2, Eigen::kroneckerProduct(lower, idf)).eval();
    for (int j = 0; j < kMolecules; ++j) {
        ops.sigma_dag[j] = ops.sigma[j].adjoint();
        ops.inversion[j] = ops.sigma_dag[j] * ops.sigma[j] - ops.sigma[j] * ops.sigma_dag[j];
    }
    return ops;
}

CMatrix OperatorSet::hamiltonian(double omega_r) const
{
    CMatrix h = CMatrix::Zero(identity.rows(), identity.cols());
    for (int j = 0; j < kMolecules; ++j) h += a_dag * sigma[j] + a * sigma_dag[j];
    return omega_r * h;
}

DensityMatrix DensityMatrix::from_ket(const CVector& psi)
{
    const CVector v = psi / psi.norm();
    return DensityMatrix(v * v.adjoint());
}

double DensityMatrix::trace_error() const { return std::abs(rho_.trace() - cd(1.0)); }

double DensityMatrix::hermiticity_error() const { return (rho_ - rho_.adjoint()).norm(); }

double DensityMatrix::min_eigenvalue() const
{
    const CMatrix herm = (rho_ + rho_.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

void DensityMatrix::validate() const
{
    if (rho_.rows() == 0 || rho_.rows() != rho_.cols())
        throw DomainError("density matrix must be square and non-empty");
    if (hermiticity_error() > 1e-12)
        throw DomainError("density matrix is not Hermitian");
    if (trace_error() > 1e-12)
        throw DomainError("density matrix trace differs from 1");
    if (min_eigenvalue() < -1e-10)
        throw DomainError("density matrix has a negative eigenvalue");
}

const char* to_string(Channel c)
{
    switch (c) {
    case Channel::cavity: return "cavity";
    case Channel::dephasing: return "ph";
    case Channel::decay: return "decay";
    case Channel::pump: return "pump";
    case Channel::correlation: return "cor";
    }
    return "?";
}

Channel parse_channel(std::string_view name)
{
    if (name == "cavity") return Channel::cavity;
    if (name == "ph" || name == "dephasing") return Channel::dephasing;
    if (name == "decay") return Channel::decay;
    if (name == "pump") return Channel::pump;
    if (name == "cor" || name == "correlation") return Channel::correlation;
    throw DomainError("unknown dissipator '" + std::string(name) +
                      "' (expected cavity, ph, decay, pump or cor)");
}

DissipatorSpec DissipatorSpec::all()
{
    return {{Channel::cavity, Channel::dephasing, Channel::decay, Channel::pump,
             Channel::correlation},
            true};
}

DissipatorSpec DissipatorSpec::none() { return {{}, true}; }

DissipatorSpec DissipatorSpec::only(Channel c) { return {{c}, false}; }

bool DissipatorSpec::has(Channel c) const
{
    return std::find(channels.begin(), channels.end(), c) != channels.end();
}

namespace {

// Superoperators on column-stacked vec(rho): vec(A X B) = (B^T kron A) vec(X).
CMatrix left(const CMatrix& a, const CMatrix& id) { return Eigen::kroneckerProduct(id, a).eval(); }
CMatrix right(const CMatrix& b, const CMatrix& id)
{
    return Eigen::kroneckerProduct(b.transpose(), id).eval();
}
CMatrix sandwich(const CMatrix& a, const CMatrix& b)
{
    return Eigen::kroneckerProduct(b.transpose(), a).eval();
}

// rate * (L rho L^+ - {L^+ L, rho}/2)
CMatrix lindblad_term(const CMatrix& jump, double rate, const CMatrix& id)
{
    const CMatrix jj = jump.adjoint() * jump;
    return rate * (sandwich(jump, jump.adjoint()) - 0.5 * left(jj, id) - 0.5 * right(jj, id));
}

CVector vec(const CMatrix& m) { return Eigen::Map<const CVector>(m.data(), m.size()); }

CMatrix unvec(const CVector& v, int dim) { return Eigen::Map<const CMatrix>(v.data(), dim, dim); }

DensityMatrix checked(CMatrix rho)
{
    DensityMatrix out(std::move(rho));
    const double lo = out.min_eigenvalue();
    if (lo < -1e-8)
        throw PositivityError("evolved density matrix has eigenvalue " + format_double(lo) +
                              " (trace error " + format_double(out.trace_error()) +
                              ", hermiticity error " + format_double(out.hermiticity_error()) +
                              ")");
    return out;
}

}  // namespace

Liouvillian build_liouvillian(const HilbertSpace& space, const OperatorSet& ops,
                              const model::ModelParams& p, const DissipatorSpec& spec)
{
    const int dim = space.dim();
    if (ops.identity.rows() != dim)
        throw DomainError("operator set does not match the Hilbert space");

    const CMatrix& id = ops.identity;
    Liouvillian l;
    l.dim = dim;
    l.matrix = CMatrix::Zero(dim * dim, dim * dim);

    if (spec.hamiltonian && p.omega_r != 0.0) {
        const CMatrix h = ops.hamiltonian(p.omega_r);
        l.matrix += cd(0.0, -1.0) * (left(h, id) - right(h, id));
    }
    if (spec.has(Channel::cavity))
        l.matrix += lindblad_term(ops.a, 2.0 * p.gamma_a, id);
    for (int j = 0; j < kMolecules; ++j) {
        if (spec.has(Channel::dephasing))
            l.matrix += lindblad_term(ops.inversion[j], p.gamma_ph / 2.0, id);
        if (spec.has(Channel::decay))
            l.matrix += lindblad_term(ops.sigma[j], p.gamma_d, id);
        if (spec.has(Channel::pump))
            l.matrix += lindblad_term(ops.sigma_dag[j], p.gamma_p, id);
    }
    if (spec.has(Channel::correlation)) {
        const double pref = p.gamma_cor / (4.0 * kMolecules);
        for (int i = 0; i < kMolecules; ++i) {
            for (int j = i + 1; j < kMolecules; ++j) {
                const CMatrix diff = ops.inversion[i] - ops.inversion[j];
                const CMatrix anti = id - ops.inversion[i] * ops.inversion[j];
                l.matrix += pref * (sandwich(diff, diff) - left(anti, id) - right(anti, id));
            }
        }
    }
    return l;
}

DensityMatrix evolve(const Liouvillian& l, const DensityMatrix& rho0, double t)
{
    if (rho0.dim() != l.dim)
        throw DomainError("density matrix does not match the Liouvillian");
    if (t == 0.0)
        return rho0;
    const CMatrix prop = (l.matrix * t).exp();
    return checked(unvec(prop * vec(rho0.matrix()), l.dim));
}

Propagator::Propagator(const Liouvillian& l, double dt)
    : step_((l.matrix * dt).exp()), dim_(l.dim), dt_(dt)
{
}

DensityMatrix Propagator::apply(const DensityMatrix& rho) const
{
    if (rho.dim() != dim_)
        throw DomainError("density matrix does not match the propagator");
    return checked(unvec(step_ * vec(rho.matrix()), dim_));
}

std::vector<DensityMatrix> evolve_series(const Liouvillian& l, const DensityMatrix& rho0,
                                         double dt, std::size_t count)
{
    const Propagator prop(l, dt);
    std::vector<DensityMatrix> out;
    out.reserve(count + 1);
    out.push_back(rho0);
    for (std::size_t k = 0; k < count; ++k) out.push_back(prop.apply(out.back()));
    return out;
}

const char* to_string(Observable o)
{
    switch (o) {
    case Observable::n: return "n";
    case Observable::d: return "D";
    case Observable::phi: return "phi";
    case Observable::s: return "s";
    case Observable::raw_sigma12: return "sigma1_dag_sigma2";
    case Observable::raw_adag_sigma1: return "a_dag_sigma1";
    }
    return "?";
}

std::complex<double> expectation(const OperatorSet& ops, const DensityMatrix& rho, Observable o)
{
    const CMatrix& r = rho.matrix();
    auto tr = [&](const CMatrix& op) { return (r * op).trace(); };
    const double n = kMolecules;

    switch (o) {
    case Observable::n:
        return tr(ops.a_dag * ops.a) / n;
    case Observable::d: {
        cd sum = 0.0;
        for (int j = 0; j < kMolecules; ++j) sum += tr(ops.inversion[j]);
        return sum / n;
    }
    case Observable::phi: {
        CMatrix sum_lower = CMatrix::Zero(r.rows(), r.cols());
        for (int j = 0; j < kMolecules; ++j) sum_lower += ops.sigma[j];
        const CMatrix op = ops.a * sum_lower.adjoint() - ops.a_dag * sum_lower;
        return cd(0.0, 1.0) / (2.0 * std::pow(n, 1.5)) * tr(op);
    }
    case Observable::s: {
        cd sum = 0.0;
        for (int i = 0; i < kMolecules; ++i)
            for (int j = 0; j < kMolecules; ++j)
                if (i != j)
                    sum += tr(ops.sigma_dag[i] * ops.sigma[j]);
        return sum / (n * (n - 1.0));
    }
    case Observable::raw_sigma12:
        return tr(ops.sigma_dag[0] * ops.sigma[1]);
    case Observable::raw_adag_sigma1:
        return tr(ops.a_dag * ops.sigma[0]);
    }
    return 0.0;
}

double top_fock_population(const HilbertSpace& space, const DensityMatrix& rho)
{
    double pop = 0.0;
    for (int m1 = 0; m1 < 2; ++m1)
        for (int m2 = 0; m2 < 2; ++m2) {
            const int k = space.index(m1, m2, space.n_max());
            pop += rho.matrix()(k, k).real();
        }
    return pop;
}

DecayFit fit_decay_rate(std::span<const double> t, std::span<const double> values)
{
    if (t.size() != values.size())
        throw DomainError("decay fit: time and value series differ in length");
    if (t.size() < 10)
        throw DomainError("decay fit: need at least 10 samples");

    const std::size_t n = t.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(std::abs(values[i]) > 0.0) || !std::isfinite(values[i]))
            throw DomainError("decay fit: values must be finite and nonzero");
        y[i] = std::log(std::abs(values[i]));
    }

    double tm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        tm += t[i];
        ym += y[i];
    }
    tm /= static_cast<double>(n);
    ym /= static_cast<double>(n);
    double stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        stt += (t[i] - tm) * (t[i] - tm);
        sty += (t[i] - tm) * (y[i] - ym);
    }
    if (stt == 0.0)
        throw DomainError("decay fit: sample times are all equal");
    const double slope = sty / stt;

    double ss = 0.0;
    const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (ym + slope * (t[i] - tm));
        ss += r * r;
    }
    DecayFit fit;
    fit.rate = -slope;
    fit.residual = std::sqrt(ss / static_cast<double>(n));
    fit.non_exponential = fit.residual > 1e-6 * (*ymax - *ymin);
    return fit;
}

DecayFit fit_decay_rate(std::span<const double> t, std::span<const std::complex<double>> values)
{
    std::vector<double> mag(values.size());
    std::transform(values.begin(), values.end(), mag.begin(),
                   [](const cd& v) { return std::abs(v); });
    return fit_decay_rate(t, std::span<const double>(mag));
}

CorRates analytic_cor_rates(double n_mol, double gamma_cor)
{
    if (!(n_mol >= 2.0))
        throw DomainError("analytic correlation rates need N >= 2");
    return {gamma_cor * (n_mol - 1.0) / (2.0 * n_mol), gamma_cor, 2.0 * n_mol / (n_mol - 1.0)};
}

double channel_rate(const model::ModelParams& p, Channel which)
{
    switch (which) {
    case Channel::cavity: return p.gamma_a;
    case Channel::dephasing: return p.gamma_ph;
    case Channel::decay: return p.gamma_d;
    case Channel::pump: return p.gamma_p;
    case Channel::correlation: return p.gamma_cor;
    }
    return 0.0;
}

bool VerificationReport::passed() const
{
    return !rows.empty() &&
           std::all_of(rows.begin(), rows.end(), [](const VerificationRow& r) { return r.passed; });
}

double VerificationReport::fitted(std::string_view observable) const
{
    for (const auto& r : rows)
        if (r.observable == observable)
            return r.fitted_rate;
    return std::numeric_limits<double>::quiet_NaN();
}

std::string VerificationReport::summary() const
{
    std::ostringstream os;
    os << "dissipator " << to_string(channel) << ", rate " << format_double(rate)
       << ", n_max " << n_max << '\n';
    for (const auto& r : rows) {
        os << "  " << r.observable << ": fitted " << format_double(r.fitted_rate)
           << ", expected " << format_double(r.analytic_rate) << ", rel err "
           << format_double(r.rel_err) << (r.passed ? "  ok" : "  MISMATCH") << '\n';
    }
    for (const auto& w : warnings) os << "  warning: " << w << '\n';
    os << (passed() ? "PASS" : "FAIL") << '\n';
    return os.str();
}

namespace {

struct Probe {
    std::string label;
    double expected;
    DensityMatrix initial;
    // Value whose magnitude should decay exponentially.
    std::complex<double> (*measure)(const OperatorSet&, const DensityMatrix&);
};

DensityMatrix basis_state(const HilbertSpace& s, int m1, int m2, int photons)
{
    CVector psi = CVector::Zero(s.dim());
    psi(s.index(m1, m2, photons)) = 1.0;
    return DensityMatrix::from_ket(psi);
}

DensityMatrix superposition(const HilbertSpace& s, std::array<int, 3> u, std::array<int, 3> v)
{
    CVector psi = CVector::Zero(s.dim());
    psi(s.index(u[0], u[1], u[2])) = 1.0;
    psi(s.index(v[0], v[1], v[2])) = 1.0;
    return DensityMatrix::from_ket(psi);
}

}  // namespace

VerificationReport verify_dissipator(const model::ModelParams& p, Channel which, int n_max)
{
    const double rate = channel_rate(p, which);
    if (!(rate > 0.0))
        throw DomainError(std::string("verify: rate for dissipator '") + to_string(which) +
                          "' must be positive");

    const HilbertSpace space(n_max);
    const auto ops = OperatorSet::build(space);

    model::ModelParams iso;
    iso.n_mol = 2.0;
    switch (which) {
    case Channel::cavity: iso.gamma_a = rate; break;
    case Channel::dephasing: iso.gamma_ph = rate; break;
    case Channel::decay: iso.gamma_d = rate; break;
    case Channel::pump: iso.gamma_p = rate; break;
    case Channel::correlation: iso.gamma_cor = rate; break;
    }
    const auto l = build_liouvillian(space, ops, iso, DissipatorSpec::only(which));

    // (|g,g,1> + |e,g,0>)/sqrt2 carries <a^+ sigma_1> = 1/2;
    // (|e,g,0> + |g,e,0>)/sqrt2 carries <sigma_1^+ sigma_2> = 1/2.
    const auto coherence = superposition(space, {0, 0, 1}, {1, 0, 0});
    const auto symmetric = superposition(space, {1, 0, 0}, {0, 1, 0});
    auto adag_sigma1 = [](const OperatorSet& o, const DensityMatrix& r) {
        return expectation(o, r, Observable::raw_adag_sigma1);
    };
    auto sigma12 = [](const OperatorSet& o, const DensityMatrix& r) {
        return expectation(o, r, Observable::raw_sigma12);
    };

    std::vector<Probe> probes;
    switch (which) {
    case Channel::cavity:
        probes.push_back({"n", 2.0 * rate, basis_state(space, 0, 0, 1),
                          [](const OperatorSet& o, const DensityMatrix& r) {
                              return expectation(o, r, Observable::n);
                          }});
        probes.push_back({"a_dag_sigma1", rate, coherence, adag_sigma1});
        break;
    case Channel::dephasing:
        probes.push_back({"a_dag_sigma1", rate, coherence, adag_sigma1});
        probes.push_back({"sigma1_dag_sigma2", 2.0 * rate, symmetric, sigma12});
        break;
    case Channel::decay:
        probes.push_back({"a_dag_sigma1", rate / 2.0, coherence, adag_sigma1});
        probes.push_back({"sigma1_dag_sigma2", rate, symmetric, sigma12});
        probes.push_back({"1+D", rate, basis_state(space, 1, 1, 0),
                          [](const OperatorSet& o, const DensityMatrix& r) {
                              return 1.0 + expectation(o, r, Observable::d);
                          }});
        break;
    case Channel::pump:
        probes.push_back({"a_dag_sigma1", rate / 2.0, coherence, adag_sigma1});
        probes.push_back({"sigma1_dag_sigma2", rate, symmetric, sigma12});
        probes.push_back({"1-D", rate, basis_state(space, 0, 0, 0),
                          [](const OperatorSet& o, const DensityMatrix& r) {
                              return 1.0 - expectation(o, r, Observable::d);
                          }});
        break;
    case Channel::correlation: {
        const auto cor = analytic_cor_rates(2.0, rate);
        probes.push_back({"a_dag_sigma1", cor.phi_rate, coherence, adag_sigma1});
        probes.push_back({"sigma1_dag_sigma2", cor.s_rate, symmetric, sigma12});
        break;
    }
    }

    VerificationReport rep;
    rep.channel = which;
    rep.rate = rate;
    rep.n_max = n_max;

    constexpr std::size_t kSamples = 50;
    for (const auto& probe : probes) {
        if (top_fock_population(space, probe.initial) > 1e-14)
            rep.warnings.push_back(probe.label + ": initial state occupies the Fock cutoff n_max = " +
                                   std::to_string(n_max));
        const double horizon = 2.0 / probe.expected;
        const double dt = horizon / static_cast<double>(kSamples - 1);
        const auto states = evolve_series(l, probe.initial, dt, kSamples - 1);

        std::vector<double> times(kSamples);
        std::vector<std::complex<double>> values(kSamples);
        for (std::size_t k = 0; k < kSamples; ++k) {
            times[k] = dt * static_cast<double>(k);
            values[k] = probe.measure(ops, states[k]);
        }
        const auto fit = fit_decay_rate(times, values);
        if (fit.non_exponential)
            rep.warnings.push_back(probe.label + ": decay is not a single exponential (residual " +
                                   format_double(fit.residual) + ")");

        VerificationRow row;
        row.dissipator = to_string(which);
        row.observable = probe.label;
        row.fitted_rate = fit.rate;
        row.analytic_rate = probe.expected;
        row.rel_err = std::abs(fit.rate - probe.expected) / probe.expected;
        row.passed = row.rel_err <= rep.tolerance;
        rep.rows.push_back(row);
    }

    if (which == Channel::dephasing || which == Channel::correlation) {
        const double phi = rep.fitted("a_dag_sigma1");
        const double s = rep.fitted("sigma1_dag_sigma2");
        VerificationRow row;
        row.dissipator = to_string(which);
        row.observable = "ratio";
        row.fitted_rate = s / phi;
        row.analytic_rate = which == Channel::dephasing ? 2.0 : analytic_cor_rates(2.0, rate).ratio;
        row.rel_err = std::abs(row.fitted_rate - row.analytic_rate) / row.analytic_rate;
        row.passed = row.rel_err <= rep.tolerance;
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace eplab::oracle
