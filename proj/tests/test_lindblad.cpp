#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "eplab/errors.hpp"
#include "eplab/oracle/lindblad.hpp"
#include "generators.hpp"

using namespace eplab;
using namespace eplab::oracle;
using cd = std::complex<double>;
using doctest::Approx;

namespace {

DensityMatrix random_state(std::mt19937_64& g, int dim)
{
    CMatrix m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = cd(gen::uniform(g, -1, 1), gen::uniform(g, -1, 1));
    CMatrix rho = m * m.adjoint();
    rho /= rho.trace();
    return DensityMatrix(rho);
}

DensityMatrix ket(const HilbertSpace& s, std::initializer_list<std::pair<std::array<int, 3>, cd>> terms)
{
    CVector psi = CVector::Zero(s.dim());
    for (const auto& [idx, amp] : terms) psi(s.index(idx[0], idx[1], idx[2])) += amp;
    return DensityMatrix::from_ket(psi);
}

model::ModelParams all_rates(std::mt19937_64& g)
{
    model::ModelParams p;
    p.gamma_a = gen::log_uniform(g, 1e-4, 1e-2);
    p.gamma_ph = gen::log_uniform(g, 1e-4, 1e-2);
    p.gamma_d = gen::log_uniform(g, 1e-4, 1e-2);
    p.gamma_p = gen::log_uniform(g, 1e-4, 1e-2);
    p.gamma_cor = gen::log_uniform(g, 1e-4, 1e-2);
    p.omega_r = gen::log_uniform(g, 1e-4, 1e-2);
    p.n_mol = 2.0;
    return p;
}

// Heisenberg-picture action of the generator on operator x, read off the
// Liouvillian through tr(x L(rho)) = tr(L^+(x) rho).
CMatrix adjoint_action(const Liouvillian& l, const CMatrix& x)
{
    const CMatrix xt = x.transpose();
    const CVector v = Eigen::Map<const CVector>(xt.data(), xt.size());
    const CVector w = l.matrix.transpose() * v;
    return Eigen::Map<const CMatrix>(w.data(), l.dim, l.dim).transpose();
}

}  // namespace

TEST_CASE("Hilbert space")
{
    CHECK(HilbertSpace(1).dim() == 8);
    CHECK(HilbertSpace(3).dim() == 16);
    CHECK_THROWS_AS(HilbertSpace(0), DomainError);
    const HilbertSpace s(2);
    CHECK(s.index(0, 0, 0) == 0);
    CHECK(s.index(0, 0, 2) == 2);
    CHECK(s.index(0, 1, 0) == 3);
    CHECK(s.index(1, 1, 2) == 11);
}

TEST_CASE("operator algebra")
{
    const HilbertSpace s(3);
    const auto ops = OperatorSet::build(s);
    const CMatrix comm = ops.a * ops.a_dag - ops.a_dag * ops.a;
    for (int m1 = 0; m1 < 2; ++m1)
        for (int m2 = 0; m2 < 2; ++m2)
            for (int k = 0; k < s.n_max(); ++k) {
                const int i = s.index(m1, m2, k);
                CHECK(std::abs(comm(i, i) - cd(1.0)) <= 1e-15);
            }
    CHECK((comm - CMatrix(comm.diagonal().asDiagonal())).norm() == 0.0);

    for (int j = 0; j < kMolecules; ++j) {
        CHECK((ops.inversion[j] * ops.inversion[j] - ops.identity).norm() <= 1e-15);
        CHECK((ops.sigma[j] * ops.sigma[j]).norm() == 0.0);
        CHECK((ops.sigma_dag[j] - ops.sigma[j].adjoint()).norm() == 0.0);
    }
    const CMatrix diff = ops.inversion[0] - ops.inversion[1];
    CHECK((diff * diff - 2.0 * (ops.identity - ops.inversion[0] * ops.inversion[1])).norm() <= 1e-15);
    CHECK((ops.sigma[0] * ops.sigma[1] - ops.sigma[1] * ops.sigma[0]).norm() == 0.0);
    CHECK((ops.a * ops.sigma[0] - ops.sigma[0] * ops.a).norm() == 0.0);

    const CMatrix h = ops.hamiltonian(0.3);
    CHECK((h - h.adjoint()).norm() == 0.0);
}

TEST_CASE("Hamiltonian evolution is unitary")
{
    const HilbertSpace s(3);
    const auto ops = OperatorSet::build(s);
    model::ModelParams p;
    p.omega_r = 2e-2;
    const auto l = build_liouvillian(s, ops, p, DissipatorSpec::none());
    const auto rho0 = ket(s, {{{1, 0, 0}, 1.0}, {{0, 0, 2}, cd(0.0, 0.5)}});
    for (double t : {10.0, 100.0, 1000.0}) {
        const auto rho = evolve(l, rho0, t);
        CHECK(rho.trace_error() <= 1e-12);
        CHECK(std::abs((rho.matrix() * rho.matrix()).trace() - cd(1.0)) <= 1e-10);
    }
}

TEST_CASE("vacuum Rabi oscillation of one excitation")
{
    const HilbertSpace s(2);
    const auto ops = OperatorSet::build(s);
    model::ModelParams p;
    p.omega_r = 1e-2;
    const auto l = build_liouvillian(s, ops, p, DissipatorSpec::none());
    const auto rho0 = ket(s, {{{0, 0, 1}, 1.0}});
    // The photon couples to the symmetric excitation at sqrt(2) omega_r.
    const double w = std::sqrt(2.0) * p.omega_r;
    for (double t : {20.0, 55.0, 111.0}) {
        const auto rho = evolve(l, rho0, t);
        const double photons = (expectation(ops, rho, Observable::n) * 2.0).real();
        CHECK(photons == Approx(std::cos(w * t) * std::cos(w * t)).epsilon(1e-10));
    }
}

TEST_CASE("cavity loss empties the mode at twice gamma_a")
{
    const HilbertSpace s(3);
    const auto ops = OperatorSet::build(s);
    model::ModelParams p;
    p.gamma_a = 3e-3;
    const auto l = build_liouvillian(s, ops, p, DissipatorSpec::only(Channel::cavity));
    const auto rho0 = ket(s, {{{0, 0, 2}, 1.0}});
    for (double t : {0.0, 50.0, 200.0, 700.0}) {
        const auto rho = evolve(l, rho0, t);
        const double photons = (ops.a_dag * ops.a * rho.matrix()).trace().real();
        CHECK(photons == Approx(2.0 * std::exp(-2.0 * p.gamma_a * t)).epsilon(1e-10));
    }
}

TEST_CASE("correlation dissipator leaves populations unchanged")
{
    auto g = gen::rng(41);
    const HilbertSpace s(2);
    const auto ops = OperatorSet::build(s);
    model::ModelParams p;
    p.gamma_cor = 5e-3;
    const auto l = build_liouvillian(s, ops, p, DissipatorSpec::only(Channel::correlation));
    for (int i = 0; i < 5; ++i) {
        const auto rho0 = random_state(g, s.dim());
        const auto rho = evolve(l, rho0, 400.0);
        CHECK((rho.matrix().diagonal() - rho0.matrix().diagonal()).norm() <= 1e-12);
        CHECK((rho.matrix() - rho0.matrix()).norm() > 1e-3);
    }
}

TEST_CASE("evolution at t = 0 and the semigroup property")
{
    auto g = gen::rng(42);
    const HilbertSpace s(2);
    const auto ops = OperatorSet::build(s);
    const auto p = all_rates(g);
    const auto l = build_liouvillian(s, ops, p, DissipatorSpec::all());
    const auto rho0 = random_state(g, s.dim());
    CHECK(evolve(l, rho0, 0.0).matrix() == rho0.matrix());
    const auto two = evolve(l, evolve(l, rho0, 30.0), 45.0);
    const auto one = evolve(l, rho0, 75.0);
    CHECK((two.matrix() - one.matrix()).norm() <= 1e-12);

    const auto series = evolve_series(l, rho0, 15.0, 5);
    REQUIRE(series.size() == 6);
    CHECK((series.back().matrix() - one.matrix()).norm() <= 1e-12);
}

TEST_CASE("density-matrix invariants under the full generator")
{
    auto g = gen::rng(43);
    for (int i = 0; i < 30; ++i) {
        const HilbertSpace s(1 + i % 3);
        const auto ops = OperatorSet::build(s);
        const auto p = all_rates(g);
        const auto l = build_liouvillian(s, ops, p, DissipatorSpec::all());
        const double t = gen::log_uniform(g, 1.0, 1e3);
        CVector psi(s.dim());
        for (int k = 0; k < s.dim(); ++k) psi(k) = cd(gen::uniform(g, -1, 1), gen::uniform(g, -1, 1));
        for (const auto& rho0 : {random_state(g, s.dim()), DensityMatrix::from_ket(psi)}) {
            const auto rho = evolve(l, rho0, t);
            CHECK(rho.trace_error() <= 1e-10);
            CHECK(rho.hermiticity_error() <= 1e-10);
            CHECK(rho.min_eigenvalue() >= -1e-10);
        }
    }
}

TEST_CASE("expectation values")
{
    const HilbertSpace s(2);
    const auto ops = OperatorSet::build(s);

    const auto excited = ket(s, {{{1, 1, 0}, 1.0}});
    CHECK(expectation(ops, excited, Observable::d) == cd(1.0));
    CHECK(expectation(ops, excited, Observable::n) == cd(0.0));

    const auto photon = ket(s, {{{0, 0, 1}, 1.0}});
    CHECK(expectation(ops, photon, Observable::n).real() == Approx(0.5).epsilon(1e-15));
    CHECK(expectation(ops, photon, Observable::d).real() == Approx(-1.0).epsilon(1e-15));

    const auto coherence = ket(s, {{{0, 0, 1}, 1.0}, {{1, 0, 0}, cd(0.0, 1.0)}});
    CHECK(std::abs(expectation(ops, coherence, Observable::raw_adag_sigma1) - cd(0.0, 0.5)) <= 1e-15);
    CHECK(expectation(ops, coherence, Observable::phi).real() ==
          Approx(1.0 / std::pow(2.0, 2.5)).epsilon(1e-14));
    CHECK(std::abs(expectation(ops, coherence, Observable::phi).imag()) <= 1e-15);

    const auto symmetric = ket(s, {{{1, 0, 0}, 1.0}, {{0, 1, 0}, 1.0}});
    CHECK(std::abs(expectation(ops, symmetric, Observable::raw_sigma12) - cd(0.5)) <= 1e-15);
    CHECK(std::abs(expectation(ops, symmetric, Observable::s) - cd(0.5)) <= 1e-15);
    CHECK(std::abs(expectation(ops, symmetric, Observable::d)) <= 1e-15);

    CHECK(top_fock_population(s, ket(s, {{{0, 1, 2}, 1.0}})) == Approx(1.0));
    CHECK(top_fock_population(s, symmetric) == 0.0);
    CHECK(std::string(to_string(Observable::raw_sigma12)) == "sigma1_dag_sigma2");
}

TEST_CASE("decay fit")
{
    std::vector<double> t(50), v(50), c(50, 0.7);
    for (int i = 0; i < 50; ++i) {
        t[i] = 0.05 * i;
        v[i] = 4.0 * std::exp(-3.0 * t[i]);
    }
    const auto fit = fit_decay_rate(t, v);
    CHECK(fit.rate == Approx(3.0).epsilon(1e-10));
    CHECK(!fit.non_exponential);
    CHECK(std::abs(fit_decay_rate(t, c).rate) <= 1e-14);

    std::vector<double> bumpy(50);
    for (int i = 0; i < 50; ++i) bumpy[i] = std::exp(-3.0 * t[i]) + 0.5 * std::exp(-0.1 * t[i]);
    CHECK(fit_decay_rate(t, bumpy).non_exponential);

    const std::vector<double> few_t(9, 1.0), few_v(9, 1.0);
    CHECK_THROWS_AS(fit_decay_rate(few_t, few_v), DomainError);
    auto zero = v;
    zero[3] = 0.0;
    CHECK_THROWS_AS(fit_decay_rate(t, zero), DomainError);
    const std::vector<double> short_v(49, 1.0);
    CHECK_THROWS_AS(fit_decay_rate(t, short_v), DomainError);
}

TEST_CASE("analytic correlation rates")
{
    const auto two = analytic_cor_rates(2.0, 1e-3);
    CHECK(two.phi_rate == Approx(2.5e-4).epsilon(1e-15));
    CHECK(two.s_rate == 1e-3);
    CHECK(two.ratio == 4.0);
    const auto big = analytic_cor_rates(1e6, 1e-3);
    CHECK(big.ratio == Approx(2.0).epsilon(1e-5));
    CHECK(big.s_rate / big.phi_rate == Approx(big.ratio).epsilon(1e-14));
    const auto none = analytic_cor_rates(10.0, 0.0);
    CHECK(none.phi_rate == 0.0);
    CHECK(none.s_rate == 0.0);
    CHECK_THROWS_AS(analytic_cor_rates(1.0, 1e-3), DomainError);
}

TEST_CASE("coherences are eigen-operators of the adjoint dissipators")
{
    const HilbertSpace s(3);
    const auto ops = OperatorSet::build(s);
    const CMatrix adag_sigma1 = ops.a_dag * ops.sigma[0];
    const CMatrix sigma12 = ops.sigma_dag[0] * ops.sigma[1];
    const double g = 2e-3;

    struct Case {
        Channel channel;
        double adag_sigma1_rate;
        double sigma12_rate;
    };
    for (const auto& c : {Case{Channel::dephasing, g, 2.0 * g}, Case{Channel::decay, g / 2.0, g},
                          Case{Channel::pump, g / 2.0, g},
                          Case{Channel::correlation, g / 4.0, g}}) {
        model::ModelParams p;
        p.gamma_ph = p.gamma_d = p.gamma_p = p.gamma_cor = g;
        const auto l = build_liouvillian(s, ops, p, DissipatorSpec::only(c.channel));
        CHECK((adjoint_action(l, adag_sigma1) + c.adag_sigma1_rate * adag_sigma1).norm() <= 1e-16);
        CHECK((adjoint_action(l, sigma12) + c.sigma12_rate * sigma12).norm() <= 1e-16);
    }
}

TEST_CASE("verify_dissipator recovers every rate")
{
    for (auto ch : {Channel::cavity, Channel::dephasing, Channel::decay, Channel::pump,
                    Channel::correlation}) {
        for (double rate : {1e-4, 1e-3, 1e-2}) {
            for (int n_max : {1, 2, 3}) {
                model::ModelParams p;
                p.gamma_a = p.gamma_ph = p.gamma_d = p.gamma_p = p.gamma_cor = rate;
                p.omega_r = 1e-2;
                const auto rep = verify_dissipator(p, ch, n_max);
                CAPTURE(rep.summary());
                CHECK(rep.passed());
                for (const auto& row : rep.rows) CHECK(row.rel_err <= 5e-3);
                if (ch == Channel::correlation) {
                    CHECK(rep.fitted("ratio") == Approx(4.0).epsilon(1e-3));
                    CHECK(rep.fitted("a_dag_sigma1") == Approx(rate / 4.0).epsilon(1e-3));
                    CHECK(rep.fitted("sigma1_dag_sigma2") == Approx(rate).epsilon(1e-3));
                }
                if (ch == Channel::dephasing)
                    CHECK(rep.fitted("ratio") == Approx(2.0).epsilon(1e-3));
            }
        }
    }
}

TEST_CASE("verify_dissipator reports")
{
    model::ModelParams p;
    p.gamma_a = 1e-3;
    const auto rep = verify_dissipator(p, Channel::cavity, 1);
    CHECK(rep.n_max == 1);
    CHECK(rep.rate == 1e-3);
    CHECK(rep.fitted("n") == Approx(2e-3).epsilon(1e-6));
    CHECK(std::isnan(rep.fitted("missing")));
    CHECK(!rep.warnings.empty());
    CHECK(rep.summary().find("PASS") != std::string::npos);
    CHECK_THROWS_AS(verify_dissipator(p, Channel::decay), DomainError);
    CHECK(channel_rate(p, Channel::cavity) == 1e-3);
}

TEST_CASE("channel names")
{
    CHECK(parse_channel("cavity") == Channel::cavity);
    CHECK(parse_channel("ph") == Channel::dephasing);
    CHECK(parse_channel("dephasing") == Channel::dephasing);
    CHECK(parse_channel("decay") == Channel::decay);
    CHECK(parse_channel("pump") == Channel::pump);
    CHECK(parse_channel("cor") == Channel::correlation);
    CHECK(parse_channel("correlation") == Channel::correlation);
    CHECK_THROWS_AS(parse_channel("Cavity"), DomainError);
    CHECK_THROWS_AS(parse_channel(""), DomainError);
    for (auto c : {Channel::cavity, Channel::dephasing, Channel::decay, Channel::pump,
                   Channel::correlation})
        CHECK(parse_channel(to_string(c)) == c);
}

TEST_CASE("density matrix validation")
{
    CHECK_THROWS_AS(DensityMatrix().validate(), DomainError);
    CMatrix a = CMatrix::Identity(2, 2) / 2.0;
    CHECK_NOTHROW(DensityMatrix(a).validate());
    CMatrix skew = a;
    skew(0, 1) = 0.1;
    CHECK_THROWS_AS(DensityMatrix(skew).validate(), DomainError);
    CHECK_THROWS_AS(DensityMatrix(CMatrix(CMatrix::Identity(2, 2))).validate(), DomainError);
    CMatrix neg = CMatrix::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    CHECK_THROWS_AS(DensityMatrix(neg).validate(), DomainError);
}

TEST_CASE("a non-physical generator is caught")
{
    const HilbertSpace s(1);
    const auto ops = OperatorSet::build(s);
    model::ModelParams p;
    p.gamma_d = -1e-2;
    const auto l = build_liouvillian(s, ops, p, DissipatorSpec::only(Channel::decay));
    CHECK_THROWS_AS(evolve(l, ket(s, {{{1, 1, 0}, 1.0}}), 100.0), PositivityError);
    CHECK_THROWS_AS(evolve(l, DensityMatrix(CMatrix::Identity(3, 3) / 3.0), 1.0), DomainError);
}
