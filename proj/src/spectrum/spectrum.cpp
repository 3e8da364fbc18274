#include "eplab/spectrum/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include <Eigen/Dense>

#include "eplab/errors.hpp"
#include "eplab/format.hpp"

namespace eplab::spectrum {

using cd = std::complex<double>;

const char* to_string(PumpMode m)
{
    return m == PumpMode::coupled ? "coupled" : "frozen";
}

StabilityMatrix build_stability_matrix(const model::ModelParams& p, double d0, PumpMode mode)
{
    if (!(d0 >= -1.0) || !(d0 < 1.0))
        throw DomainError("stability matrix: d0 must lie in [-1, 1), got " + format_double(d0));

    StabilityMatrix out;
    out.params = mode == PumpMode::coupled ? model::with_d0(p, d0) : p;
    out.d0 = d0;
    out.mode = mode;

    const auto& q = out.params;
    const double sn = q.sqrt_n();
    const double g = sn * q.omega_r;
    const double gs = model::gamma_sigma(q);
    out.entries << -2.0 * q.gamma_a, 2.0 * g, 0.0,
                   g * d0, -(gs + q.gamma_a + q.gamma_cor / 4.0), (q.n_mol - 1.0) / sn * q.omega_r,
                   0.0, 2.0 * g * d0, -(2.0 * gs + q.gamma_cor);
    return out;
}

CubicCoeffs characteristic_coeffs(const Eigen::Matrix3d& m)
{
    const double minors = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) +
                          m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0) +
                          m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    return {-m.trace(), minors, -m.determinant()};
}

double normalized_discriminant(const Eigen::Matrix3d& m)
{
    const double scale = m.norm();
    if (scale == 0.0)
        return 0.0;
    return cubic_discriminant(characteristic_coeffs(Eigen::Matrix3d(m / scale)));
}

double overlap(const Eigen::Vector3cd& u, const Eigen::Vector3cd& v)
{
    const double nu = u.norm(), nv = v.norm();
    if (nu == 0.0 || nv == 0.0)
        return 0.0;
    return std::abs(u.dot(v)) / (nu * nv);  // Eigen's dot conjugates the first argument
}

namespace {

Eigen::Vector3cd cross(const Eigen::Vector3cd& a, const Eigen::Vector3cd& b)
{
    return {a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0)};
}

Eigen::Vector3cd fix_phase(Eigen::Vector3cd v)
{
    v.normalize();
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    const cd phase = v(k) / std::abs(v(k));
    v /= phase;
    v(k) = cd(v(k).real(), 0.0);
    return v;
}

std::optional<Eigen::Vector3cd> inverse_iteration(const Eigen::Matrix3cd& shifted_m,
                                                  double scale)
{
    // shifted_m = M - lambda I is (nearly) singular; perturb the shift so LU
    // stays finite.
    Eigen::Matrix3cd a = shifted_m;
    a.diagonal().array() += cd(scale * 1e-13, scale * 1e-13);
    Eigen::PartialPivLU<Eigen::Matrix3cd> lu(a);
    Eigen::Vector3cd v(1.0, 1.0, 1.0);
    for (int it = 0; it < 4; ++it) {
        v = lu.solve(v);
        const double n = v.norm();
        if (!(n > 0.0) || !std::isfinite(n))
            return std::nullopt;
        v /= n;
    }
    return v;
}

}  // namespace

Eigen::Vector3cd eigenvector_for(const Eigen::Matrix3d& m, cd lambda)
{
    const Eigen::Matrix3cd a = m.cast<cd>() - lambda * Eigen::Matrix3cd::Identity();
    const double scale = std::max(m.norm(), std::abs(lambda));

    Eigen::Vector3cd best;
    double best_norm = -1.0;
    const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (const auto& pr : pairs) {
        const Eigen::Vector3cd c = cross(a.row(pr[0]).transpose(), a.row(pr[1]).transpose());
        const double n = c.norm();
        if (n > best_norm) {
            best_norm = n;
            best = c;
        }
    }
    if (best_norm > 1e-14 * scale * scale)
        return fix_phase(best);

    if (scale == 0.0)
        throw RankDeficiencyError("eigenvector: zero matrix has no unique eigenvector");
    if (auto v = inverse_iteration(a, scale)) {
        const double residual = (a * *v).norm();
        if (residual <= 1e-10 * scale)
            return fix_phase(*v);
    }
    throw RankDeficiencyError("eigenvector: (M - lambda I) has rank below 2");
}

EigenSet eigen_set(const StabilityMatrix& m)
{
    EigenSet e;
    e.d0 = m.d0;
    const auto coeffs = characteristic_coeffs(m);
    e.lambdas = cubic_roots(coeffs);
    e.discriminant = cubic_discriminant(coeffs);
    for (int i = 0; i < 3; ++i) e.vectors[i] = eigenvector_for(m, e.lambdas[i]);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            e.overlaps(i, j) = i == j ? 1.0 : overlap(e.vectors[i], e.vectors[j]);
    e.defect_gap = std::min({std::abs(e.lambdas[0] - e.lambdas[1]),
                             std::abs(e.lambdas[0] - e.lambdas[2]),
                             std::abs(e.lambdas[1] - e.lambdas[2])});
    return e;
}

EigenSet spectrum_at(const model::ModelParams& p, double d0, PumpMode mode)
{
    return eigen_set(build_stability_matrix(p, d0, mode));
}

std::vector<EigenSet> sweep(const model::ModelParams& p, std::span<const double> d0_grid,
                            PumpMode mode)
{
    std::vector<EigenSet> out;
    out.reserve(d0_grid.size());
    for (double d0 : d0_grid) out.push_back(spectrum_at(p, d0, mode));
    return out;
}

std::vector<BranchRow> track_branches(std::span<const EigenSet> sets)
{
    std::vector<BranchRow> rows(sets.size());
    if (sets.empty())
        return rows;

    std::vector<std::size_t> order(sets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sets[a].d0 < sets[b].d0; });

    std::array<std::array<int, 3>, 6> perms{};
    {
        std::array<int, 3> p{0, 1, 2};
        int k = 0;
        do perms[k++] = p;
        while (std::next_permutation(p.begin(), p.end()));
    }

    auto fill = [&](std::size_t idx, const std::array<int, 3>& perm, bool ambiguous) {
        const EigenSet& e = sets[idx];
        BranchRow& r = rows[idx];
        r.d0 = e.d0;
        r.discriminant = e.discriminant;
        r.source_index = perm;
        r.ambiguous = ambiguous;
        for (int i = 0; i < 3; ++i) {
            r.lambdas[i] = e.lambdas[perm[i]];
            for (int j = 0; j < 3; ++j) r.overlaps(i, j) = e.overlaps(perm[i], perm[j]);
        }
    };

    fill(order[0], perms[0], false);
    for (std::size_t k = 1; k < order.size(); ++k) {
        const auto& prev = rows[order[k - 1]].lambdas;
        const EigenSet& cur = sets[order[k]];

        double scale = 0.0;
        for (int i = 0; i < 3; ++i)
            scale = std::max({scale, std::abs(prev[i]), std::abs(cur.lambdas[i])});

        std::array<double, 6> cost{};
        for (int pi = 0; pi < 6; ++pi)
            for (int i = 0; i < 3; ++i)
                cost[pi] += std::abs(prev[i] - cur.lambdas[perms[pi][i]]);

        int best = 0;
        for (int pi = 1; pi < 6; ++pi)
            if (cost[pi] < cost[best])
                best = pi;
        double runner_up = std::numeric_limits<double>::infinity();
        for (int pi = 0; pi < 6; ++pi)
            if (pi != best)
                runner_up = std::min(runner_up, cost[pi]);
        const bool tie = runner_up - cost[best] <= 1e-12 * scale;
        fill(order[k], perms[best], tie);
    }
    return rows;
}

}  // namespace eplab::spectrum
