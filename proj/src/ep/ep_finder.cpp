#include "eplab/ep/ep_finder.hpp"

#include <algorithm>
#include <cmath>

#include "eplab/errors.hpp"
#include "eplab/format.hpp"

namespace eplab::ep {

using spectrum::PumpMode;

std::vector<double> linspace(double lo, double hi, std::size_t count)
{
    std::vector<double> out;
    if (count == 0)
        return out;
    if (count == 1) {
        out.push_back(lo);
        return out;
    }
    out.reserve(count);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out.push_back(lo + step * static_cast<double>(i));
    out.back() = hi;
    return out;
}

namespace {

double disc_at(const model::ModelParams& p, double d0, PumpMode mode)
{
    return spectrum::normalized_discriminant(spectrum::build_stability_matrix(p, d0, mode).entries);
}

bool positive(double v) { return v >= 0.0; }

}  // namespace

EPResult locate_ep(const model::ModelParams& p, const SearchOptions& search, PumpMode mode)
{
    if (!(search.lo > -1.0) || !(search.hi < 1.0) || !(search.lo < search.hi))
        throw DomainError("EP search interval must satisfy -1 < lo < hi < 1");
    if (search.scan_points < 2)
        throw DomainError("EP search needs at least two scan points");
    if (!(search.tolerance > 0.0))
        throw DomainError("EP search tolerance must be positive");

    const auto grid = linspace(search.lo, search.hi, search.scan_points);
    std::vector<double> disc(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) disc[i] = disc_at(p, grid[i], mode);

    EPResult res;
    res.mode = mode;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (positive(disc[i]) != positive(disc[i + 1]))
            res.brackets.push_back({grid[i], grid[i + 1], !positive(disc[i])});
    }
    if (res.brackets.empty())
        throw NoExceptionalPointError("no discriminant sign change in d0 interval [" +
                                          format_double(search.lo) + ", " +
                                          format_double(search.hi) + "]",
                                      search.lo, search.hi);

    // Largest-d0 bracket where a conjugate pair collapses; any sign change
    // if none of them does.
    auto collapse = std::find_if(res.brackets.rbegin(), res.brackets.rend(),
                                 [](const Bracket& b) { return b.pair_collapses; });
    const Bracket chosen = collapse != res.brackets.rend() ? *collapse : res.brackets.back();
    double lo = chosen.lo, hi = chosen.hi;
    const bool lo_positive = positive(disc_at(p, lo, mode));
    while (hi - lo > search.tolerance) {
        const double mid = lo + (hi - lo) / 2.0;
        if (mid <= lo || mid >= hi)
            break;
        if (positive(disc_at(p, mid, mode)) == lo_positive)
            lo = mid;
        else
            hi = mid;
    }

    res.bracket_lo = lo;
    res.bracket_hi = hi;
    res.bracket_width = hi - lo;
    res.d0_ep = lo + (hi - lo) / 2.0;
    res.pair_collapses = chosen.pair_collapses;

    const auto m = spectrum::build_stability_matrix(p, res.d0_ep, mode);
    res.gamma_p_ep = m.params.gamma_p;
    const auto eig = spectrum::eigen_set(m);

    int a = 0, b = 1;
    double gap = std::abs(eig.lambdas[0] - eig.lambdas[1]);
    for (auto [i, j] : {std::pair{0, 2}, std::pair{1, 2}}) {
        const double g = std::abs(eig.lambdas[i] - eig.lambdas[j]);
        if (g < gap) {
            gap = g;
            a = i;
            b = j;
        }
    }
    res.eigenvalue_gap = gap;
    res.lambda_ep = (eig.lambdas[a] + eig.lambdas[b]) / 2.0;
    res.overlap_ep = eig.overlaps(a, b);
    res.diabolic_suspect = !(res.overlap_ep >= search.overlap_gate);
    return res;
}

std::vector<LocusRow> ep_locus(const model::ModelParams& p, std::span<const double> gamma_cor_grid,
                               const SearchOptions& search, PumpMode mode)
{
    std::vector<LocusRow> rows;
    rows.reserve(gamma_cor_grid.size());
    for (double gc : gamma_cor_grid) {
        LocusRow row;
        row.gamma_cor = gc;
        if (!(gc >= 0.0)) {
            row.failure = "gamma_cor must be >= 0";
            rows.push_back(row);
            continue;
        }
        model::ModelParams q = p;
        q.gamma_cor = gc;
        try {
            row.result = locate_ep(q, search, mode);
            row.found = row.result.confirmed();
            if (!row.found)
                row.failure = "diabolic-suspect: overlap " + format_double(row.result.overlap_ep);
        } catch (const Error& e) {
            row.failure = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<SplitRow> splitting_curve(const model::ModelParams& p, std::span<const double> d0_grid,
                                      PumpMode mode)
{
    const auto sets = spectrum::sweep(p, d0_grid, mode);
    const auto branches = spectrum::track_branches(sets);
    std::vector<SplitRow> out;
    out.reserve(branches.size());
    for (const auto& r : branches) {
        out.push_back({r.d0, std::abs(r.lambdas[1].imag() - r.lambdas[2].imag()),
                       std::abs(r.lambdas[1].real() - r.lambdas[2].real()), r.ambiguous});
    }
    return out;
}

}  // namespace eplab::ep
