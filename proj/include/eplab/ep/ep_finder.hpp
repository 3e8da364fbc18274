#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "eplab/model/params.hpp"
#include "eplab/spectrum/spectrum.hpp"

namespace eplab::ep {

struct SearchOptions {
    double lo = -1.0 + 1e-6;
    double hi = -1e-6;
    std::size_t scan_points = 2001;
    double tolerance = 1e-12;    // final bracket width
    double overlap_gate = 0.999;  // eigenvector coalescence threshold
};

// A coarse-scan interval on which the discriminant changes sign.
struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
    // True when the discriminant is negative at lo and positive at hi, i.e.
    // a conjugate pair collapses onto the real axis with increasing d0.
    bool pair_collapses = false;
};

struct EPResult {
    double d0_ep = 0.0;
    double gamma_p_ep = 0.0;
    std::complex<double> lambda_ep;
    double overlap_ep = 0.0;
    double bracket_width = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double eigenvalue_gap = 0.0;  // |lambda_a - lambda_b| of the coalescing pair
    spectrum::PumpMode mode = spectrum::PumpMode::coupled;
    bool pair_collapses = false;
    // Eigenvalues coalesce but eigenvectors stay independent: not an EP.
    bool diabolic_suspect = false;
    std::vector<Bracket> brackets;  // every sign change of the coarse scan

    bool confirmed() const { return !diabolic_suspect; }
};

// Scans the discriminant of the characteristic cubic over [lo, hi], bisects
// the sign change at the largest d0 down to `tolerance`, and applies the
// eigenvector-overlap gate at the refined point.
// Throws NoExceptionalPointError when the scan finds no sign change.
EPResult locate_ep(const model::ModelParams& p, const SearchOptions& search = {},
                   spectrum::PumpMode mode = spectrum::PumpMode::coupled);

struct LocusRow {
    double gamma_cor = 0.0;
    bool found = false;
    EPResult result;
    std::string failure;  // empty when found
};

// One locate_ep per gamma_cor value, rows in input order. Failures are
// recorded per row.
std::vector<LocusRow> ep_locus(const model::ModelParams& p, std::span<const double> gamma_cor_grid,
                               const SearchOptions& search = {},
                               spectrum::PumpMode mode = spectrum::PumpMode::coupled);

struct SplitRow {
    double d0 = 0.0;
    double dim = 0.0;  // |Im lambda_2 - Im lambda_3|
    double dre = 0.0;  // |Re lambda_2 - Re lambda_3|
    bool ambiguous = false;
};

std::vector<SplitRow> splitting_curve(const model::ModelParams& p, std::span<const double> d0_grid,
                                      spectrum::PumpMode mode = spectrum::PumpMode::coupled);

// Inclusive grid of `count` points from lo to hi with exact endpoints.
std::vector<double> linspace(double lo, double hi, std::size_t count);

}  // namespace eplab::ep
