#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "eplab/model/params.hpp"
#include "eplab/spectrum/cubic.hpp"

namespace eplab::spectrum {

// coupled: gamma_p is recomputed from d0 and gamma_sigma re-derived.
// frozen:  gamma_sigma is taken from the parameters as given.
enum class PumpMode { coupled, frozen };

const char* to_string(PumpMode m);

// Linearization of the (n, phi, s) equations about the stationary point at
// fixed inversion d0, basis (dn, dphi, ds).
struct StabilityMatrix {
    Eigen::Matrix3d entries;
    model::ModelParams params;  // with gamma_p as actually used
    double d0 = 0.0;
    PumpMode mode = PumpMode::coupled;

    double norm() const { return entries.norm(); }
};

// Throws DomainError unless d0 is in [-1, 1). d0 = -1 is the unpumped limit.
StabilityMatrix build_stability_matrix(const model::ModelParams& p, double d0,
                                       PumpMode mode = PumpMode::coupled);

// c2 = -trace, c1 = sum of principal 2x2 minors, c0 = -det.
CubicCoeffs characteristic_coeffs(const Eigen::Matrix3d& m);
inline CubicCoeffs characteristic_coeffs(const StabilityMatrix& m)
{
    return characteristic_coeffs(m.entries);
}

// Discriminant of the characteristic cubic of m / |m|_F. Same sign as the
// raw discriminant, scale-free magnitude.
double normalized_discriminant(const Eigen::Matrix3d& m);

// Unit null vector of (M - lambda I). Primary route is the unconjugated
// cross product of two rows of (M - lambda I); inverse iteration is the
// fallback when every row pair is nearly parallel. The largest-magnitude
// component is made real and positive. Throws RankDeficiencyError if both
// routes fail.
Eigen::Vector3cd eigenvector_for(const Eigen::Matrix3d& m, std::complex<double> lambda);
inline Eigen::Vector3cd eigenvector_for(const StabilityMatrix& m, std::complex<double> lambda)
{
    return eigenvector_for(m.entries, lambda);
}

// |<u, v>| / (|u| |v|) with the conjugated inner product.
double overlap(const Eigen::Vector3cd& u, const Eigen::Vector3cd& v);

struct EigenSet {
    double d0 = 0.0;
    std::array<std::complex<double>, 3> lambdas;
    std::array<Eigen::Vector3cd, 3> vectors;
    Eigen::Matrix3d overlaps;
    double discriminant = 0.0;  // raw, of the characteristic cubic
    double defect_gap = 0.0;    // min pairwise |lambda_i - lambda_j|
};

EigenSet eigen_set(const StabilityMatrix& m);
EigenSet spectrum_at(const model::ModelParams& p, double d0, PumpMode mode = PumpMode::coupled);

std::vector<EigenSet> sweep(const model::ModelParams& p, std::span<const double> d0_grid,
                            PumpMode mode = PumpMode::coupled);

struct BranchRow {
    double d0 = 0.0;
    std::array<std::complex<double>, 3> lambdas;  // by branch label 1..3
    Eigen::Matrix3d overlaps;                     // by branch label
    double discriminant = 0.0;
    std::array<int, 3> source_index{0, 1, 2};     // label k came from EigenSet slot
    bool ambiguous = false;  // assignment into this row tied with another
};

// Labels eigenvalues continuously along d0. Rows come back in input order;
// matching runs in ascending d0, seeded with the canonical order of the
// most negative d0 (real root, then +Im, then -Im). Each step picks the
// permutation with the smallest summed |lambda_prev - lambda_cur|; a tie
// within 1e-12 (relative to the spectral scale) sets `ambiguous`.
std::vector<BranchRow> track_branches(std::span<const EigenSet> sweep);

}  // namespace eplab::spectrum
