#pragma once

// Eigenstructure of the three-field EIT system (E, P, S) and the five-field
// stationary-light system (E_R, E_L, S, P_R, P_L) in momentum space.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "plab/core.hpp"
#include "plab/schedule.hpp"

namespace plab {

enum class Scheme { Eit, Stationary };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

/// Field labels in matrix order.
const std::vector<std::string>& field_labels(Scheme s);
/// Matrix indices of the lossy P fields.
std::vector<int> p_field_indices(Scheme s);
/// Matrix indices of the photon fields.
std::vector<int> photon_field_indices(Scheme s);

/// [[ck, g, 0], [g, delta - i gamma_e, Omega], [0, Omega, 0]] in the basis (E, P, S),
/// Omega = omega_R. Throws ValidationError if omega_L != 0.
Eigen::Matrix3cd eit_matrix(const ValidatedParams& p, double k);

/// Five-field matrix in the basis (E_R, E_L, S, P_R, P_L); E_R carries +ck and
/// E_L carries -ck.
Eigen::Matrix<cplx, 5, 5> stationary_matrix(const ValidatedParams& p, double k);

Eigen::MatrixXcd scheme_matrix(const ValidatedParams& p, double k, Scheme s);

struct Eigenpairs {
    Eigen::VectorXcd values;   ///< ascending real part
    Eigen::MatrixXcd vectors;  ///< unit-norm columns
};

/// Hermitian solver when gamma_e == 0, general complex solver otherwise.
Eigenpairs diagonalize(const Eigen::MatrixXcd& m, bool hermitian);

/// Per-branch dispersion over a momentum grid. Branch b at grid index i has
/// eigenvalue values[b][i] and eigenvector vectors[b][i]; branches are ordered
/// by real part at k = 0 and followed continuously by eigenvector overlap.
struct BandStructure {
    MomentumGrid k_grid = MomentumGrid::symmetric(1.0, 3);
    Scheme scheme = Scheme::Eit;
    std::vector<std::string> labels;
    std::vector<std::vector<cplx>> values;
    std::vector<std::vector<Eigen::VectorXcd>> vectors;
    int dark_branch = -1;

    std::size_t branch_count() const noexcept { return values.size(); }
};

struct BandOptions {
    unsigned threads = 1;
    /// Throw NumericalError when the best overlap falls below 0.5; otherwise
    /// keep the best match and carry on.
    bool strict_tracking = true;
};

BandStructure band_structure(const ValidatedParams& p, const MomentumGrid& k_grid, Scheme scheme,
                             BandOptions opts = {});

/// Dark eigenvector at one momentum per entry of `k` (any order), tracked
/// outward from k = 0 along the sorted momenta. The gauge makes the first
/// nonzero photon component real and positive. Used to prepare and project
/// propagation states; tracking is tolerant.
std::vector<Eigen::VectorXcd> dark_modes(const ValidatedParams& p, const std::vector<double>& k, Scheme scheme);

struct PolaritonSummary {
    double v_group = 0.0;
    double curvature = 0.0;      ///< d^2 eps_D / dk^2 at k = 0
    double m_eff = 0.0;          ///< 1 / curvature; +inf when flagged
    bool infinite_mass = false;  ///< |delta| below threshold: curvature vanishes
    Eigen::VectorXcd dark_composition;
    double gap_upper = 0.0;
    double gap_lower = 0.0;
    double photonic_fraction = 0.0;
    cplx dark_eigenvalue{};
    double k_fit = 0.0;
};

/// Stencil half-width for slope and curvature extraction,
/// 1e-3 min(g^2 + Omega^2, smallest k = 0 gap) / c.
double fit_window(const ValidatedParams& p, Scheme scheme);

/// Slope and curvature of the dark branch from a 5-point central stencil at
/// +-k_fit/2 and +-k_fit, gaps to the nearest branches above and below at k = 0.
PolaritonSummary polariton_summary(const ValidatedParams& p, Scheme scheme);

/// Same extraction on an existing band structure. Needs an equispaced grid
/// with at least two points on either side of k = 0.
PolaritonSummary polariton_summary(const BandStructure& b, const ValidatedParams& p);

/// Closed forms for cross-checks.
namespace formulas {
double eit_speed(const ValidatedParams& p);
double eit_mass(const ValidatedParams& p);
double stationary_speed(const ValidatedParams& p);
/// Mass at the stationary point omega_R = omega_L.
double stationary_mass(const ValidatedParams& p);
/// Nonzero k = 0 eigenvalues delta/2 +- sqrt(delta^2 + 4 g^2 + 4 Omega^2)/2.
std::pair<double, double> bright_eigenvalues(double g, double omega, double delta);
}  // namespace formulas

/// Rotation (E_R, E_L, S, P_R, P_L) -> (E_+, E_-, S, P_+, P_-) with
/// E_+ = (Omega_R E_R + Omega_L E_L)/Omega, E_- = (Omega_L E_R - Omega_R E_L)/Omega.
struct PmBasis {
    Eigen::Matrix<double, 5, 5> rotation;
    double u = 0.0;  ///< symmetric-sector speed c (Omega_R^2 - Omega_L^2) / Omega^2

    Eigen::VectorXcd transform(const Eigen::VectorXcd& v) const;
    Eigen::MatrixXcd transform(const Eigen::MatrixXcd& m) const;
};

PmBasis pm_basis_transform(const ValidatedParams& p);

/// Symmetric 3x3 sector (E_+, P_+, S) with u in place of c and the 2x2
/// antisymmetric sector (E_-, P_-); exact at k = 0 only.
Eigen::Matrix3cd symmetric_sector_matrix(const ValidatedParams& p, double k);
Eigen::Matrix2cd antisymmetric_sector_matrix(const ValidatedParams& p, double k);

struct LossSpectrum {
    std::vector<double> k;
    std::vector<double> re_dark;
    std::vector<double> im_dark;
    double exposure_time = 0.0;
    /// Full width in k where exp(2 Im eps_D tau) >= 1/2; NaN if not reached.
    double width_k = 0.0;
    /// Same window expressed as the spread of Re eps_D across it.
    double width_frequency = 0.0;
};

/// Requires gamma_e > 0. exposure_time defaults to 1/gamma_e.
LossSpectrum loss_spectrum(const ValidatedParams& p, const MomentumGrid& k_grid, Scheme scheme,
                           std::optional<double> exposure_time = std::nullopt);

struct AdiabaticitySample {
    double t;
    double omega_R;
    double omega_L;
    double gap_upper;
    double gap_lower;
    double interaction_scale;
    bool flagged;
};

struct AdiabaticityReport {
    std::vector<AdiabaticitySample> samples;
    double min_gap = 0.0;
    bool any_flagged = false;
    double threshold_ratio = 0.1;
};

/// Gaps at k = 0 along the schedule. The interaction scale at each sample is
/// v_ref * g^4 / Omega^4; a sample is flagged when that reaches 0.1 of the
/// smaller gap.
AdiabaticityReport adiabaticity_check(const ControlSchedule& schedule, const ValidatedParams& p, double v_ref,
                                      Scheme scheme = Scheme::Stationary, std::size_t samples = 201);

}  // namespace plab
