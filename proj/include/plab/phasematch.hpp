#pragma once

// Coplanar four-beam geometry for counter-propagating probes: the probes run
// along x, the two control beams are tilted into y so that momentum and
// energy (omega = |k|, c = 1) are conserved together.

#include <array>
#include <vector>

#include <json.hpp>

namespace plab {

using Vec2 = std::array<double, 2>;

struct BeamSet {
    Vec2 k1L{}, k1R{}, k2L{}, k2R{};
    double lambda_probe = 0.0;
    double lambda_control = 0.0;
    double tilt = 0.0;  ///< signed angle of the controls' common y tilt, radians
};

struct PhaseMatchSolution {
    double tilt_angle = 0.0;          ///< |tilt|, radians
    std::vector<BeamSet> solutions;   ///< +y first, then -y (one entry when the tilt is zero)
};

/// k1R = (k1, 0), k1L = (-k1, 0), k2L = (k1, q), k2R = (-k1, q) with
/// q = +-sqrt(k2^2 - k1^2). Throws InfeasibleError when lambda_control > lambda_probe.
PhaseMatchSolution solve_coplanar(double lambda_probe, double lambda_control);

/// All beams on the x axis. Only equal wavelengths work; anything else
/// throws InfeasibleError.
BeamSet solve_collinear(double lambda_probe, double lambda_control);

struct Residual {
    double absolute = 0.0;
    double relative = 0.0;
};

struct ResidualReport {
    Residual momentum_x;
    Residual momentum_y;
    Residual energy;

    double max_relative() const noexcept;
};

/// Residuals of k1L + k2L = k1R + k2R and |k1L| + |k2L| = |k1R| + |k2R|,
/// relative to the largest wavenumber. Zero beams throw ValidationError.
ResidualReport verify(const BeamSet& b);

nlohmann::json to_json(const BeamSet& b);
nlohmann::json to_json(const ResidualReport& r);
nlohmann::json to_json(const PhaseMatchSolution& s);

}  // namespace plab
