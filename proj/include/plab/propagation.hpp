#pragma once

// Time-domain evolution of the five coupled envelopes (E_R, E_L, S, P_R, P_L)
// under time-dependent controls, and the storage/retrieval protocol built on it.

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "plab/core.hpp"
#include "plab/fourier.hpp"
#include "plab/schedule.hpp"

namespace plab {

enum Field : int { ER = 0, EL = 1, S = 2, PR = 3, PL = 4 };

struct MultiFieldState {
    SpatialGrid grid;
    std::array<ComplexBuffer, 5> fields;
    double time = 0.0;

    static MultiFieldState zeros(const SpatialGrid& grid);

    /// sum_x |f|^2 dx for one field
    double field_norm(int f) const;
    double norm() const;
    double photonic_norm() const { return field_norm(ER) + field_norm(EL); }
    /// Centroid of the summed density of all fields.
    double centroid() const;
    /// Centroid of |E_+|^2 with E_+ = (omega_R E_R + omega_L E_L) / Omega.
    double plus_centroid(double omega_R, double omega_L) const;
};

/// Largest admissible step, 0.1 / max(c k_max, |delta| + gamma_e, g, omega_max).
double dt_max(const ValidatedParams& p, const SpatialGrid& grid, double omega_max);

/// Strang splitter: half-step advection of E_R (+c) and E_L (-c) in Fourier
/// space around the exact local coupling exponential exp(-i M dt), with M
/// evaluated at the controls at the middle of the step.
class SplitStepPropagator {
public:
    SplitStepPropagator(const ValidatedParams& p, const SpatialGrid& grid);

    const ValidatedParams& params() const noexcept { return p_; }
    double dt_max(double omega_max) const;

    /// One step; throws ValidationError when dt exceeds the stability bound.
    void step(MultiFieldState& s, const ControlSchedule& schedule, double dt);
    /// n consecutive steps of size dt starting at s.time. Inner advection
    /// half-steps are merged; the result matches n calls of step().
    void evolve(MultiFieldState& s, const ControlSchedule& schedule, double dt, std::size_t n);

private:
    void advect(MultiFieldState& s, double tau);
    void couple(MultiFieldState& s, double omega_R, double omega_L, double dt);
    const std::vector<cplx>& phases(double tau, int sign);
    void check_dt(const ControlSchedule& schedule, double dt) const;

    ValidatedParams p_;
    SpatialGrid grid_;
    FftPlan plan_;
    std::vector<double> k_;

    struct PhaseCache {
        double tau = -1.0;
        std::vector<cplx> right, left;
    } phase_cache_[2];
    int phase_next_ = 0;

    struct CouplingCache {
        double omega_R = -1.0, omega_L = -1.0, dt = -1.0;
        std::array<cplx, 25> u{};
    } coupling_cache_;
};

/// Dark polariton pulse: the Gaussian envelope of `pulse` in Fourier space,
/// each mode placed on the dark eigenvector at controls (omega_R, omega_L)
/// of p. Normalized to total norm 1.
MultiFieldState prepare_dark_pulse(const ValidatedParams& p, const SpatialGrid& grid, const PulseSpec& pulse);

struct DarkProjection {
    double dark_norm = 0.0;            ///< sum_k |c_k|^2 dx-normalized
    double dark_photonic_norm = 0.0;   ///< same, weighted by each mode's photon content
};

/// Projects every Fourier mode onto the dark eigenvector at the controls of p.
/// Left eigenvectors of the complex-symmetric mode matrix are the transposes
/// of the right ones, so c_k = D_k^T psi_k / D_k^T D_k.
DarkProjection project_dark(const MultiFieldState& s, const ValidatedParams& p);

/// (g^2 / (g^2 + Omega^2), g^4 / Omega^4)
std::pair<double, double> dark_fraction_and_coupling_scale(const ValidatedParams& p);

struct TraceSample {
    double t;
    double norm;
    double photonic_fraction;
    double centroid;
    double omega_R;
    double omega_L;
};

struct StageSummary {
    std::string label;
    double t_start = 0.0;
    double t_end = 0.0;
    double norm_end = 0.0;
    double photonic_fraction_end = 0.0;
    double plus_centroid_start = 0.0;
    double plus_centroid_end = 0.0;
    std::size_t steps = 0;
    double dt = 0.0;

    double plus_drift() const noexcept { return plus_centroid_end - plus_centroid_start; }
};

struct ProtocolOptions {
    double dt = 0.0;               ///< 0: largest stable step that divides each stage evenly
    double trace_interval = 1.0;
    double boundary_fraction = 0.02;
    double boundary_tolerance = 1e-6;
};

struct ProtocolReport {
    double input_norm = 0.0;
    double input_photonic_norm = 0.0;
    double stored_norm = 0.0;      ///< total norm entering the last stage
    double retrieved_norm = 0.0;   ///< photonic norm at the end
    double retrieval_efficiency = 0.0;
    double right_moving_fraction = 0.0;
    double final_norm = 0.0;
    std::vector<TraceSample> trace;
    std::vector<StageSummary> stages;
    MultiFieldState output = MultiFieldState::zeros(SpatialGrid(8.0, 8));
};

/// Runs the whole schedule on a dark pulse prepared at the initial controls.
/// retrieval_efficiency is the dark-projected photonic norm at the final
/// controls over the input photonic norm.
ProtocolReport run_protocol(const ValidatedParams& p, const SpatialGrid& grid, const ControlSchedule& schedule,
                            const PulseSpec& pulse, const ProtocolOptions& opts = {});

nlohmann::json to_json(const ProtocolReport& r);

struct SlowLightResult {
    double v_expected = 0.0;
    double v_measured = 0.0;
    double medium_length = 0.0;
    double delay_expected = 0.0;
    double delay_measured = 0.0;
    double relative_error = 0.0;
    bool bandwidth_warning = false;
};

/// Moves an EIT dark pulse (omega_L = 0) through a uniform medium for
/// `duration`, measures the centroid speed and converts it into the delay
/// over `medium_length` relative to free flight. A warning is attached when
/// the pulse bandwidth 1/sigma exceeds 0.1 of the window min(gap)/c.
SlowLightResult slow_light_delay(const ValidatedParams& p, const SpatialGrid& grid, const PulseSpec& pulse,
                                 double duration, double medium_length);

}  // namespace plab
