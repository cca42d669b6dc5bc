#pragma once

// Shared domain types: physical parameters, grids, unit conventions, and the
// JSON run-config every subcommand ingests.
//
// Default units are dimensionless with c = 1 and g = 1: lengths in c/g and
// times in 1/g. The "physical" tag only records that the caller supplied
// SI-derived values; no conversion is performed anywhere.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace plab {

using cplx = std::complex<double>;

enum class UnitSystem { Dimensionless, Physical };

std::string to_string(UnitSystem u);
UnitSystem unit_system_from_string(const std::string& s);

/// Couplings and rates of the light-matter system. Delta is shared by both
/// P fields of the stationary scheme (Delta_R = Delta_L).
struct PhysicalParams {
    double g = 1.0;        ///< collective atom-photon coupling
    double omega_R = 1.0;  ///< control Rabi coupling, right beam
    double omega_L = 0.0;  ///< control Rabi coupling, left beam
    double delta = 0.0;    ///< one-photon detuning
    double c = 1.0;        ///< photon speed
    double gamma_e = 0.0;  ///< decay of the P fields, enters as delta - i gamma_e

    bool operator==(const PhysicalParams&) const = default;
};

struct ValidationOptions {
    bool require_dark_state = false;  ///< demand omega_total > 0
    bool allow_zero_coupling = false; ///< accept g = 0 (free-photon checks)
};

/// Parameters that passed validation, with derived quantities attached.
/// Only validate_params constructs these.
class ValidatedParams {
public:
    const PhysicalParams& raw() const noexcept { return raw_; }
    double g() const noexcept { return raw_.g; }
    double omega_R() const noexcept { return raw_.omega_R; }
    double omega_L() const noexcept { return raw_.omega_L; }
    double delta() const noexcept { return raw_.delta; }
    double c() const noexcept { return raw_.c; }
    double gamma_e() const noexcept { return raw_.gamma_e; }

    /// sqrt(omega_R^2 + omega_L^2)
    double omega_total() const noexcept { return omega_total_; }
    /// g^2 / (g^2 + omega_total^2): spin-wave weight of the k = 0 dark state
    double atomic_fraction() const noexcept { return atomic_fraction_; }
    double photonic_fraction() const noexcept { return 1.0 - atomic_fraction_; }
    /// delta - i gamma_e
    cplx complex_detuning() const noexcept { return {raw_.delta, -raw_.gamma_e}; }

    /// Same validated parameters with different control couplings.
    ValidatedParams with_controls(double omega_R, double omega_L) const;

private:
    friend ValidatedParams validate_params(const PhysicalParams&, ValidationOptions);
    PhysicalParams raw_;
    double omega_total_ = 0.0;
    double atomic_fraction_ = 0.0;
};

/// Throws ValidationError naming the offending field.
ValidatedParams validate_params(const PhysicalParams& p, ValidationOptions opts = {});

/// Periodic real-space grid; x_i = i * spacing for i in [0, n_points).
class SpatialGrid {
public:
    SpatialGrid(double length, std::size_t n_points);

    double length() const noexcept { return length_; }
    std::size_t size() const noexcept { return n_; }
    double spacing() const noexcept { return length_ / static_cast<double>(n_); }
    double x(std::size_t i) const noexcept { return static_cast<double>(i) * spacing(); }
    /// Largest resolved wavenumber, pi / spacing.
    double k_max() const noexcept;
    /// DFT wavenumbers in FFT storage order (0, dk, ..., -dk).
    std::vector<double> fft_wavenumbers() const;

    bool operator==(const SpatialGrid&) const = default;

private:
    double length_;
    std::size_t n_;
};

/// Ascending momenta, symmetric about zero and containing k = 0 exactly.
class MomentumGrid {
public:
    /// `points` equally spaced values on [-k_max, k_max]; points must be odd.
    static MomentumGrid symmetric(double k_max, std::size_t points);
    /// Conjugate of a spatial grid with the unpaired Nyquist mode dropped.
    static MomentumGrid conjugate(const SpatialGrid& grid);
    /// Arbitrary values; validated for symmetry and ordering.
    static MomentumGrid from_values(std::vector<double> k);

    const std::vector<double>& values() const noexcept { return k_; }
    std::size_t size() const noexcept { return k_.size(); }
    double operator[](std::size_t i) const noexcept { return k_[i]; }
    std::size_t zero_index() const noexcept { return zero_; }

private:
    explicit MomentumGrid(std::vector<double> k);
    std::vector<double> k_;
    std::size_t zero_ = 0;
};

struct PulseSpec {
    double center = 0.0;
    double width = 1.0;      ///< Gaussian sigma of the amplitude, exp(-(x-x0)^2 / 2 sigma^2)
    double carrier_k = 0.0;  ///< carrier wavenumber relative to two-photon resonance

    bool operator==(const PulseSpec&) const = default;
};

/// Contents of run.json.
struct RunConfig {
    UnitSystem units = UnitSystem::Dimensionless;
    PhysicalParams params;
    SpatialGrid grid{256.0, 2048};
    std::optional<PulseSpec> pulse;
    double v_ref = 0.0;        ///< bare interaction scale for adiabaticity checks
    std::uint64_t seed = 0;

    bool operator==(const RunConfig&) const = default;
};

nlohmann::json to_json(const PhysicalParams& p);
PhysicalParams params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SpatialGrid& g);
SpatialGrid grid_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PulseSpec& p);
PulseSpec pulse_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& j);

/// Reads and parses a JSON file; ValidationError names the file on failure.
nlohmann::json read_json_file(const std::string& path);

}  // namespace plab
