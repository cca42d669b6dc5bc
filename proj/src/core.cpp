#include "plab/core.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "plab/errors.hpp"

namespace plab {

using nlohmann::json;

std::string to_string(UnitSystem u) {
    return u == UnitSystem::Dimensionless ? "dimensionless" : "physical";
}

UnitSystem unit_system_from_string(const std::string& s) {
    if (s == "dimensionless") return UnitSystem::Dimensionless;
    if (s == "physical") return UnitSystem::Physical;
    throw ValidationError("units", "expected 'dimensionless' or 'physical', got '" + s + "'");
}

namespace {

void require_finite(double v, const char* field) {
    if (!std::isfinite(v)) throw ValidationError(field, "must be finite");
}

}  // namespace

ValidatedParams validate_params(const PhysicalParams& p, ValidationOptions opts) {
    require_finite(p.g, "g");
    require_finite(p.omega_R, "omega_R");
    require_finite(p.omega_L, "omega_L");
    require_finite(p.delta, "delta");
    require_finite(p.c, "c");
    require_finite(p.gamma_e, "gamma_e");

    if (opts.allow_zero_coupling ? p.g < 0.0 : p.g <= 0.0)
        throw ValidationError("g", opts.allow_zero_coupling ? "must be >= 0" : "must be > 0");
    if (p.c <= 0.0) throw ValidationError("c", "must be > 0");
    if (p.omega_R < 0.0) throw ValidationError("omega_R", "must be >= 0");
    if (p.omega_L < 0.0) throw ValidationError("omega_L", "must be >= 0");
    if (p.gamma_e < 0.0) throw ValidationError("gamma_e", "must be >= 0");

    ValidatedParams v;
    v.raw_ = p;
    v.omega_total_ = std::hypot(p.omega_R, p.omega_L);
    if (opts.require_dark_state && !(v.omega_total_ > 0.0))
        throw ValidationError("omega_total", "no dark state: omega_R = omega_L = 0");
    const double g2 = p.g * p.g;
    const double den = g2 + v.omega_total_ * v.omega_total_;
    v.atomic_fraction_ = den > 0.0 ? g2 / den : 0.0;
    return v;
}

ValidatedParams ValidatedParams::with_controls(double omega_R, double omega_L) const {
    PhysicalParams p = raw_;
    p.omega_R = omega_R;
    p.omega_L = omega_L;
    return validate_params(p, {.allow_zero_coupling = raw_.g == 0.0});
}

SpatialGrid::SpatialGrid(double length, std::size_t n_points) : length_(length), n_(n_points) {
    if (!std::isfinite(length) || length <= 0.0) throw ValidationError("grid.length", "must be > 0");
    if (n_points < 8) throw ValidationError("grid.n_points", "must be >= 8");
    if ((n_points & (n_points - 1)) != 0)
        throw ValidationError("grid.n_points", "must be a power of two");
}

double SpatialGrid::k_max() const noexcept { return std::numbers::pi / spacing(); }

std::vector<double> SpatialGrid::fft_wavenumbers() const {
    std::vector<double> k(n_);
    const double dk = 2.0 * std::numbers::pi / length_;
    const auto half = static_cast<std::ptrdiff_t>(n_ / 2);
    for (std::size_t j = 0; j < n_; ++j) {
        auto m = static_cast<std::ptrdiff_t>(j);
        if (m >= half) m -= static_cast<std::ptrdiff_t>(n_);
        k[j] = dk * static_cast<double>(m);
    }
    return k;
}

MomentumGrid::MomentumGrid(std::vector<double> k) : k_(std::move(k)) {
    if (k_.empty()) throw ValidationError("k_grid", "must not be empty");
    bool found = false;
    for (std::size_t i = 0; i < k_.size(); ++i) {
        if (!std::isfinite(k_[i])) throw ValidationError("k_grid", "values must be finite");
        if (i > 0 && !(k_[i] > k_[i - 1])) throw ValidationError("k_grid", "must be strictly ascending");
        if (k_[i] == 0.0) {
            zero_ = i;
            found = true;
        }
    }
    if (!found) throw ValidationError("k_grid", "must contain k = 0 exactly");
    const std::size_t n = k_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double a = k_[i], b = -k_[n - 1 - i];
        if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
            throw ValidationError("k_grid", "must be symmetric about k = 0");
    }
}

MomentumGrid MomentumGrid::symmetric(double k_max, std::size_t points) {
    if (!(k_max > 0.0) || !std::isfinite(k_max)) throw ValidationError("kmax", "must be > 0");
    if (points < 3 || points % 2 == 0) throw ValidationError("points", "must be odd and >= 3");
    std::vector<double> k(points);
    const auto half = static_cast<std::ptrdiff_t>(points / 2);
    for (std::size_t i = 0; i < points; ++i) {
        const auto m = static_cast<std::ptrdiff_t>(i) - half;
        // exact mirror symmetry: compute |m| and negate
        const double mag = k_max * static_cast<double>(std::abs(m)) / static_cast<double>(half);
        k[i] = m < 0 ? -mag : mag;
    }
    return MomentumGrid(std::move(k));
}

MomentumGrid MomentumGrid::conjugate(const SpatialGrid& grid) {
    const double dk = 2.0 * std::numbers::pi / grid.length();
    const auto half = static_cast<std::ptrdiff_t>(grid.size() / 2);
    std::vector<double> k;
    k.reserve(grid.size() - 1);
    for (std::ptrdiff_t m = -half + 1; m < half; ++m) {
        const double mag = dk * static_cast<double>(std::abs(m));
        k.push_back(m < 0 ? -mag : mag);
    }
    return MomentumGrid(std::move(k));
}

MomentumGrid MomentumGrid::from_values(std::vector<double> k) { return MomentumGrid(std::move(k)); }

// ---------------------------------------------------------------- JSON

namespace {

double get_number(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ValidationError(where + "." + key, "missing");
    const auto& v = j.at(key);
    if (!v.is_number()) throw ValidationError(where + "." + key, "must be a number");
    return v.get<double>();
}

double get_number_or(const json& j, const char* key, double fallback, const std::string& where) {
    return j.contains(key) ? get_number(j, key, where) : fallback;
}

}  // namespace

json to_json(const PhysicalParams& p) {
    return {{"g", p.g},         {"omega_R", p.omega_R}, {"omega_L", p.omega_L},
            {"delta", p.delta}, {"c", p.c},             {"gamma_e", p.gamma_e}};
}

PhysicalParams params_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("params", "must be an object");
    PhysicalParams p;
    p.g = get_number(j, "g", "params");
    p.omega_R = get_number(j, "omega_R", "params");
    p.omega_L = get_number_or(j, "omega_L", 0.0, "params");
    p.delta = get_number_or(j, "delta", 0.0, "params");
    p.c = get_number_or(j, "c", 1.0, "params");
    p.gamma_e = get_number_or(j, "gamma_e", 0.0, "params");
    return p;
}

json to_json(const SpatialGrid& g) { return {{"length", g.length()}, {"n_points", g.size()}}; }

SpatialGrid grid_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("grid", "must be an object");
    const double length = get_number(j, "length", "grid");
    const double n = get_number(j, "n_points", "grid");
    if (n < 0 || n != std::floor(n)) throw ValidationError("grid.n_points", "must be a non-negative integer");
    return SpatialGrid(length, static_cast<std::size_t>(n));
}

json to_json(const PulseSpec& p) {
    return {{"center", p.center}, {"width", p.width}, {"carrier_k", p.carrier_k}};
}

PulseSpec pulse_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("pulse", "must be an object");
    PulseSpec p;
    p.center = get_number(j, "center", "pulse");
    p.width = get_number(j, "width", "pulse");
    p.carrier_k = get_number_or(j, "carrier_k", 0.0, "pulse");
    if (!(p.width > 0.0)) throw ValidationError("pulse.width", "must be > 0");
    return p;
}

json to_json(const RunConfig& c) {
    json j = {{"units", to_string(c.units)},
              {"params", to_json(c.params)},
              {"grid", to_json(c.grid)},
              {"v_ref", c.v_ref},
              {"seed", c.seed}};
    if (c.pulse) j["pulse"] = to_json(*c.pulse);
    return j;
}

RunConfig run_config_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("config", "must be a JSON object");
    RunConfig c;
    if (j.contains("units")) {
        if (!j.at("units").is_string()) throw ValidationError("units", "must be a string");
        c.units = unit_system_from_string(j.at("units").get<std::string>());
    }
    if (!j.contains("params")) throw ValidationError("params", "missing");
    c.params = params_from_json(j.at("params"));
    if (j.contains("grid")) c.grid = grid_from_json(j.at("grid"));
    if (j.contains("pulse")) c.pulse = pulse_from_json(j.at("pulse"));
    c.v_ref = get_number_or(j, "v_ref", 0.0, "config");
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) throw ValidationError("seed", "must be a non-negative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    return c;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("file", "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("file", "'" + path + "' is not valid JSON: " + e.what());
    }
}

}  // namespace plab
