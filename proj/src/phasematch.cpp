#include "plab/phasematch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "plab/errors.hpp"

namespace plab {

namespace {

void check_wavelength(double v, const char* field) {
    if (!std::isfinite(v) || !(v > 0.0)) throw ValidationError(field, "must be finite and > 0");
}

double wavenumber(double lambda) { return 2.0 * std::numbers::pi / lambda; }

double norm(const Vec2& v) { return std::hypot(v[0], v[1]); }

// q with sqrt(k1^2 + q^2) = k2; Newton polish in case the closed form loses digits
double control_y(double k1, double k2) {
    double q = std::sqrt((k2 - k1) * (k2 + k1));
    for (int it = 0; it < 4 && q > 0.0; ++it) {
        const double f = std::hypot(k1, q) - k2;
        if (std::abs(f) <= 1e-15 * k2) break;
        q -= f * std::hypot(k1, q) / q;
    }
    return q;
}

}  // namespace

PhaseMatchSolution solve_coplanar(double lambda_probe, double lambda_control) {
    check_wavelength(lambda_probe, "lambda_probe");
    check_wavelength(lambda_control, "lambda_control");
    const double k1 = wavenumber(lambda_probe), k2 = wavenumber(lambda_control);
    if (k2 < k1) {
        std::ostringstream msg;
        msg << "control wavenumber " << k2 << " is shorter than the required x component " << k1
            << "; no real tilt exists for lambda_control > lambda_probe";
        throw InfeasibleError("lambda_control", msg.str());
    }
    const double q = lambda_probe == lambda_control ? 0.0 : control_y(k1, k2);
    PhaseMatchSolution sol;
    sol.tilt_angle = std::atan2(q, k1);
    for (double sign : {1.0, -1.0}) {
        BeamSet b;
        b.lambda_probe = lambda_probe;
        b.lambda_control = lambda_control;
        b.k1R = {k1, 0.0};
        b.k1L = {-k1, 0.0};
        b.k2L = {k1, sign * q};
        b.k2R = {-k1, sign * q};
        b.tilt = sign * sol.tilt_angle;
        sol.solutions.push_back(b);
        if (q == 0.0) break;
    }
    return sol;
}

BeamSet solve_collinear(double lambda_probe, double lambda_control) {
    check_wavelength(lambda_probe, "lambda_probe");
    check_wavelength(lambda_control, "lambda_control");
    if (lambda_probe != lambda_control) {
        const double k1 = wavenumber(lambda_probe), k2 = wavenumber(lambda_control);
        std::ostringstream msg;
        msg << "collinear beams need |k1| = |k2|; momentum mismatch " << 2.0 * std::abs(k1 - k2);
        throw InfeasibleError("geometry", msg.str());
    }
    return solve_coplanar(lambda_probe, lambda_control).solutions.front();
}

double ResidualReport::max_relative() const noexcept {
    return std::max({momentum_x.relative, momentum_y.relative, energy.relative});
}

ResidualReport verify(const BeamSet& b) {
    for (const Vec2* v : {&b.k1L, &b.k1R, &b.k2L, &b.k2R}) {
        if (!std::isfinite((*v)[0]) || !std::isfinite((*v)[1]))
            throw ValidationError("beams", "non-finite wavevector");
        if (norm(*v) == 0.0) throw ValidationError("beams", "degenerate input: zero wavevector");
    }
    const double scale = std::max({norm(b.k1L), norm(b.k1R), norm(b.k2L), norm(b.k2R)});
    auto res = [&](double a) { return Residual{std::abs(a), std::abs(a) / scale}; };
    ResidualReport r;
    r.momentum_x = res((b.k1L[0] + b.k2L[0]) - (b.k1R[0] + b.k2R[0]));
    r.momentum_y = res((b.k1L[1] + b.k2L[1]) - (b.k1R[1] + b.k2R[1]));
    r.energy = res((norm(b.k1L) + norm(b.k2L)) - (norm(b.k1R) + norm(b.k2R)));
    return r;
}

nlohmann::json to_json(const BeamSet& b) {
    return {{"k1L", b.k1L},
            {"k1R", b.k1R},
            {"k2L", b.k2L},
            {"k2R", b.k2R},
            {"lambda_probe", b.lambda_probe},
            {"lambda_control", b.lambda_control},
            {"tilt_rad", b.tilt},
            {"tilt_deg", b.tilt * 180.0 / std::numbers::pi}};
}

nlohmann::json to_json(const ResidualReport& r) {
    auto one = [](const Residual& x) { return nlohmann::json{{"absolute", x.absolute}, {"relative", x.relative}}; };
    return {{"momentum_x", one(r.momentum_x)}, {"momentum_y", one(r.momentum_y)}, {"energy", one(r.energy)}};
}

nlohmann::json to_json(const PhaseMatchSolution& s) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& b : s.solutions) {
        auto j = to_json(b);
        j["residuals"] = to_json(verify(b));
        arr.push_back(std::move(j));
    }
    return {{"tilt_angle_rad", s.tilt_angle}, {"solutions", arr}};
}

}  // namespace plab
