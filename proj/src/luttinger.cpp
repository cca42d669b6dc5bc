#include <cmath>
#include <numbers>
#include <sstream>

#include "plab/errors.hpp"
#include "plab/manybody.hpp"

namespace plab {

namespace {

LuttingerFit fit_envelope(const CorrelationData& c, const LuttingerOptions& o) {
    if (!(c.rho0 > 0.0)) throw ValidationError("rho0", "must be > 0");
    const std::size_t n = c.r.size();
    if (n != c.values.size()) throw ValidationError("correlation", "r and g2 lengths differ");
    if (n < 3) throw ValidationError("correlation", "too few samples");

    LuttingerFit fit;
    fit.method = LuttingerMethod::EnvelopeExtrema;
    fit.r_min = o.r_min > 0.0 ? o.r_min : 2.0 / c.rho0;
    fit.r_max = o.r_max > 0.0 ? o.r_max : 0.9 * c.r.back();

    std::vector<double> lx, ly;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double a = std::abs(c.values[i] - 1.0);
        if (c.r[i] < fit.r_min || c.r[i] > fit.r_max || !(a > 0.0)) continue;
        if (a > std::abs(c.values[i - 1] - 1.0) && a >= std::abs(c.values[i + 1] - 1.0)) {
            lx.push_back(std::log(c.r[i]));
            ly.push_back(std::log(a));
        }
    }
    if (lx.size() < 4) {
        std::ostringstream msg;
        msg << "only " << lx.size() << " oscillation extrema in [" << fit.r_min << ", " << fit.r_max
            << "]; at least 4 are needed";
        throw ValidationError("window", msg.str());
    }

    const auto m = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / m;
    double ss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double e = ly[i] - (icpt + slope * lx[i]);
        ss += e * e;
    }
    fit.K = -0.5 * slope;
    fit.amplitude = std::exp(icpt);
    fit.residual = std::sqrt(ss / m);
    fit.points = lx.size();
    return fit;
}

LuttingerFit fit_structure_factor(const CorrelationData& c) {
    if (!c.periodic || c.system_size < 2) throw ValidationError("correlation", "structure-factor fit needs ring data");
    const int L = c.system_size;
    if (c.r.size() != static_cast<std::size_t>(L / 2 + 1) || c.values.size() != c.r.size())
        throw ValidationError("correlation", "expected separations 0..L/2");
    const double q = 2.0 * std::numbers::pi / L;
    double s = 1.0;
    for (int r = 0; r < L; ++r) {
        const int rr = std::min(r, L - r);
        s += c.rho0 * (c.values[static_cast<std::size_t>(rr)] - 1.0) * std::cos(q * r);
    }
    LuttingerFit fit;
    fit.method = LuttingerMethod::StructureFactor;
    fit.K = c.rho0 * L * s;
    fit.amplitude = s;
    fit.r_min = 0.0;
    fit.r_max = L - 1;
    fit.points = static_cast<std::size_t>(L);
    return fit;
}

}  // namespace

LuttingerFit fit_luttinger_K(const CorrelationData& c, const LuttingerOptions& opts) {
    LuttingerFit fit = opts.method == LuttingerMethod::StructureFactor ? fit_structure_factor(c) : fit_envelope(c, opts);
    if (!(fit.K > 0.0)) {
        std::ostringstream msg;
        msg << "fitted Luttinger parameter is not positive (K = " << fit.K << ")";
        throw NumericalError(msg.str());
    }
    return fit;
}

}  // namespace plab
