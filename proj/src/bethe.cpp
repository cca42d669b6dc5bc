#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "plab/errors.hpp"
#include "plab/manybody.hpp"

namespace plab {

void gauss_legendre(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
    if (n == 0) throw ValidationError("nodes", "must be > 0");
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                const auto jd = static_cast<double>(j);
                p1 = ((2.0 * jd + 1.0) * z * p2 - jd * p3) / (jd + 1.0);
            }
            pp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
}

namespace {

// Nystrom form of g(x) = 1/2pi + (1/2pi) int_{-1}^{1} 2 lambda g(y) / (lambda^2 + (x-y)^2) dy
struct LiebSolver {
    std::vector<double> x, w, g;
    const BetheOptions& opts;
    std::size_t sweeps = 0;

    LiebSolver(std::size_t n, const BetheOptions& o) : opts(o) {
        gauss_legendre(n, x, w);
        g.assign(n, 0.5 / std::numbers::pi);
    }

    void solve(double lambda) {
        const std::size_t n = x.size();
        std::vector<double> kern(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double d = x[i] - x[j];
                kern[i * n + j] = lambda / (std::numbers::pi * (lambda * lambda + d * d)) * w[j];
            }
        std::vector<double> next(n);
        double change = 0.0;
        for (std::size_t it = 0; it < opts.max_iterations; ++it) {
            ++sweeps;
            change = 0.0;
            double scale = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.5 / std::numbers::pi;
                for (std::size_t j = 0; j < n; ++j) acc += kern[i * n + j] * g[j];
                next[i] = acc;
                change = std::max(change, std::abs(acc - g[i]));
                scale = std::max(scale, std::abs(acc));
            }
            g.swap(next);
            if (change <= opts.tol * scale) return;
        }
        std::ostringstream msg;
        msg << "Lieb-Liniger fixed-point iteration did not converge at lambda = " << lambda << " (last change "
            << change << ")";
        throw NumericalError(msg.str());
    }

    double norm() const {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * g[i];
        return s;
    }

    double second_moment() const {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * x[i] * x[i] * g[i];
        return s;
    }

    double gamma_of(double lambda) {
        solve(lambda);
        return lambda / norm();
    }
};

BetheResult solve_at(double gamma, std::size_t nodes, const BetheOptions& opts) {
    LiebSolver s(nodes, opts);
    // gamma(lambda) is increasing; bracket in log(lambda) around the weak/strong coupling guesses
    const double guess = gamma < 2.0 ? 0.5 * std::sqrt(gamma) : gamma / std::numbers::pi;
    auto f = [&](double log_lambda) { return std::log(s.gamma_of(std::exp(log_lambda))) - std::log(gamma); };
    boost::uintmax_t iters = 200;
    const auto tol = [&](double a, double b) { return std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(a)); };
    auto [lo, hi] = boost::math::tools::bracket_and_solve_root(f, std::log(guess), 2.0, true, tol, iters);
    if (iters >= 200) throw NumericalError("Lieb-Liniger root search for lambda did not converge");

    BetheResult r;
    r.gamma = gamma;
    r.lambda = std::exp(0.5 * (lo + hi));
    const double gm = s.gamma_of(r.lambda);
    const double ratio = gm / r.lambda;
    r.e = ratio * ratio * ratio * s.second_moment();
    r.iterations = s.sweeps;
    return r;
}

}  // namespace

BetheResult lieb_liniger_energy(double gamma, const BetheOptions& opts) {
    if (!std::isfinite(gamma) || !(gamma > 0.0)) throw ValidationError("gamma", "must be finite and > 0");
    if (opts.nodes < 4) throw ValidationError("nodes", "must be >= 4");
    BetheResult fine = solve_at(gamma, opts.nodes, opts);
    const BetheResult coarse = solve_at(gamma, opts.nodes / 2, opts);
    fine.quad_error = std::abs(fine.e - coarse.e);
    fine.iterations += coarse.iterations;
    return fine;
}

}  // namespace plab
