#include "plab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "plab/errors.hpp"

namespace plab {

std::string to_string(Scheme s) { return s == Scheme::Eit ? "eit" : "stationary"; }

Scheme scheme_from_string(const std::string& s) {
    if (s == "eit") return Scheme::Eit;
    if (s == "stationary") return Scheme::Stationary;
    throw ValidationError("scheme", "expected 'eit' or 'stationary', got '" + s + "'");
}

const std::vector<std::string>& field_labels(Scheme s) {
    static const std::vector<std::string> eit{"E", "P", "S"};
    static const std::vector<std::string> stat{"E_R", "E_L", "S", "P_R", "P_L"};
    return s == Scheme::Eit ? eit : stat;
}

std::vector<int> p_field_indices(Scheme s) { return s == Scheme::Eit ? std::vector<int>{1} : std::vector<int>{3, 4}; }

std::vector<int> photon_field_indices(Scheme s) {
    return s == Scheme::Eit ? std::vector<int>{0} : std::vector<int>{0, 1};
}

Eigen::Matrix3cd eit_matrix(const ValidatedParams& p, double k) {
    if (p.omega_L() != 0.0)
        throw ValidationError("omega_L", "the three-field EIT matrix needs omega_L = 0; use stationary_matrix");
    Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
    m(0, 0) = p.c() * k;
    m(0, 1) = m(1, 0) = p.g();
    m(1, 1) = p.complex_detuning();
    m(1, 2) = m(2, 1) = p.omega_R();
    return m;
}

Eigen::Matrix<cplx, 5, 5> stationary_matrix(const ValidatedParams& p, double k) {
    Eigen::Matrix<cplx, 5, 5> m = Eigen::Matrix<cplx, 5, 5>::Zero();
    const double ck = p.c() * k;
    m(0, 0) = ck;
    m(1, 1) = -ck;
    m(0, 3) = m(3, 0) = p.g();
    m(1, 4) = m(4, 1) = p.g();
    m(2, 3) = m(3, 2) = p.omega_R();
    m(2, 4) = m(4, 2) = p.omega_L();
    m(3, 3) = m(4, 4) = p.complex_detuning();
    return m;
}

Eigen::MatrixXcd scheme_matrix(const ValidatedParams& p, double k, Scheme s) {
    if (s == Scheme::Eit) return eit_matrix(p, k);
    return stationary_matrix(p, k);
}

Eigenpairs diagonalize(const Eigen::MatrixXcd& m, bool hermitian) {
    const Eigen::Index n = m.rows();
    Eigen::VectorXcd vals(n);
    Eigen::MatrixXcd vecs(n, n);
    if (hermitian) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
        if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver failed");
        vals = es.eigenvalues().cast<cplx>();
        vecs = es.eigenvectors();
        return {vals, vecs};
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m);
    if (es.info() != Eigen::Success) throw NumericalError("complex eigensolver failed");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const auto& ev = es.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (ev(a).real() != ev(b).real()) return ev(a).real() < ev(b).real();
        return ev(a).imag() < ev(b).imag();
    });
    for (Eigen::Index i = 0; i < n; ++i) {
        vals(i) = ev(order[static_cast<std::size_t>(i)]);
        vecs.col(i) = es.eigenvectors().col(order[static_cast<std::size_t>(i)]).normalized();
    }
    return {vals, vecs};
}

namespace {

bool is_hermitian_case(const ValidatedParams& p) { return p.gamma_e() == 0.0; }

double p_weight(const Eigen::VectorXcd& v, Scheme s) {
    double w = 0.0;
    for (int i : p_field_indices(s)) w += std::norm(v(i));
    return w;
}

int find_dark(const Eigenpairs& e, Scheme s) {
    int best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (Eigen::Index b = 0; b < e.values.size(); ++b) {
        const double w = p_weight(e.vectors.col(b), s);
        // P weight decides; |eps| breaks exact ties (degenerate photon modes at g = 0)
        const double score = w + 1e-6 * std::abs(e.values(b));
        if (score < best_score) {
            best_score = score;
            best = static_cast<int>(b);
        }
    }
    return best;
}

std::vector<Eigenpairs> diagonalize_all(const ValidatedParams& p, const std::vector<double>& ks, Scheme s,
                                        unsigned threads) {
    std::vector<Eigenpairs> out(ks.size());
    const bool herm = is_hermitian_case(p);
    auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) out[i] = diagonalize(scheme_matrix(p, ks[i], s), herm);
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(ks.size())));
    if (threads == 1) {
        work(0, ks.size());
        return out;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (ks.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t lo = t * chunk, hi = std::min(ks.size(), lo + chunk);
        if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
    return out;
}

// Greedy maximal-overlap matching of previous branch vectors to new eigenvectors.
// Returns perm[b] = column of `next` continuing branch b, and the weakest overlap.
std::pair<std::vector<int>, double> match_branches(const std::vector<Eigen::VectorXcd>& prev, const Eigenpairs& next) {
    const int n = static_cast<int>(prev.size());
    std::vector<double> ov(static_cast<std::size_t>(n * n));
    for (int b = 0; b < n; ++b)
        for (int j = 0; j < n; ++j) ov[static_cast<std::size_t>(b * n + j)] = std::abs(prev[static_cast<std::size_t>(b)].dot(next.vectors.col(j)));
    std::vector<int> perm(static_cast<std::size_t>(n), -1);
    std::vector<bool> used_b(static_cast<std::size_t>(n), false), used_j(static_cast<std::size_t>(n), false);
    double weakest = 1.0;
    for (int round = 0; round < n; ++round) {
        double best = -1.0;
        int bb = -1, bj = -1;
        for (int b = 0; b < n; ++b) {
            if (used_b[static_cast<std::size_t>(b)]) continue;
            for (int j = 0; j < n; ++j) {
                if (used_j[static_cast<std::size_t>(j)]) continue;
                const double o = ov[static_cast<std::size_t>(b * n + j)];
                if (o > best) {
                    best = o;
                    bb = b;
                    bj = j;
                }
            }
        }
        used_b[static_cast<std::size_t>(bb)] = used_j[static_cast<std::size_t>(bj)] = true;
        perm[static_cast<std::size_t>(bb)] = bj;
        weakest = std::min(weakest, best);
    }
    return {perm, weakest};
}

}  // namespace

BandStructure band_structure(const ValidatedParams& p, const MomentumGrid& k_grid, Scheme scheme, BandOptions opts) {
    const auto& ks = k_grid.values();
    const auto eig = diagonalize_all(p, ks, scheme, opts.threads);
    const std::size_t nk = ks.size();
    const auto nb = static_cast<std::size_t>(eig[0].values.size());

    BandStructure bs;
    bs.k_grid = k_grid;
    bs.scheme = scheme;
    bs.labels = field_labels(scheme);
    bs.values.assign(nb, std::vector<cplx>(nk));
    bs.vectors.assign(nb, std::vector<Eigen::VectorXcd>(nk));

    const std::size_t i0 = k_grid.zero_index();
    for (std::size_t b = 0; b < nb; ++b) {
        bs.values[b][i0] = eig[i0].values(static_cast<Eigen::Index>(b));
        bs.vectors[b][i0] = eig[i0].vectors.col(static_cast<Eigen::Index>(b));
    }
    bs.dark_branch = find_dark(eig[i0], scheme);

    auto walk = [&](std::size_t from, std::size_t to) {
        std::vector<Eigen::VectorXcd> prev(nb);
        for (std::size_t b = 0; b < nb; ++b) prev[b] = bs.vectors[b][from];
        const std::ptrdiff_t step = to > from ? 1 : -1;
        for (auto i = static_cast<std::ptrdiff_t>(from) + step; i != static_cast<std::ptrdiff_t>(to) + step; i += step) {
            const auto ui = static_cast<std::size_t>(i);
            auto [perm, weakest] = match_branches(prev, eig[ui]);
            if (opts.strict_tracking && weakest < 0.5) {
                std::ostringstream msg;
                msg << "branch tracking ambiguous at k = " << ks[ui] << " (best overlap " << weakest << ")";
                throw NumericalError(msg.str());
            }
            for (std::size_t b = 0; b < nb; ++b) {
                const auto col = static_cast<Eigen::Index>(perm[b]);
                bs.values[b][ui] = eig[ui].values(col);
                bs.vectors[b][ui] = eig[ui].vectors.col(col);
                prev[b] = bs.vectors[b][ui];
            }
        }
    };
    if (i0 + 1 < nk) walk(i0, nk - 1);
    if (i0 > 0) walk(i0, 0);
    return bs;
}

std::vector<Eigen::VectorXcd> dark_modes(const ValidatedParams& p, const std::vector<double>& k, Scheme scheme) {
    const bool herm = is_hermitian_case(p);
    const auto photons = photon_field_indices(scheme);

    const Eigenpairs e0 = diagonalize(scheme_matrix(p, 0.0, scheme), herm);
    Eigen::VectorXcd d0 = e0.vectors.col(find_dark(e0, scheme));
    int ref = photons[0];
    for (int i : photons)
        if (std::abs(d0(i)) > std::abs(d0(ref))) ref = i;
    if (std::abs(d0(ref)) > 0.0) d0 *= std::conj(d0(ref)) / std::abs(d0(ref));

    std::vector<std::size_t> order(k.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return k[a] < k[b]; });

    std::vector<Eigen::VectorXcd> out(k.size());
    auto follow = [&](auto begin, auto end) {
        Eigen::VectorXcd prev = d0;
        for (auto it = begin; it != end; ++it) {
            const std::size_t idx = *it;
            if (k[idx] == 0.0) {
                out[idx] = d0;
                continue;
            }
            const Eigenpairs e = diagonalize(scheme_matrix(p, k[idx], scheme), herm);
            Eigen::Index best = 0;
            double best_ov = -1.0;
            for (Eigen::Index b = 0; b < e.values.size(); ++b) {
                const double o = std::abs(prev.dot(e.vectors.col(b)));
                if (o > best_ov) {
                    best_ov = o;
                    best = b;
                }
            }
            Eigen::VectorXcd v = e.vectors.col(best);
            const cplx ov = d0.dot(v);
            if (std::abs(ov) > 0.0) v *= std::conj(ov) / std::abs(ov);
            out[idx] = v;
            prev = v;
        }
    };
    // split at the first non-negative momentum and walk outward on both sides
    const auto mid = std::find_if(order.begin(), order.end(), [&](std::size_t i) { return k[i] >= 0.0; });
    follow(mid, order.end());
    follow(std::make_reverse_iterator(mid), order.rend());
    return out;
}

// ---------------------------------------------------------------- summary

double fit_window(const ValidatedParams& p, Scheme scheme) {
    const double w2 = p.g() * p.g() + p.omega_total() * p.omega_total();
    // the nearest level coupled at order k bounds the analytic region
    const Eigen::VectorXcd ev = diagonalize(scheme_matrix(p, 0.0, scheme), p.gamma_e() == 0.0).values;
    std::vector<double> mod(static_cast<std::size_t>(ev.size()));
    for (Eigen::Index i = 0; i < ev.size(); ++i) mod[static_cast<std::size_t>(i)] = std::abs(ev(i));
    std::sort(mod.begin(), mod.end());
    const double gap = mod.size() > 1 && mod[1] > 0.0 ? mod[1] : w2;
    return 1e-3 * std::min(w2, gap) / p.c();
}

namespace {

void fill_gaps(PolaritonSummary& s, const std::vector<cplx>& k0_values, int dark) {
    const double ed = k0_values[static_cast<std::size_t>(dark)].real();
    double up = std::numeric_limits<double>::infinity(), lo = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < k0_values.size(); ++b) {
        if (static_cast<int>(b) == dark) continue;
        const double d = k0_values[b].real() - ed;
        if (d >= 0.0) up = std::min(up, d);
        else lo = std::min(lo, -d);
    }
    s.gap_upper = up;
    s.gap_lower = lo;
}

PolaritonSummary summarize(const BandStructure& b, const ValidatedParams& p, std::size_t i0, double h) {
    const auto& d = b.values[static_cast<std::size_t>(b.dark_branch)];
    const double fm2 = d[i0 - 2].real(), fm1 = d[i0 - 1].real(), f0 = d[i0].real();
    const double fp1 = d[i0 + 1].real(), fp2 = d[i0 + 2].real();

    PolaritonSummary s;
    s.k_fit = 2.0 * h;
    s.v_group = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    s.curvature = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
    const double scale = std::sqrt(p.g() * p.g() + p.omega_total() * p.omega_total());
    s.infinite_mass = std::abs(p.delta()) <= 1e-9 * scale || s.curvature == 0.0;
    s.m_eff = s.infinite_mass ? std::numeric_limits<double>::infinity() : 1.0 / s.curvature;
    s.dark_composition = b.vectors[static_cast<std::size_t>(b.dark_branch)][i0];
    s.dark_eigenvalue = d[i0];
    double phot = 0.0;
    for (int i : photon_field_indices(b.scheme)) phot += std::norm(s.dark_composition(i));
    s.photonic_fraction = phot;

    std::vector<cplx> at0;
    for (const auto& br : b.values) at0.push_back(br[i0]);
    fill_gaps(s, at0, b.dark_branch);
    return s;
}

}  // namespace

PolaritonSummary polariton_summary(const ValidatedParams& p, Scheme scheme) {
    if (!(p.omega_total() > 0.0)) throw ValidationError("omega_total", "no dark state: omega_R = omega_L = 0");
    const double h = 0.5 * fit_window(p, scheme);
    const auto grid = MomentumGrid::from_values({-2.0 * h, -h, 0.0, h, 2.0 * h});
    const BandStructure b = band_structure(p, grid, scheme);
    return summarize(b, p, 2, h);
}

PolaritonSummary polariton_summary(const BandStructure& b, const ValidatedParams& p) {
    const auto& k = b.k_grid.values();
    const std::size_t i0 = b.k_grid.zero_index();
    if (i0 < 2 || i0 + 2 >= k.size()) throw ValidationError("k_grid", "needs two points on each side of k = 0");
    const double h = k[i0 + 1];
    for (std::size_t i = i0 - 2; i < i0 + 2; ++i)
        if (std::abs((k[i + 1] - k[i]) - h) > 1e-9 * h) throw ValidationError("k_grid", "stencil points must be equispaced");
    return summarize(b, p, i0, h);
}

namespace formulas {

double eit_speed(const ValidatedParams& p) {
    const double o2 = p.omega_total() * p.omega_total();
    return o2 / (o2 + p.g() * p.g()) * p.c();
}

double eit_mass(const ValidatedParams& p) {
    const double g2 = p.g() * p.g(), o2 = p.omega_total() * p.omega_total();
    const double w = g2 + o2;
    return w * w * w / (2.0 * p.c() * p.c() * g2 * o2 * p.delta());
}

double stationary_speed(const ValidatedParams& p) {
    const double r2 = p.omega_R() * p.omega_R(), l2 = p.omega_L() * p.omega_L();
    return (r2 - l2) / (r2 + l2 + p.g() * p.g()) * p.c();
}

double stationary_mass(const ValidatedParams& p) {
    const double g2 = p.g() * p.g(), o2 = p.omega_total() * p.omega_total();
    return g2 * (g2 + o2) / (2.0 * p.c() * p.c() * o2 * p.delta());
}

std::pair<double, double> bright_eigenvalues(double g, double omega, double delta) {
    const double r = std::sqrt(delta * delta + 4.0 * g * g + 4.0 * omega * omega);
    return {0.5 * delta - 0.5 * r, 0.5 * delta + 0.5 * r};
}

}  // namespace formulas

// ---------------------------------------------------------------- +/- basis

PmBasis pm_basis_transform(const ValidatedParams& p) {
    const double om = p.omega_total();
    if (!(om > 0.0)) throw ValidationError("omega_total", "rotation undefined for omega_R = omega_L = 0");
    const double a = p.omega_R() / om, b = p.omega_L() / om;
    PmBasis out;
    out.rotation.setZero();
    out.rotation(0, 0) = a;
    out.rotation(0, 1) = b;
    out.rotation(1, 0) = b;
    out.rotation(1, 1) = -a;
    out.rotation(2, 2) = 1.0;
    out.rotation(3, 3) = a;
    out.rotation(3, 4) = b;
    out.rotation(4, 3) = b;
    out.rotation(4, 4) = -a;
    out.u = p.c() * (a * a - b * b);
    return out;
}

Eigen::VectorXcd PmBasis::transform(const Eigen::VectorXcd& v) const {
    if (v.size() != 5) throw ValidationError("vector", "expected 5 components");
    return rotation.cast<cplx>() * v;
}

Eigen::MatrixXcd PmBasis::transform(const Eigen::MatrixXcd& m) const {
    if (m.rows() != 5 || m.cols() != 5) throw ValidationError("matrix", "expected 5x5");
    const Eigen::Matrix<cplx, 5, 5> r = rotation.cast<cplx>();
    return r * m * r.transpose();
}

Eigen::Matrix3cd symmetric_sector_matrix(const ValidatedParams& p, double k) {
    const PmBasis pm = pm_basis_transform(p);
    Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
    m(0, 0) = pm.u * k;
    m(0, 1) = m(1, 0) = p.g();
    m(1, 1) = p.complex_detuning();
    m(1, 2) = m(2, 1) = p.omega_total();
    return m;
}

Eigen::Matrix2cd antisymmetric_sector_matrix(const ValidatedParams& p, double k) {
    const PmBasis pm = pm_basis_transform(p);
    Eigen::Matrix2cd m;
    m << -pm.u * k, p.g(), p.g(), p.complex_detuning();
    return m;
}

// ---------------------------------------------------------------- loss

LossSpectrum loss_spectrum(const ValidatedParams& p, const MomentumGrid& k_grid, Scheme scheme,
                           std::optional<double> exposure_time) {
    if (!(p.gamma_e() > 0.0)) throw ValidationError("gamma_e", "loss spectrum needs gamma_e > 0");
    const double tau = exposure_time.value_or(1.0 / p.gamma_e());
    if (!(tau > 0.0)) throw ValidationError("exposure_time", "must be > 0");

    const BandStructure b = band_structure(p, k_grid, scheme, {.threads = 1, .strict_tracking = false});
    LossSpectrum out;
    out.exposure_time = tau;
    out.k = k_grid.values();
    const auto& d = b.values[static_cast<std::size_t>(b.dark_branch)];
    for (const auto& v : d) {
        out.re_dark.push_back(v.real());
        out.im_dark.push_back(std::min(0.0, v.imag()));
    }

    // half-maximum crossings of exp(2 Im eps tau), interpolated linearly
    const double target = std::log(0.5) / (2.0 * tau);
    const std::size_t i0 = k_grid.zero_index();
    auto crossing = [&](std::ptrdiff_t step) -> std::optional<std::pair<double, std::size_t>> {
        for (auto i = static_cast<std::ptrdiff_t>(i0); i + step >= 0 && i + step < static_cast<std::ptrdiff_t>(d.size()); i += step) {
            const auto a = static_cast<std::size_t>(i), c = static_cast<std::size_t>(i + step);
            if (out.im_dark[c] < target) {
                const double t = (target - out.im_dark[a]) / (out.im_dark[c] - out.im_dark[a]);
                return std::make_pair(out.k[a] + t * (out.k[c] - out.k[a]), c);
            }
        }
        return std::nullopt;
    };
    const auto hi = crossing(1), lo = crossing(-1);
    if (!hi || !lo) {
        out.width_k = std::numeric_limits<double>::quiet_NaN();
        out.width_frequency = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    out.width_k = hi->first - lo->first;
    double fmin = std::numeric_limits<double>::infinity(), fmax = -fmin;
    for (std::size_t i = lo->second; i <= hi->second; ++i) {
        fmin = std::min(fmin, out.re_dark[i]);
        fmax = std::max(fmax, out.re_dark[i]);
    }
    out.width_frequency = fmax - fmin;
    return out;
}

// ---------------------------------------------------------------- adiabaticity

AdiabaticityReport adiabaticity_check(const ControlSchedule& schedule, const ValidatedParams& p, double v_ref,
                                      Scheme scheme, std::size_t samples) {
    AdiabaticityReport rep;
    rep.min_gap = std::numeric_limits<double>::infinity();
    const double T = schedule.total_duration();
    const std::size_t n = T > 0.0 ? std::max<std::size_t>(samples, 2) : 1;
    const double g4 = std::pow(p.g(), 4);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : T * static_cast<double>(i) / static_cast<double>(n - 1);
        // the last sample reports the final settings
        const ControlSample cs = i + 1 == n ? schedule.final() : schedule.sample(t);
        const ValidatedParams pt = p.with_controls(cs.omega_R, cs.omega_L);
        if (!(pt.omega_total() > 0.0))
            throw ValidationError("schedule", "controls vanish at t = " + std::to_string(t) + ": no dark state");
        const Eigenpairs e = diagonalize(scheme_matrix(pt, 0.0, scheme), is_hermitian_case(pt));
        const int dark = find_dark(e, scheme);
        PolaritonSummary tmp;
        std::vector<cplx> vals(e.values.data(), e.values.data() + e.values.size());
        fill_gaps(tmp, vals, dark);

        AdiabaticitySample s{t, cs.omega_R, cs.omega_L, tmp.gap_upper, tmp.gap_lower, 0.0, false};
        s.interaction_scale = v_ref * g4 / std::pow(pt.omega_total(), 4);
        const double gap = std::min(s.gap_upper, s.gap_lower);
        s.flagged = s.interaction_scale >= rep.threshold_ratio * gap && s.interaction_scale > 0.0;
        rep.min_gap = std::min(rep.min_gap, gap);
        rep.any_flagged = rep.any_flagged || s.flagged;
        rep.samples.push_back(s);
    }
    return rep;
}

}  // namespace plab
