#include "plab/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "plab/errors.hpp"
#include "plab/simd.hpp"
#include "plab/spectra.hpp"

namespace plab {

MultiFieldState MultiFieldState::zeros(const SpatialGrid& grid) {
    MultiFieldState s{grid, {}, 0.0};
    for (auto& f : s.fields) f.assign(grid.size(), cplx{});
    return s;
}

double MultiFieldState::field_norm(int f) const {
    const auto& buf = fields[static_cast<std::size_t>(f)];
    return simd::kernels().norm_sq(buf.data(), buf.size()) * grid.spacing();
}

double MultiFieldState::norm() const {
    double n = 0.0;
    for (int f = 0; f < 5; ++f) n += field_norm(f);
    return n;
}

double MultiFieldState::centroid() const {
    double w = 0.0, wx = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double d = 0.0;
        for (const auto& f : fields) d += std::norm(f[i]);
        w += d;
        wx += d * grid.x(i);
    }
    return w > 0.0 ? wx / w : 0.0;
}

double MultiFieldState::plus_centroid(double omega_R, double omega_L) const {
    const double om = std::hypot(omega_R, omega_L);
    if (!(om > 0.0)) return centroid();
    const double a = omega_R / om, b = omega_L / om;
    double w = 0.0, wx = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = std::norm(a * fields[ER][i] + b * fields[EL][i]);
        w += d;
        wx += d * grid.x(i);
    }
    return w > 0.0 ? wx / w : 0.0;
}

double dt_max(const ValidatedParams& p, const SpatialGrid& grid, double omega_max) {
    const double rate =
        std::max({p.c() * grid.k_max(), std::abs(p.delta()) + p.gamma_e(), p.g(), omega_max});
    return 0.1 / rate;
}

// ---------------------------------------------------------------- propagator

SplitStepPropagator::SplitStepPropagator(const ValidatedParams& p, const SpatialGrid& grid)
    : p_(p), grid_(grid), plan_(grid.size()), k_(grid.fft_wavenumbers()) {}

double SplitStepPropagator::dt_max(double omega_max) const { return plab::dt_max(p_, grid_, omega_max); }

void SplitStepPropagator::check_dt(const ControlSchedule& schedule, double dt) const {
    const double bound = dt_max(std::max(schedule.max_omega_total(), p_.omega_total()));
    if (!(dt > 0.0) || dt > bound * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "dt = " << dt << " outside (0, " << bound << "]; use dt <= " << bound;
        throw ValidationError("dt", msg.str());
    }
}

const std::vector<cplx>& SplitStepPropagator::phases(double tau, int sign) {
    for (auto& c : phase_cache_) {
        if (c.tau == tau) return sign > 0 ? c.right : c.left;
    }
    auto& c = phase_cache_[phase_next_];
    phase_next_ ^= 1;
    c.tau = tau;
    const std::size_t n = k_.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    c.right.resize(n);
    c.left.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ph = p_.c() * k_[i] * tau;
        c.right[i] = std::polar(inv_n, -ph);
        c.left[i] = std::polar(inv_n, ph);
    }
    return sign > 0 ? c.right : c.left;
}

void SplitStepPropagator::advect(MultiFieldState& s, double tau) {
    const auto& kern = simd::kernels();
    const std::size_t n = grid_.size();
    const auto& pr = phases(tau, +1);
    const auto& pl = phases(tau, -1);
    plan_.forward(s.fields[ER].data());
    kern.cmul_inplace(s.fields[ER].data(), pr.data(), n);
    plan_.backward(s.fields[ER].data());
    plan_.forward(s.fields[EL].data());
    kern.cmul_inplace(s.fields[EL].data(), pl.data(), n);
    plan_.backward(s.fields[EL].data());
}

void SplitStepPropagator::couple(MultiFieldState& s, double omega_R, double omega_L, double dt) {
    auto& cc = coupling_cache_;
    if (cc.omega_R != omega_R || cc.omega_L != omega_L || cc.dt != dt) {
        const ValidatedParams pt = p_.with_controls(omega_R, omega_L);
        const Eigen::Matrix<cplx, 5, 5> m = stationary_matrix(pt, 0.0);
        Eigen::Matrix<cplx, 5, 5> u;
        if (pt.gamma_e() == 0.0) {
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix<cplx, 5, 5>> es(m);
            const auto& v = es.eigenvectors();
            Eigen::Matrix<cplx, 5, 1> ph;
            for (int i = 0; i < 5; ++i) ph(i) = std::exp(cplx(0.0, -es.eigenvalues()(i) * dt));
            u = v * ph.asDiagonal() * v.adjoint();
        } else {
            Eigen::ComplexEigenSolver<Eigen::Matrix<cplx, 5, 5>> es(m);
            const auto& v = es.eigenvectors();
            Eigen::Matrix<cplx, 5, 1> ph;
            for (int i = 0; i < 5; ++i) ph(i) = std::exp(cplx(0.0, -1.0) * es.eigenvalues()(i) * dt);
            u = v * ph.asDiagonal() * v.inverse();
        }
        for (int r = 0; r < 5; ++r)
            for (int c = 0; c < 5; ++c) cc.u[static_cast<std::size_t>(r * 5 + c)] = u(r, c);
        cc.omega_R = omega_R;
        cc.omega_L = omega_L;
        cc.dt = dt;
    }
    std::array<cplx*, 5> ptrs{};
    for (int f = 0; f < 5; ++f) ptrs[static_cast<std::size_t>(f)] = s.fields[static_cast<std::size_t>(f)].data();
    simd::kernels().mix5(ptrs, cc.u.data(), grid_.size());
}

void SplitStepPropagator::step(MultiFieldState& s, const ControlSchedule& schedule, double dt) {
    evolve(s, schedule, dt, 1);
}

void SplitStepPropagator::evolve(MultiFieldState& s, const ControlSchedule& schedule, double dt, std::size_t n) {
    if (n == 0) return;
    check_dt(schedule, dt);
    if (!(s.grid == grid_)) throw ValidationError("state", "grid differs from the propagator grid");
    const double t0 = s.time;
    advect(s, 0.5 * dt);
    for (std::size_t i = 0; i < n; ++i) {
        const ControlSample c = schedule.sample(t0 + (static_cast<double>(i) + 0.5) * dt);
        couple(s, c.omega_R, c.omega_L, dt);
        advect(s, i + 1 == n ? 0.5 * dt : dt);
    }
    s.time = t0 + static_cast<double>(n) * dt;
}

// ---------------------------------------------------------------- dark modes

MultiFieldState prepare_dark_pulse(const ValidatedParams& p, const SpatialGrid& grid, const PulseSpec& pulse) {
    if (!(pulse.width > 0.0)) throw ValidationError("pulse.width", "must be > 0");
    if (!(p.omega_total() > 0.0)) throw ValidationError("omega_total", "no dark state: omega_R = omega_L = 0");
    const std::size_t n = grid.size();
    ComplexBuffer env(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = grid.x(i) - pulse.center;
        env[i] = std::polar(std::exp(-d * d / (2.0 * pulse.width * pulse.width)), pulse.carrier_k * d);
    }
    FftPlan plan(n);
    plan.forward(env.data());

    const auto ks = grid.fft_wavenumbers();
    const auto dark = dark_modes(p, ks, Scheme::Stationary);
    MultiFieldState s = MultiFieldState::zeros(grid);
    for (std::size_t i = 0; i < n; ++i)
        for (int f = 0; f < 5; ++f) s.fields[static_cast<std::size_t>(f)][i] = env[i] * dark[i](f);
    for (auto& f : s.fields) plan.backward(f.data());

    const double scale = 1.0 / std::sqrt(s.norm());
    for (auto& f : s.fields)
        for (auto& v : f) v *= scale;
    return s;
}

DarkProjection project_dark(const MultiFieldState& s, const ValidatedParams& p) {
    const std::size_t n = s.grid.size();
    FftPlan plan(n);
    std::array<ComplexBuffer, 5> hat = s.fields;
    for (auto& f : hat) plan.forward(f.data());
    const auto dark = dark_modes(p, s.grid.fft_wavenumbers(), Scheme::Stationary);

    // Parseval: sum_x |f|^2 dx = (dx / n) sum_k |F_k|^2
    const double w = s.grid.spacing() / static_cast<double>(n);
    DarkProjection out;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& d = dark[i];
        cplx num{}, den{};
        for (int f = 0; f < 5; ++f) {
            num += d(f) * hat[static_cast<std::size_t>(f)][i];
            den += d(f) * d(f);
        }
        const double c2 = std::norm(num / den);
        out.dark_norm += c2 * w;
        out.dark_photonic_norm += c2 * (std::norm(d(ER)) + std::norm(d(EL))) * w;
    }
    return out;
}

std::pair<double, double> dark_fraction_and_coupling_scale(const ValidatedParams& p) {
    const double om = p.omega_total();
    if (!(om > 0.0)) throw ValidationError("omega_total", "no dark state: omega_R = omega_L = 0");
    const double g2 = p.g() * p.g(), o2 = om * om;
    return {g2 / (g2 + o2), (g2 * g2) / (o2 * o2)};
}

// ---------------------------------------------------------------- protocol

namespace {

void check_boundary(const MultiFieldState& s, const ProtocolOptions& o) {
    const std::size_t n = s.grid.size();
    const auto band = std::max<std::size_t>(1, static_cast<std::size_t>(o.boundary_fraction * static_cast<double>(n)));
    double edge = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        for (const auto& f : s.fields) d += std::norm(f[i]);
        total += d;
        if (i < band || i >= n - band) edge += d;
    }
    if (edge > o.boundary_tolerance * total) {
        std::ostringstream msg;
        msg << "pulse reached the grid boundary at t = " << s.time << " (edge fraction " << edge / total
            << "); enlarge the grid or move the pulse";
        throw NumericalError(msg.str());
    }
}

TraceSample trace_sample(const MultiFieldState& s, const ControlSchedule& sch) {
    const double norm = s.norm();
    const ControlSample c = sch.sample(s.time);
    return {s.time, norm, norm > 0.0 ? s.photonic_norm() / norm : 0.0, s.centroid(), c.omega_R, c.omega_L};
}

}  // namespace

ProtocolReport run_protocol(const ValidatedParams& p, const SpatialGrid& grid, const ControlSchedule& schedule,
                            const PulseSpec& pulse, const ProtocolOptions& opts) {
    if (schedule.stages().size() < 2) throw ValidationError("schedule", "needs at least two stages");
    if (pulse.center - 4.0 * pulse.width < 0.0 || pulse.center + 4.0 * pulse.width > grid.length())
        throw ValidationError("pulse", "pulse must sit at least 4 widths inside the grid");
    if (!(opts.trace_interval > 0.0)) throw ValidationError("trace_interval", "must be > 0");

    const ControlSample c0 = schedule.initial();
    const ValidatedParams p0 = p.with_controls(c0.omega_R, c0.omega_L);
    MultiFieldState s = prepare_dark_pulse(p0, grid, pulse);

    ProtocolReport rep;
    rep.input_norm = s.norm();
    rep.input_photonic_norm = s.photonic_norm();
    rep.trace.push_back(trace_sample(s, schedule));

    SplitStepPropagator prop(p, grid);
    const double bound = prop.dt_max(std::max(schedule.max_omega_total(), p.omega_total()));
    if (opts.dt > bound) {
        std::ostringstream msg;
        msg << "dt = " << opts.dt << " exceeds the stability bound; use dt <= " << bound;
        throw ValidationError("dt", msg.str());
    }
    const double dt_target = opts.dt > 0.0 ? opts.dt : bound;

    const auto& stages = schedule.stages();
    for (std::size_t si = 0; si < stages.size(); ++si) {
        const Stage& st = stages[si];
        StageSummary sum;
        sum.label = st.label.empty() ? "stage" + std::to_string(si) : st.label;
        sum.t_start = schedule.stage_start(si);
        sum.t_end = sum.t_start + st.duration;
        sum.plus_centroid_start = s.plus_centroid(st.omega_R.start(), st.omega_L.start());
        if (si + 1 == stages.size()) rep.stored_norm = s.norm();

        if (st.duration > 0.0) {
            const auto n = static_cast<std::size_t>(std::ceil(st.duration / dt_target * (1.0 - 1e-12)));
            const double dt = st.duration / static_cast<double>(n);
            const auto chunk = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opts.trace_interval / dt)));
            sum.steps = n;
            sum.dt = dt;
            for (std::size_t done = 0; done < n;) {
                const std::size_t m = std::min(chunk, n - done);
                s.time = sum.t_start + static_cast<double>(done) * dt;
                prop.evolve(s, schedule, dt, m);
                done += m;
                s.time = sum.t_start + static_cast<double>(done) * dt;
                rep.trace.push_back(trace_sample(s, schedule));
                check_boundary(s, opts);
            }
        }
        s.time = sum.t_end;
        const double norm = s.norm();
        sum.norm_end = norm;
        sum.photonic_fraction_end = norm > 0.0 ? s.photonic_norm() / norm : 0.0;
        sum.plus_centroid_end = s.plus_centroid(st.omega_R.end(), st.omega_L.end());
        rep.stages.push_back(sum);
    }

    const ControlSample cf = schedule.final();
    const ValidatedParams pf = p.with_controls(cf.omega_R, cf.omega_L);
    rep.final_norm = s.norm();
    rep.retrieved_norm = s.photonic_norm();
    rep.right_moving_fraction = rep.retrieved_norm > 0.0 ? s.field_norm(ER) / rep.retrieved_norm : 0.0;
    if (pf.omega_total() > 0.0 && rep.input_photonic_norm > 0.0) {
        rep.retrieval_efficiency = project_dark(s, pf).dark_photonic_norm / rep.input_photonic_norm;
    }
    rep.output = std::move(s);
    return rep;
}

nlohmann::json to_json(const ProtocolReport& r) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& s : r.stages) {
        stages.push_back({{"label", s.label},
                          {"t_start", s.t_start},
                          {"t_end", s.t_end},
                          {"steps", s.steps},
                          {"dt", s.dt},
                          {"norm_end", s.norm_end},
                          {"photonic_fraction_end", s.photonic_fraction_end},
                          {"plus_centroid_start", s.plus_centroid_start},
                          {"plus_centroid_end", s.plus_centroid_end},
                          {"plus_drift", s.plus_drift()}});
    }
    return {{"input_norm", r.input_norm},
            {"input_photonic_norm", r.input_photonic_norm},
            {"stored_norm", r.stored_norm},
            {"retrieved_norm", r.retrieved_norm},
            {"retrieval_efficiency", r.retrieval_efficiency},
            {"right_moving_fraction", r.right_moving_fraction},
            {"final_norm", r.final_norm},
            {"stages", stages}};
}

// ---------------------------------------------------------------- slow light

SlowLightResult slow_light_delay(const ValidatedParams& p, const SpatialGrid& grid, const PulseSpec& pulse,
                                 double duration, double medium_length) {
    if (p.omega_L() != 0.0) throw ValidationError("omega_L", "slow-light runs use the EIT configuration omega_L = 0");
    if (!(duration > 0.0)) throw ValidationError("duration", "must be > 0");
    if (!(medium_length > 0.0)) throw ValidationError("medium_length", "must be > 0");

    SlowLightResult r;
    r.medium_length = medium_length;
    r.v_expected = formulas::eit_speed(p);

    const ControlSchedule sch({Stage{duration, Profile::constant(p.omega_R()), Profile::constant(0.0),
                                     StageFlag::Adiabatic, "propagate"}});
    MultiFieldState s = prepare_dark_pulse(p, grid, pulse);
    const double x0 = s.centroid();
    SplitStepPropagator prop(p, grid);
    const auto n = static_cast<std::size_t>(std::ceil(duration / prop.dt_max(p.omega_total()) * (1.0 - 1e-12)));
    prop.evolve(s, sch, duration / static_cast<double>(n), n);
    check_boundary(s, ProtocolOptions{});
    r.v_measured = (s.centroid() - x0) / duration;

    r.delay_expected = medium_length / r.v_expected - medium_length / p.c();
    r.delay_measured = medium_length / r.v_measured - medium_length / p.c();
    r.relative_error = std::abs(r.delay_measured - r.delay_expected) / std::abs(r.delay_expected);

    const PolaritonSummary ps = polariton_summary(p, Scheme::Eit);
    const double window = std::min(ps.gap_upper, ps.gap_lower) / p.c();
    r.bandwidth_warning = 1.0 / pulse.width > 0.1 * window;
    return r;
}

}  // namespace plab
