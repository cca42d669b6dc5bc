#include "plab/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "plab/core.hpp"
#include "plab/errors.hpp"
#include "plab/manybody.hpp"
#include "plab/phasematch.hpp"
#include "plab/propagation.hpp"
#include "plab/schedule.hpp"
#include "plab/simd.hpp"
#include "plab/spectra.hpp"

#ifndef PLAB_VERSION
#define PLAB_VERSION "0.0.0"
#endif

namespace plab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- helpers

std::vector<double> parse_range(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.size() != 4) throw ValidationError("range", "expected from:to:lin|log:count, got '" + spec + "'");
    double a = 0, b = 0;
    long n = 0;
    try {
        std::size_t used = 0;
        a = std::stod(parts[0], &used);
        if (used != parts[0].size()) throw std::invalid_argument("from");
        b = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument("to");
        n = std::stol(parts[3], &used);
        if (used != parts[3].size()) throw std::invalid_argument("count");
    } catch (const std::exception&) {
        throw ValidationError("range", "non-numeric bound or count in '" + spec + "'");
    }
    if (n < 0) throw ValidationError("range", "count must be >= 0");
    const bool log = parts[2] == "log";
    if (!log && parts[2] != "lin") throw ValidationError("range", "spacing must be 'lin' or 'log'");
    if (log && !(a > 0.0 && b > 0.0)) throw ValidationError("range", "log spacing needs positive bounds");
    std::vector<double> v;
    for (long i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        v.push_back(log ? std::exp(std::log(a) + t * (std::log(b) - std::log(a))) : a + t * (b - a));
    }
    return v;
}

std::string fnv1a64_hex(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ValidationError("file", "cannot read '" + file.string() + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 14];
    while (in) {
        in.read(buf, sizeof buf);
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json num_json(double v) {
    if (std::isfinite(v)) return v;
    return num(v);
}

class Outputs {
public:
    explicit Outputs(const Context& ctx) : ctx_(ctx) {}

    fs::path open(const std::string& rel, std::ofstream& os) {
        const fs::path full = ctx_.out_dir / rel;
        if (full.has_parent_path()) fs::create_directories(full.parent_path());
        os.open(full, std::ios::binary | std::ios::trunc);
        if (!os) throw ValidationError("out", "cannot write '" + full.string() + "'");
        names_.push_back(rel);
        return full;
    }

    void write_json(const std::string& rel, const json& j) {
        std::ofstream os;
        open(rel, os);
        os << j.dump(2) << '\n';
    }

    std::vector<OutputFile> finish() const {
        std::vector<OutputFile> out;
        for (const auto& n : names_) {
            const fs::path full = ctx_.out_dir / n;
            out.push_back({n, fs::file_size(full), fnv1a64_hex(full)});
        }
        return out;
    }

private:
    const Context& ctx_;
    std::vector<std::string> names_;
};

void csv_row(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
}

// run a set of independent jobs on up to `threads` workers; results stay in index order
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& job) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned t = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (t == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < t; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

PulseSpec default_pulse(const SpatialGrid& grid) { return {0.15 * grid.length(), grid.length() / 50.0, 0.0}; }

json get_required(const json& req, const char* key) {
    if (!req.contains(key)) throw ValidationError(key, "missing from request");
    return req.at(key);
}

// ---------------------------------------------------------------- dispersion

std::vector<OutputFile> run_dispersion(const json& req, const Context& ctx) {
    const RunConfig cfg = run_config_from_json(get_required(req, "config"));
    const Scheme scheme = scheme_from_string(req.value("scheme", std::string("stationary")));
    const double kmin = req.at("kmin").get<double>(), kmax = req.at("kmax").get<double>();
    const auto points = req.at("points").get<std::size_t>();
    if (std::abs(kmin + kmax) > 1e-15 * std::abs(kmax)) throw ValidationError("kmin", "k range must be symmetric: kmin = -kmax");
    if (points % 2 == 0 || points < 3) throw ValidationError("points", "must be odd and >= 3");
    const ValidatedParams p = validate_params(cfg.params, {.require_dark_state = true});
    const MomentumGrid grid = MomentumGrid::symmetric(kmax, points);
    const BandStructure bs = band_structure(p, grid, scheme, {.threads = ctx.threads, .strict_tracking = true});

    Outputs out(ctx);
    {
        std::ofstream os;
        out.open(req.value("out", std::string("bands.csv")), os);
        std::vector<std::string> head{"k", "branch_index", "re_eigenvalue", "im_eigenvalue"};
        for (const auto& l : bs.labels) head.push_back("abs2_" + l);
        head.push_back("dark");
        csv_row(os, head);
        for (std::size_t i = 0; i < grid.size(); ++i)
            for (std::size_t b = 0; b < bs.branch_count(); ++b) {
                std::vector<std::string> row{num(grid[i]), std::to_string(b), num(bs.values[b][i].real()),
                                             num(bs.values[b][i].imag())};
                const auto& v = bs.vectors[b][i];
                for (Eigen::Index f = 0; f < v.size(); ++f) row.push_back(num(std::norm(v(f))));
                row.push_back(static_cast<int>(b) == bs.dark_branch ? "1" : "0");
                csv_row(os, row);
            }
    }

    const PolaritonSummary s = polariton_summary(p, scheme);
    json summary = {{"scheme", to_string(scheme)},
                    {"dark_branch", bs.dark_branch},
                    {"v_group", s.v_group},
                    {"m_eff", num_json(s.m_eff)},
                    {"infinite_mass", s.infinite_mass},
                    {"gap_upper", s.gap_upper},
                    {"gap_lower", s.gap_lower},
                    {"photonic_fraction", s.photonic_fraction},
                    {"k_fit", s.k_fit}};
    if (scheme == Scheme::Eit) {
        summary["v_formula"] = formulas::eit_speed(p);
        summary["m_formula"] = num_json(formulas::eit_mass(p));
    } else {
        summary["v_formula"] = formulas::stationary_speed(p);
        if (p.omega_R() == p.omega_L()) summary["m_formula"] = num_json(formulas::stationary_mass(p));
    }
    out.write_json(req.value("summary", std::string("dispersion_summary.json")), summary);

    if (req.value("loss", false)) {
        if (!(p.gamma_e() > 0.0)) throw ValidationError("gamma_e", "loss spectra need gamma_e > 0");
        const ValidatedParams pe = p.with_controls(p.omega_total(), 0.0);
        const LossSpectrum le = loss_spectrum(pe, grid, Scheme::Eit);
        const LossSpectrum ls = loss_spectrum(p, grid, Scheme::Stationary);
        std::ofstream os;
        out.open(req.value("loss_out", std::string("loss.csv")), os);
        csv_row(os, {"k", "im_dark_eit", "im_dark_stationary", "profile_eit", "profile_stationary"});
        for (std::size_t i = 0; i < le.k.size(); ++i)
            csv_row(os, {num(le.k[i]), num(le.im_dark[i]), num(ls.im_dark[i]),
                         num(std::exp(2.0 * le.im_dark[i] * le.exposure_time)),
                         num(std::exp(2.0 * ls.im_dark[i] * ls.exposure_time))});
        out.write_json("loss_summary.json", {{"exposure_time", le.exposure_time},
                                             {"eit_width_k", num_json(le.width_k)},
                                             {"eit_width_frequency", num_json(le.width_frequency)},
                                             {"stationary_width_k", num_json(ls.width_k)},
                                             {"stationary_width_frequency", num_json(ls.width_frequency)}});
    }
    return out.finish();
}

// ---------------------------------------------------------------- protocol

struct ProtocolInputs {
    RunConfig cfg;
    ControlSchedule schedule;
    PulseSpec pulse;
    ProtocolOptions opts;
};

ProtocolInputs protocol_inputs(const json& req) {
    ProtocolInputs in;
    in.cfg = run_config_from_json(get_required(req, "config"));
    in.schedule = schedule_from_json(get_required(req, "schedule"));
    in.pulse = in.cfg.pulse.value_or(default_pulse(in.cfg.grid));
    in.opts.dt = req.value("dt", 0.0);
    in.opts.trace_interval = req.value("trace_interval", 1.0);
    return in;
}

std::vector<OutputFile> run_protocol_cmd(const json& req, const Context& ctx) {
    const ProtocolInputs in = protocol_inputs(req);
    const ValidatedParams p = validate_params(in.cfg.params);
    const ProtocolReport rep = run_protocol(p, in.cfg.grid, in.schedule, in.pulse, in.opts);
    const AdiabaticityReport adi = adiabaticity_check(in.schedule, p, in.cfg.v_ref, Scheme::Stationary);

    Outputs out(ctx);
    json j = to_json(rep);
    j["adiabaticity"] = {{"min_gap", adi.min_gap}, {"any_flagged", adi.any_flagged},
                         {"threshold_ratio", adi.threshold_ratio}, {"v_ref", in.cfg.v_ref}};
    out.write_json(req.value("out", std::string("report.json")), j);
    {
        std::ofstream os;
        out.open(req.value("trace", std::string("trace.csv")), os);
        csv_row(os, {"t", "norm", "photonic_fraction", "centroid", "omega_R", "omega_L"});
        for (const auto& t : rep.trace)
            csv_row(os, {num(t.t), num(t.norm), num(t.photonic_fraction), num(t.centroid), num(t.omega_R),
                         num(t.omega_L)});
    }
    if (req.contains("envelope")) {
        std::ofstream os;
        out.open(req.at("envelope").get<std::string>(), os);
        csv_row(os, {"x", "abs2_E_R", "abs2_E_L", "abs2_S", "abs2_P_R", "abs2_P_L"});
        const auto& s = rep.output;
        for (std::size_t i = 0; i < s.grid.size(); ++i) {
            std::vector<std::string> row{num(s.grid.x(i))};
            for (const auto& f : s.fields) row.push_back(num(std::norm(f[i])));
            csv_row(os, row);
        }
    }
    return out.finish();
}

// ---------------------------------------------------------------- manybody

std::vector<OutputFile> run_manybody(const json& req, const Context& ctx) {
    const LatticeSpec spec = lattice_spec_from_json(get_required(req, "spec"));
    std::vector<std::string> obs = req.value("observables", std::vector<std::string>{"energy", "g2"});
    for (const auto& o : obs)
        if (o != "energy" && o != "g2" && o != "K") throw ValidationError("observables", "unknown observable '" + o + "'");
    auto wants = [&](const char* o) { return std::find(obs.begin(), obs.end(), o) != obs.end(); };

    const GroundStateResult gs = ground_state(spec, ctx.threads);
    json j = {{"spec", to_json(spec)}, {"dimension", gs.state.size()}, {"residual", gs.residual}};
    if (wants("energy")) j["energy"] = gs.energy;
    if (wants("g2") || wants("K")) {
        j["density"] = gs.density;
        j["g2"] = to_json(gs.g2);
        std::vector<double> tg;
        for (double r : gs.g2.r) tg.push_back(tg_g2(r, gs.g2.rho0));
        j["g2"]["tg_reference"] = tg;
    }
    if (wants("K")) {
        LuttingerOptions lo;
        const std::string method =
            req.value("k_method", std::string(spec.boundary == Boundary::Periodic ? "structure" : "envelope"));
        if (method == "structure") lo.method = LuttingerMethod::StructureFactor;
        else if (method != "envelope") throw ValidationError("k_method", "expected 'envelope' or 'structure'");
        const LuttingerFit f = fit_luttinger_K(gs.g2, lo);
        j["K"] = {{"value", f.K}, {"method", method}, {"amplitude", f.amplitude}, {"r_min", f.r_min},
                  {"r_max", f.r_max}, {"residual", f.residual}, {"points", f.points}};
    }
    Outputs out(ctx);
    out.write_json(req.value("out", std::string("result.json")), j);
    return out.finish();
}

// ---------------------------------------------------------------- bethe

std::vector<OutputFile> run_bethe(const json& req, const Context& ctx) {
    const auto gammas = parse_range(req.value("gamma_grid", std::string("0.1:100:log:20")));
    BetheOptions bo;
    bo.nodes = req.value("nodes", bo.nodes);
    std::vector<BetheResult> res(gammas.size());
    parallel_for(gammas.size(), ctx.threads, [&](std::size_t i) { res[i] = lieb_liniger_energy(gammas[i], bo); });
    Outputs out(ctx);
    std::ofstream os;
    out.open(req.value("out", std::string("e_of_gamma.csv")), os);
    csv_row(os, {"gamma", "e", "lambda", "quad_error"});
    for (const auto& r : res) csv_row(os, {num(r.gamma), num(r.e), num(r.lambda), num(r.quad_error)});
    os.close();
    return out.finish();
}

// ---------------------------------------------------------------- phasematch

std::vector<OutputFile> run_phasematch(const json& req, const Context& ctx) {
    const double lp = get_required(req, "lambda_probe").get<double>();
    const double lc = get_required(req, "lambda_control").get<double>();
    json j;
    if (req.value("collinear", false)) {
        const BeamSet b = solve_collinear(lp, lc);
        j = {{"geometry", "collinear"}, {"beams", to_json(b)}, {"residuals", to_json(verify(b))}};
    } else {
        j = to_json(solve_coplanar(lp, lc));
        j["geometry"] = "coplanar";
    }
    Outputs out(ctx);
    out.write_json(req.value("out", std::string("beams.json")), j);
    return out.finish();
}

// ---------------------------------------------------------------- sweep

json& json_path(json& root, const std::string& path) {
    json* cur = &root;
    std::stringstream ss(path);
    for (std::string key; std::getline(ss, key, '.');) {
        if (!cur->is_object() || !cur->contains(key)) throw ValidationError("param", "no field '" + path + "' in the config");
        cur = &(*cur)[key];
    }
    return *cur;
}

std::vector<OutputFile> run_sweep(const json& req, const Context& ctx) {
    const std::string command = get_required(req, "command").get<std::string>();
    const std::string param = get_required(req, "param").get<std::string>();
    const auto values = parse_range(get_required(req, "range").get<std::string>());
    const json base = get_required(req, "config");
    const bool ramp = command == "protocol" && param == "ramp_time";
    if (!ramp) {
        json probe = base;
        if (!json_path(probe, param).is_number()) throw ValidationError("param", "'" + param + "' is not numeric");
    }

    std::vector<std::string> head{param};
    std::vector<std::vector<std::string>> rows(values.size());
    if (command == "dispersion") {
        const Scheme scheme = scheme_from_string(req.value("scheme", std::string("stationary")));
        head.insert(head.end(), {"v_group", "m_eff", "gap_upper", "gap_lower", "photonic_fraction"});
        parallel_for(values.size(), ctx.threads, [&](std::size_t i) {
            json c = base;
            json_path(c, param) = values[i];
            const RunConfig cfg = run_config_from_json(c);
            const ValidatedParams p = validate_params(cfg.params, {.require_dark_state = true});
            const PolaritonSummary s = polariton_summary(p, scheme);
            rows[i] = {num(values[i]), num(s.v_group), num(s.m_eff), num(s.gap_upper), num(s.gap_lower),
                       num(s.photonic_fraction)};
        });
    } else if (command == "protocol") {
        head.insert(head.end(), {"retrieval_efficiency", "right_moving_fraction", "final_norm", "stored_norm"});
        json preq = req;
        const ProtocolInputs base_in = protocol_inputs(preq);
        parallel_for(values.size(), ctx.threads, [&](std::size_t i) {
            ProtocolInputs in = base_in;
            if (ramp) {
                in.schedule = in.schedule.with_ramp_time(values[i]);
            } else {
                json c = base;
                json_path(c, param) = values[i];
                in.cfg = run_config_from_json(c);
                in.pulse = in.cfg.pulse.value_or(default_pulse(in.cfg.grid));
            }
            const ProtocolReport r =
                run_protocol(validate_params(in.cfg.params), in.cfg.grid, in.schedule, in.pulse, in.opts);
            rows[i] = {num(values[i]), num(r.retrieval_efficiency), num(r.right_moving_fraction), num(r.final_norm),
                       num(r.stored_norm)};
        });
    } else {
        throw ValidationError("command", "sweep supports 'dispersion' and 'protocol'");
    }

    Outputs out(ctx);
    std::ofstream os;
    out.open(req.value("out", std::string("sweep.csv")), os);
    csv_row(os, head);
    for (const auto& r : rows) csv_row(os, r);
    os.close();
    return out.finish();
}

// ---------------------------------------------------------------- manifest

std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json manifest_json(const std::string& sub, const json& req, const Context& ctx, const std::vector<OutputFile>& files,
                   double seconds) {
    json outs = json::array();
    for (const auto& f : files) outs.push_back({{"path", f.path}, {"bytes", f.bytes}, {"fnv1a64", f.fnv1a64}});
    return {{"subcommand", sub},
            {"version", PLAB_VERSION},
            {"timestamp", utc_timestamp()},
            {"duration_s", seconds},
            {"threads", ctx.threads},
            {"seed", req.value("seed", std::uint64_t{0})},
            {"simd_backend", std::string(simd::name(simd::kernels().backend))},
            {"request", req},
            {"outputs", outs}};
}

void write_manifest(const std::string& sub, const json& req, const Context& ctx, const std::vector<OutputFile>& files,
                    double seconds) {
    const fs::path p = ctx.out_dir / (sub + "_manifest.json");
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw ValidationError("out-dir", "cannot write '" + p.string() + "'");
    os << manifest_json(sub, req, ctx, files, seconds).dump(2) << '\n';
}

json load_json_arg(const std::string& path) { return read_json_file(path); }

unsigned threads_from_env() {
    if (const char* e = std::getenv("POLARITON_LAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(e, &end, 10);
        if (end != e && *end == '\0' && v > 0) return static_cast<unsigned>(v);
        throw ValidationError("POLARITON_LAB_THREADS", "must be a positive integer");
    }
    return 1;
}

}  // namespace

std::vector<OutputFile> execute(const std::string& sub, const json& req, const Context& ctx) {
    fs::create_directories(ctx.out_dir);
    if (sub == "dispersion") return run_dispersion(req, ctx);
    if (sub == "protocol") return run_protocol_cmd(req, ctx);
    if (sub == "manybody") return run_manybody(req, ctx);
    if (sub == "bethe") return run_bethe(req, ctx);
    if (sub == "phasematch") return run_phasematch(req, ctx);
    if (sub == "sweep") return run_sweep(req, ctx);
    throw ValidationError("subcommand", "unknown subcommand '" + sub + "'");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stationary-light polariton simulator", "polariton_lab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", PLAB_VERSION);

    unsigned threads = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_dir = ".";
    app.add_option("--threads", threads, "worker threads (fallback POLARITON_LAB_THREADS, default 1)");
    app.add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { seed = s; seed_given = true; },
                                           "eigensolver seed (default: from the config, else 0)");
    auto* out_dir_opt = app.add_option("--out-dir", out_dir, "directory for outputs and the manifest");

    // dispersion
    std::string d_config, d_scheme = "stationary", d_out = "bands.csv", d_loss_out = "loss.csv";
    double d_kmin = -1.0, d_kmax = 1.0;
    std::size_t d_points = 201;
    bool d_loss = false;
    auto* disp = app.add_subcommand("dispersion", "band structure and polariton summary");
    disp->add_option("--config", d_config)->required();
    disp->add_option("--scheme", d_scheme)->check(CLI::IsMember({"eit", "stationary"}));
    auto* kmin_opt = disp->add_option("--kmin", d_kmin, "defaults to -kmax");
    disp->add_option("--kmax", d_kmax);
    disp->add_option("--points", d_points);
    disp->add_option("--out", d_out);
    disp->add_flag("--loss", d_loss, "also write paired EIT/stationary loss spectra (gamma_e > 0)");
    disp->add_option("--loss-out", d_loss_out);

    // protocol
    std::string p_config, p_schedule, p_out = "report.json", p_trace = "trace.csv", p_env;
    double p_dt = 0.0, p_trace_dt = 1.0;
    auto* proto = app.add_subcommand("protocol", "time-domain storage and retrieval run");
    proto->add_option("--config", p_config)->required();
    proto->add_option("--schedule", p_schedule)->required();
    proto->add_option("--out", p_out);
    proto->add_option("--trace", p_trace);
    proto->add_option("--envelope", p_env, "CSV of the final field densities");
    proto->add_option("--dt", p_dt, "time step (default: largest stable step)");
    proto->add_option("--trace-interval", p_trace_dt);

    // manybody
    std::string m_spec, m_obs = "g2,energy,K", m_out = "result.json", m_kmethod;
    std::uint64_t m_cap = 0;
    auto* mb = app.add_subcommand("manybody", "lattice ground state and correlations");
    mb->add_option("--spec", m_spec)->required();
    mb->add_option("--observables", m_obs);
    mb->add_option("--out", m_out);
    mb->add_option("--k-method", m_kmethod)->check(CLI::IsMember({"envelope", "structure"}));
    mb->add_option("--hilbert-cap", m_cap);

    // bethe
    std::string b_grid = "0.1:100:log:20", b_out = "e_of_gamma.csv";
    std::size_t b_nodes = 256;
    auto* bethe = app.add_subcommand("bethe", "Lieb-Liniger ground-state energy");
    bethe->add_option("--gamma-grid", b_grid);
    bethe->add_option("--nodes", b_nodes);
    bethe->add_option("--out", b_out);

    // phasematch
    double pm_probe = 0.0, pm_control = 0.0;
    std::string pm_out = "beams.json";
    bool pm_collinear = false;
    auto* pm = app.add_subcommand("phasematch", "coplanar beam geometry");
    pm->add_option("--lambda-probe", pm_probe)->required();
    pm->add_option("--lambda-control", pm_control)->required();
    pm->add_flag("--collinear", pm_collinear, "force all beams onto the probe axis");
    pm->add_option("--out", pm_out);

    // sweep
    std::string s_cmd, s_config, s_param, s_range, s_schedule, s_scheme = "stationary", s_out = "sweep.csv";
    auto* sw = app.add_subcommand("sweep", "scalar summaries over one parameter axis");
    sw->add_option("--command", s_cmd)->required()->check(CLI::IsMember({"dispersion", "protocol"}));
    sw->add_option("--config", s_config)->required();
    sw->add_option("--param", s_param)->required();
    sw->add_option("--range", s_range)->required();
    sw->add_option("--schedule", s_schedule);
    sw->add_option("--scheme", s_scheme)->check(CLI::IsMember({"eit", "stationary"}));
    sw->add_option("--out", s_out);

    // replay
    std::string r_manifest;
    bool r_check = false;
    auto* rp = app.add_subcommand("replay", "rerun the request stored in a manifest");
    rp->add_option("--manifest", r_manifest)->required();
    rp->add_flag("--check", r_check, "compare output hashes with the manifest");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return Usage;
    }

    try {
        Context ctx;
        ctx.threads = threads > 0 ? threads : threads_from_env();
        ctx.out_dir = out_dir;

        CLI::App* chosen = app.get_subcommands().front();
        std::string sub = chosen->get_name();
        json req;
        json stored_manifest;
        if (sub == "dispersion") {
            if (kmin_opt->count() == 0) d_kmin = -d_kmax;
            req = {{"config", load_json_arg(d_config)}, {"scheme", d_scheme}, {"kmin", d_kmin}, {"kmax", d_kmax},
                   {"points", d_points}, {"out", d_out}, {"loss", d_loss}, {"loss_out", d_loss_out}};
        } else if (sub == "protocol") {
            req = {{"config", load_json_arg(p_config)}, {"schedule", load_json_arg(p_schedule)}, {"out", p_out},
                   {"trace", p_trace}, {"dt", p_dt}, {"trace_interval", p_trace_dt}};
            if (!p_env.empty()) req["envelope"] = p_env;
        } else if (sub == "manybody") {
            json spec = load_json_arg(m_spec);
            if (m_cap > 0) spec["hilbert_cap"] = m_cap;
            if (seed_given) spec["seed"] = seed;
            std::vector<std::string> obs;
            std::stringstream ss(m_obs);
            for (std::string o; std::getline(ss, o, ',');)
                if (!o.empty()) obs.push_back(o);
            req = {{"spec", spec}, {"observables", obs}, {"out", m_out}};
            if (!m_kmethod.empty()) req["k_method"] = m_kmethod;
            req["seed"] = spec.value("seed", std::uint64_t{0});
        } else if (sub == "bethe") {
            req = {{"gamma_grid", b_grid}, {"nodes", b_nodes}, {"out", b_out}};
        } else if (sub == "phasematch") {
            req = {{"lambda_probe", pm_probe}, {"lambda_control", pm_control}, {"collinear", pm_collinear},
                   {"out", pm_out}};
        } else if (sub == "sweep") {
            req = {{"command", s_cmd}, {"config", load_json_arg(s_config)}, {"param", s_param}, {"range", s_range},
                   {"scheme", s_scheme}, {"out", s_out}};
            if (!s_schedule.empty()) req["schedule"] = load_json_arg(s_schedule);
        } else {
            stored_manifest = load_json_arg(r_manifest);
            if (!stored_manifest.contains("subcommand") || !stored_manifest.contains("request"))
                throw ValidationError("manifest", "missing subcommand or request");
            sub = stored_manifest.at("subcommand").get<std::string>();
            req = stored_manifest.at("request");
            if (out_dir_opt->count() == 0) ctx.out_dir = fs::path(r_manifest).parent_path();
            if (ctx.out_dir.empty()) ctx.out_dir = ".";
            if (threads == 0 && stored_manifest.contains("threads"))
                ctx.threads = stored_manifest.at("threads").get<unsigned>();
        }
        if (!req.contains("seed")) {
            std::uint64_t s = seed_given ? seed : 0;
            if (!seed_given && req.contains("config") && req.at("config").contains("seed"))
                s = req.at("config").at("seed").get<std::uint64_t>();
            req["seed"] = s;
        }

        const auto t0 = std::chrono::steady_clock::now();
        const auto files = execute(sub, req, ctx);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(sub, req, ctx, files, secs);
        for (const auto& f : files) out << (ctx.out_dir / f.path).string() << '\n';

        if (r_check && !stored_manifest.is_null()) {
            int mismatches = 0;
            for (const auto& o : stored_manifest.at("outputs")) {
                const auto it = std::find_if(files.begin(), files.end(),
                                             [&](const OutputFile& f) { return f.path == o.at("path").get<std::string>(); });
                if (it == files.end() || it->fnv1a64 != o.at("fnv1a64").get<std::string>()) {
                    err << "mismatch: " << o.at("path").get<std::string>() << '\n';
                    ++mismatches;
                }
            }
            if (mismatches) return NumericalFailure;
            out << "replay identical\n";
        }
        return Ok;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return BadInput;
    } catch (const SizeError& e) {
        err << "error: " << e.what() << " (dimension " << e.dimension() << ")\n";
        return NumericalFailure;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return NumericalFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return Failure;
    }
}

}  // namespace plab::cli
