#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "plab/errors.hpp"
#include "plab/manybody.hpp"
#include "plab/simd.hpp"

namespace plab {

using nlohmann::json;

int LatticeSpec::occupancy_limit() const noexcept {
    if (interaction.kind == InteractionKind::HardCore) return 1;
    return max_occupancy > 0 ? std::min(max_occupancy, n_bosons) : n_bosons;
}

namespace {

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
    const std::uint64_t s = a + b;
    return s < a ? std::numeric_limits<std::uint64_t>::max() : s;
}

std::vector<std::uint64_t> ways_table(int L, int N, int M) {
    const auto w = static_cast<std::size_t>(N + 1);
    std::vector<std::uint64_t> t(static_cast<std::size_t>(L + 1) * w, 0);
    t[static_cast<std::size_t>(L) * w + 0] = 1;
    for (int s = L - 1; s >= 0; --s)
        for (int n = 0; n <= N; ++n) {
            std::uint64_t acc = 0;
            for (int o = 0; o <= std::min(n, M); ++o)
                acc = sat_add(acc, t[static_cast<std::size_t>(s + 1) * w + static_cast<std::size_t>(n - o)]);
            t[static_cast<std::size_t>(s) * w + static_cast<std::size_t>(n)] = acc;
        }
    return t;
}

}  // namespace

std::uint64_t hilbert_dimension(const LatticeSpec& s) {
    if (s.n_sites < 1 || s.n_bosons < 0) return 0;
    return ways_table(s.n_sites, s.n_bosons, s.occupancy_limit())[static_cast<std::size_t>(s.n_bosons)];
}

void validate(const LatticeSpec& s) {
    if (s.n_sites < 2) throw ValidationError("n_sites", "must be >= 2");
    if (s.n_sites > 255) throw ValidationError("n_sites", "must be <= 255");
    if (s.n_bosons < 1) throw ValidationError("n_bosons", "must be >= 1");
    if (s.n_bosons > 255) throw ValidationError("n_bosons", "must be <= 255");
    if (!std::isfinite(s.J) || s.J < 0.0) throw ValidationError("J", "must be finite and >= 0");
    if (s.max_occupancy < 0) throw ValidationError("max_occupancy", "must be >= 0");
    if (s.n_bosons > s.n_sites * s.occupancy_limit())
        throw ValidationError("n_bosons", "exceeds n_sites * max_occupancy");
    const auto& in = s.interaction;
    if (in.kind == InteractionKind::Contact && (!std::isfinite(in.U) || in.U < 0.0))
        throw ValidationError("interaction.U", "must be finite and >= 0");
    if (in.kind == InteractionKind::VdWTail) {
        if (!std::isfinite(in.C6) || in.C6 < 0.0) throw ValidationError("interaction.C6", "must be finite and >= 0");
        if (in.cutoff < 1) throw ValidationError("interaction.cutoff", "must be >= 1");
    }
    const std::uint64_t dim = hilbert_dimension(s);
    if (dim > s.hilbert_cap) {
        std::ostringstream msg;
        msg << "Hilbert dimension " << dim << " exceeds the cap " << s.hilbert_cap;
        throw SizeError(msg.str(), static_cast<std::size_t>(dim));
    }
}

json to_json(const LatticeSpec& s) {
    json in;
    switch (s.interaction.kind) {
        case InteractionKind::HardCore: in = {{"type", "hardcore"}}; break;
        case InteractionKind::Contact: in = {{"type", "contact"}, {"U", s.interaction.U}}; break;
        case InteractionKind::VdWTail:
            in = {{"type", "vdw"}, {"C6", s.interaction.C6}, {"cutoff", s.interaction.cutoff}};
            break;
    }
    return {{"n_sites", s.n_sites},
            {"n_bosons", s.n_bosons},
            {"J", s.J},
            {"boundary", s.boundary == Boundary::Open ? "open" : "periodic"},
            {"interaction", in},
            {"max_occupancy", s.max_occupancy},
            {"hilbert_cap", s.hilbert_cap},
            {"seed", s.seed}};
}

LatticeSpec lattice_spec_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("lattice", "must be an object");
    LatticeSpec s;
    auto int_field = [&](const char* key, int& out) {
        if (!j.contains(key)) return;
        if (!j.at(key).is_number_integer()) throw ValidationError(key, "must be an integer");
        out = j.at(key).get<int>();
    };
    int_field("n_sites", s.n_sites);
    int_field("n_bosons", s.n_bosons);
    int_field("max_occupancy", s.max_occupancy);
    if (j.contains("J")) {
        if (!j.at("J").is_number()) throw ValidationError("J", "must be a number");
        s.J = j.at("J").get<double>();
    }
    if (j.contains("boundary")) {
        const auto b = j.at("boundary").get<std::string>();
        if (b == "open") s.boundary = Boundary::Open;
        else if (b == "periodic") s.boundary = Boundary::Periodic;
        else throw ValidationError("boundary", "expected 'open' or 'periodic'");
    }
    if (j.contains("hilbert_cap")) s.hilbert_cap = j.at("hilbert_cap").get<std::uint64_t>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("interaction")) {
        const auto& in = j.at("interaction");
        const auto type = in.value("type", std::string("hardcore"));
        if (type == "hardcore") {
            s.interaction.kind = InteractionKind::HardCore;
        } else if (type == "contact") {
            s.interaction.kind = InteractionKind::Contact;
            if (!in.contains("U") || !in.at("U").is_number()) throw ValidationError("interaction.U", "missing number");
            s.interaction.U = in.at("U").get<double>();
        } else if (type == "vdw") {
            s.interaction.kind = InteractionKind::VdWTail;
            if (!in.contains("C6") || !in.at("C6").is_number()) throw ValidationError("interaction.C6", "missing number");
            s.interaction.C6 = in.at("C6").get<double>();
            s.interaction.cutoff = in.value("cutoff", 3);
        } else {
            throw ValidationError("interaction.type", "expected 'hardcore', 'contact' or 'vdw'");
        }
    }
    validate(s);
    return s;
}

// ---------------------------------------------------------------- basis

FockBasis::FockBasis(int n_sites, int n_bosons, int max_occupancy)
    : n_sites_(n_sites), n_bosons_(n_bosons), max_occ_(max_occupancy),
      ways_(ways_table(n_sites, n_bosons, max_occupancy)) {
    const std::size_t dim = ways_[static_cast<std::size_t>(n_bosons)];
    states_.reserve(dim * static_cast<std::size_t>(n_sites));
    // reverse-lexicographic enumeration: site 0 most significant, high occupancy first
    std::vector<std::uint8_t> occ(static_cast<std::size_t>(n_sites), 0);
    auto fill = [&](auto&& self, int site, int left) -> void {
        if (site == n_sites_ - 1) {
            if (left > max_occ_) return;
            occ[static_cast<std::size_t>(site)] = static_cast<std::uint8_t>(left);
            states_.insert(states_.end(), occ.begin(), occ.end());
            return;
        }
        for (int o = std::min(left, max_occ_); o >= 0; --o) {
            occ[static_cast<std::size_t>(site)] = static_cast<std::uint8_t>(o);
            self(self, site + 1, left - o);
        }
    };
    fill(fill, 0, n_bosons);
}

std::size_t FockBasis::rank(const std::uint8_t* occ) const noexcept {
    // count states that precede occ: same prefix, larger occupancy at the first differing site
    const auto w = static_cast<std::size_t>(n_bosons_ + 1);
    std::size_t r = 0;
    int left = n_bosons_;
    for (int s = 0; s < n_sites_ - 1; ++s) {
        const int o = occ[s];
        for (int hi = std::min(left, max_occ_); hi > o; --hi)
            r += ways_[static_cast<std::size_t>(s + 1) * w + static_cast<std::size_t>(left - hi)];
        left -= o;
    }
    return r;
}

// ---------------------------------------------------------------- sparse matrix

void SparseMatrix::multiply(const double* x, double* y, unsigned threads) const {
    auto rows = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double acc = 0.0;
            for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) acc += val[p] * x[col[p]];
            y[i] = acc;
        }
    };
    if (threads <= 1 || dim < 4096) {
        rows(0, dim);
        return;
    }
    // row blocks are independent, so the result does not depend on the thread count
    std::vector<std::thread> pool;
    const std::size_t chunk = (dim + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t lo = t * chunk, hi = std::min(dim, lo + chunk);
        if (lo < hi) pool.emplace_back(rows, lo, hi);
    }
    for (auto& th : pool) th.join();
}

double SparseMatrix::norm_bound() const {
    double m = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        double s = 0.0;
        for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += std::abs(val[p]);
        m = std::max(m, s);
    }
    return m;
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col[p])) += val[p];
    return d;
}

bool SparseMatrix::is_symmetric(double tol) const {
    const Eigen::MatrixXd d = to_dense();
    return (d - d.transpose()).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------- Hamiltonian

namespace {

int pair_distance(int i, int j, int L, Boundary b) {
    const int d = std::abs(i - j);
    return b == Boundary::Periodic ? std::min(d, L - d) : d;
}

double diagonal_energy(const std::uint8_t* occ, const LatticeSpec& s) {
    const auto& in = s.interaction;
    double e = 0.0;
    switch (in.kind) {
        case InteractionKind::HardCore: break;
        case InteractionKind::Contact:
            for (int i = 0; i < s.n_sites; ++i) e += 0.5 * in.U * occ[i] * (occ[i] - 1);
            break;
        case InteractionKind::VdWTail:
            for (int i = 0; i < s.n_sites; ++i) {
                if (!occ[i]) continue;
                e += 0.5 * in.C6 * occ[i] * (occ[i] - 1);
                for (int j = i + 1; j < s.n_sites; ++j) {
                    if (!occ[j]) continue;
                    const int d = pair_distance(i, j, s.n_sites, s.boundary);
                    if (d <= in.cutoff) e += in.C6 / std::pow(static_cast<double>(d), 6) * occ[i] * occ[j];
                }
            }
            break;
    }
    return e;
}

}  // namespace

LatticeHamiltonian build_hamiltonian(const LatticeSpec& spec) {
    validate(spec);
    LatticeHamiltonian h{spec, FockBasis(spec.n_sites, spec.n_bosons, spec.occupancy_limit()), {}};
    const FockBasis& basis = h.basis;
    const int L = spec.n_sites;
    const int M = spec.occupancy_limit();

    std::vector<std::pair<int, int>> bonds;
    for (int i = 0; i + 1 < L; ++i) bonds.emplace_back(i, i + 1);
    if (spec.boundary == Boundary::Periodic && L > 2) bonds.emplace_back(L - 1, 0);

    SparseMatrix& H = h.H;
    H.dim = basis.size();
    H.row_ptr.assign(1, 0);
    std::vector<std::uint8_t> work(static_cast<std::size_t>(L));
    std::vector<std::pair<std::uint32_t, double>> row;
    for (std::size_t idx = 0; idx < H.dim; ++idx) {
        const std::uint8_t* occ = basis.state(idx);
        row.clear();
        const double diag = diagonal_energy(occ, spec);
        if (diag != 0.0) row.emplace_back(static_cast<std::uint32_t>(idx), diag);
        for (auto [a, b] : bonds) {
            // b_a^dag b_b and b_b^dag b_a
            for (auto [to, from] : {std::pair{a, b}, std::pair{b, a}}) {
                if (occ[from] == 0 || occ[to] >= M) continue;
                std::copy(occ, occ + L, work.begin());
                const double amp = -spec.J * std::sqrt(static_cast<double>(occ[to] + 1) * occ[from]);
                work[static_cast<std::size_t>(to)]++;
                work[static_cast<std::size_t>(from)]--;
                row.emplace_back(static_cast<std::uint32_t>(basis.rank(work.data())), amp);
            }
        }
        std::sort(row.begin(), row.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        for (std::size_t p = 0; p < row.size(); ++p) {
            if (!H.col.empty() && H.row_ptr.back() < H.col.size() && H.col.back() == row[p].first) {
                H.val.back() += row[p].second;
                continue;
            }
            H.col.push_back(row[p].first);
            H.val.push_back(row[p].second);
        }
        H.row_ptr.push_back(H.col.size());
    }
    return h;
}

// ---------------------------------------------------------------- Lanczos

namespace {

// uniform in [-1, 1) from the raw generator output, identical on every platform
void random_start(Eigen::VectorXd& v, std::uint64_t seed) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        // splitmix64
        z += 0x9E3779B97F4A7C15ULL;
        std::uint64_t x = z;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        x ^= x >> 31;
        v(i) = static_cast<double>(x >> 11) * 0x1.0p-52 - 1.0;
    }
}

double vdot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return simd::kernels().dot(a.data(), b.data(), static_cast<std::size_t>(a.size()));
}

void vaxpy(double alpha, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    simd::kernels().axpy(alpha, x.data(), y.data(), static_cast<std::size_t>(x.size()));
}

}  // namespace

LanczosResult lanczos_ground_state(const SparseMatrix& H, const LanczosOptions& opts) {
    const auto n = static_cast<Eigen::Index>(H.dim);
    if (n == 0) throw ValidationError("H", "empty matrix");
    LanczosResult res;
    res.norm_estimate = std::max(H.norm_bound(), std::numeric_limits<double>::min());
    const double target = opts.tol * res.norm_estimate;

    Eigen::VectorXd x(n);
    random_start(x, opts.seed);
    x /= std::sqrt(vdot(x, x));

    const auto m_max = static_cast<Eigen::Index>(std::max<std::size_t>(2, std::min<std::size_t>(opts.krylov, H.dim)));
    std::vector<Eigen::VectorXd> V;
    Eigen::VectorXd w(n);
    for (std::size_t restart = 0; restart < opts.max_restarts; ++restart) {
        V.assign(1, x);
        std::vector<double> alpha, beta;
        for (Eigen::Index j = 0; j < m_max; ++j) {
            H.multiply(V.back().data(), w.data(), opts.threads);
            ++res.matvecs;
            const double a = vdot(V.back(), w);
            alpha.push_back(a);
            // two passes of classical Gram-Schmidt against the whole basis
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& v : V) vaxpy(-vdot(v, w), v, w);
            const double b = std::sqrt(vdot(w, w));
            if (j + 1 == m_max || b <= 1e-14 * res.norm_estimate || j + 1 == n) {
                beta.push_back(b);
                break;
            }
            beta.push_back(b);
            V.emplace_back(w / b);
        }
        const auto m = static_cast<Eigen::Index>(alpha.size());
        Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
        Eigen::VectorXd sub(std::max<Eigen::Index>(m - 1, 0));
        for (Eigen::Index i = 0; i + 1 < m; ++i) sub(i) = beta[static_cast<std::size_t>(i)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
        tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        const Eigen::VectorXd y = tri.eigenvectors().col(0);
        res.energy = tri.eigenvalues()(0);

        x.setZero();
        for (Eigen::Index i = 0; i < m; ++i) vaxpy(y(i), V[static_cast<std::size_t>(i)], x);
        x /= std::sqrt(vdot(x, x));

        // true residual of the Ritz pair
        H.multiply(x.data(), w.data(), opts.threads);
        ++res.matvecs;
        res.energy = vdot(x, w);
        vaxpy(-res.energy, x, w);
        res.residual = std::sqrt(vdot(w, w));
        res.residual_history.push_back(res.residual);
        if (res.residual <= target) {
            res.vector = x;
            return res;
        }
    }
    std::ostringstream msg;
    msg << "Lanczos did not converge after " << opts.max_restarts << " restarts; residual history:";
    for (double r : res.residual_history) msg << ' ' << r;
    throw NumericalError(msg.str());
}

// ---------------------------------------------------------------- observables

GroundStateResult ground_state(const LatticeHamiltonian& h, LanczosOptions opts) {
    const LanczosResult lr = lanczos_ground_state(h.H, opts);
    const int L = h.spec.n_sites;
    GroundStateResult g;
    g.energy = lr.energy;
    g.state = lr.vector;
    g.residual = lr.residual;
    g.residual_history = lr.residual_history;

    g.density.assign(static_cast<std::size_t>(L), 0.0);
    Eigen::MatrixXd nn = Eigen::MatrixXd::Zero(L, L);  // <b_i^dag b_j^dag b_j b_i>
    for (std::size_t idx = 0; idx < h.basis.size(); ++idx) {
        const double p = g.state(static_cast<Eigen::Index>(idx)) * g.state(static_cast<Eigen::Index>(idx));
        if (p == 0.0) continue;
        const std::uint8_t* occ = h.basis.state(idx);
        for (int i = 0; i < L; ++i) {
            if (!occ[i]) continue;
            g.density[static_cast<std::size_t>(i)] += p * occ[i];
            nn(i, i) += p * occ[i] * (occ[i] - 1);
            for (int j = i + 1; j < L; ++j)
                if (occ[j]) nn(i, j) += p * occ[i] * occ[j];
        }
    }
    nn.triangularView<Eigen::StrictlyLower>() = nn.transpose();

    g.g2_matrix.resize(L, L);
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) {
            const double d = g.density[static_cast<std::size_t>(i)] * g.density[static_cast<std::size_t>(j)];
            g.g2_matrix(i, j) = d > 0.0 ? nn(i, j) / d : 0.0;
        }

    const bool ring = h.spec.boundary == Boundary::Periodic;
    const int r_count = ring ? L / 2 + 1 : L;
    std::vector<double> sum(static_cast<std::size_t>(r_count), 0.0);
    std::vector<int> cnt(static_cast<std::size_t>(r_count), 0);
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) {
            const int r = pair_distance(i, j, L, h.spec.boundary);
            sum[static_cast<std::size_t>(r)] += g.g2_matrix(i, j);
            cnt[static_cast<std::size_t>(r)]++;
        }
    g.g2.rho0 = static_cast<double>(h.spec.n_bosons) / L;
    g.g2.k_F = std::acos(-1.0) * g.g2.rho0;
    g.g2.system_size = L;
    g.g2.periodic = ring;
    for (int r = 0; r < r_count; ++r) {
        g.g2.r.push_back(r);
        g.g2.values.push_back(sum[static_cast<std::size_t>(r)] / cnt[static_cast<std::size_t>(r)]);
    }
    return g;
}

GroundStateResult ground_state(const LatticeSpec& spec, unsigned threads) {
    LanczosOptions o;
    o.seed = spec.seed;
    o.threads = threads;
    return ground_state(build_hamiltonian(spec), o);
}

json to_json(const CorrelationData& c) {
    return {{"r", c.r}, {"g2", c.values}, {"rho0", c.rho0}, {"k_F", c.k_F},
            {"system_size", c.system_size}, {"periodic", c.periodic}};
}

double tg_g2(double r, double rho0) {
    if (!(rho0 > 0.0)) throw ValidationError("rho0", "must be > 0");
    const double x = std::acos(-1.0) * rho0 * r;
    if (std::abs(x) < 1e-8) return x * x / 3.0;
    const double s = std::sin(x) / x;
    return 1.0 - s * s;
}

double lattice_gamma(double U, double J, double filling) {
    if (!(J > 0.0) || !(filling > 0.0)) throw ValidationError("lattice_gamma", "J and filling must be > 0");
    return U / (2.0 * J * filling);
}

VdwContactReport vdw_vs_contact_comparison(const LatticeSpec& a, const LatticeSpec& b, unsigned threads) {
    for (const auto* s : {&a, &b})
        if (s->interaction.kind == InteractionKind::VdWTail && s->interaction.cutoff < 3)
            throw ValidationError("interaction.cutoff", "comparison needs a tail cutoff >= 3 sites");
    const double fa = static_cast<double>(a.n_bosons) / a.n_sites;
    const double fb = static_cast<double>(b.n_bosons) / b.n_sites;
    if (std::abs(fa - fb) > 1e-12 * std::max(fa, fb)) throw ValidationError("spec", "densities must match");
    const auto ga = ground_state(a, threads), gb = ground_state(b, threads);
    VdwContactReport rep;
    const std::size_t n = std::min(ga.g2.r.size(), gb.g2.r.size());
    for (std::size_t i = 0; i < n; ++i) {
        rep.r.push_back(ga.g2.r[i]);
        rep.g2_a.push_back(ga.g2.values[i]);
        rep.g2_b.push_back(gb.g2.values[i]);
        rep.sup_distance = std::max(rep.sup_distance, std::abs(ga.g2.values[i] - gb.g2.values[i]));
    }
    return rep;
}

}  // namespace plab
