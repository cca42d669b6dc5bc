#pragma once

// Effective 1D boson models: lattice exact diagonalization (Bose-Hubbard with
// contact, hard-core or 1/r^6 tail interactions), density-density
// correlations, the Lieb-Liniger Bethe-ansatz ground-state energy, and
// Luttinger-parameter extraction.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace plab {

enum class Boundary { Open, Periodic };
enum class InteractionKind { Contact, HardCore, VdWTail };

struct Interaction {
    InteractionKind kind = InteractionKind::HardCore;
    double U = 0.0;        ///< Contact: on-site energy
    double C6 = 0.0;       ///< VdWTail: C6 / r^6 in sites, on-site term C6
    int cutoff = 3;        ///< VdWTail: longest pair distance kept, in sites

    bool operator==(const Interaction&) const = default;
};

struct LatticeSpec {
    int n_sites = 12;
    int n_bosons = 3;
    double J = 1.0;
    Boundary boundary = Boundary::Periodic;
    Interaction interaction;
    int max_occupancy = 0;                 ///< 0: n_bosons (1 for hard core)
    std::uint64_t hilbert_cap = 2'000'000;
    std::uint64_t seed = 0;                ///< eigensolver start vector

    int occupancy_limit() const noexcept;
    bool operator==(const LatticeSpec&) const = default;
};

/// Throws ValidationError on bad fields, SizeError when the Hilbert space is too large.
void validate(const LatticeSpec& spec);
/// Number of fixed-N occupation states; saturates at UINT64_MAX.
std::uint64_t hilbert_dimension(const LatticeSpec& spec);

nlohmann::json to_json(const LatticeSpec& s);
LatticeSpec lattice_spec_from_json(const nlohmann::json& j);

/// Occupation-number basis with combinatorial ranking.
class FockBasis {
public:
    FockBasis(int n_sites, int n_bosons, int max_occupancy);

    std::size_t size() const noexcept { return states_.size() / static_cast<std::size_t>(n_sites_); }
    int n_sites() const noexcept { return n_sites_; }
    int n_bosons() const noexcept { return n_bosons_; }
    const std::uint8_t* state(std::size_t idx) const noexcept {
        return states_.data() + idx * static_cast<std::size_t>(n_sites_);
    }
    std::size_t rank(const std::uint8_t* occ) const noexcept;

private:
    int n_sites_, n_bosons_, max_occ_;
    // ways_[s * (N + 1) + n]: fillings of sites s.. with n bosons
    std::vector<std::uint64_t> ways_;
    std::vector<std::uint8_t> states_;
};

/// Real symmetric matrix in compressed sparse row form.
struct SparseMatrix {
    std::size_t dim = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::uint32_t> col;
    std::vector<double> val;

    void multiply(const double* x, double* y, unsigned threads = 1) const;
    /// Max absolute row sum, an upper bound on the spectral norm.
    double norm_bound() const;
    Eigen::MatrixXd to_dense() const;
    bool is_symmetric(double tol = 0.0) const;
};

struct LatticeHamiltonian {
    LatticeSpec spec;
    FockBasis basis;
    SparseMatrix H;
};

/// H = -J sum_<ij> (b_i^dag b_j + h.c.) + interaction. The periodic bond
/// (L-1, 0) is added only for L > 2.
LatticeHamiltonian build_hamiltonian(const LatticeSpec& spec);

struct LanczosOptions {
    double tol = 1e-8;          ///< residual <= tol * ||H||
    std::size_t krylov = 80;    ///< basis size per restart
    std::size_t max_restarts = 200;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct LanczosResult {
    double energy = 0.0;
    Eigen::VectorXd vector;
    double residual = 0.0;
    double norm_estimate = 0.0;
    std::size_t matvecs = 0;
    std::vector<double> residual_history;   ///< one entry per restart
};

/// Lowest eigenpair by restarted Lanczos with full reorthogonalization.
/// Throws NumericalError with the residual history on non-convergence.
LanczosResult lanczos_ground_state(const SparseMatrix& H, const LanczosOptions& opts = {});

/// g2 as a function of separation.
struct CorrelationData {
    std::vector<double> r;
    std::vector<double> values;
    double rho0 = 0.0;
    double k_F = 0.0;           ///< pi rho0
    int system_size = 0;        ///< ring length for lattice data, 0 for continuum samples
    bool periodic = false;
};

nlohmann::json to_json(const CorrelationData& c);

struct GroundStateResult {
    double energy = 0.0;
    Eigen::VectorXd state;
    std::vector<double> density;
    Eigen::MatrixXd g2_matrix;  ///< <b_i^dag b_j^dag b_j b_i> / (<n_i><n_j>)
    CorrelationData g2;         ///< distance average
    double residual = 0.0;
    std::vector<double> residual_history;
};

/// Ground state plus density and g2. Separations run over the minimum image
/// 0..L/2 on rings and 0..L-1 on open chains.
GroundStateResult ground_state(const LatticeHamiltonian& h, LanczosOptions opts = {});
GroundStateResult ground_state(const LatticeSpec& spec, unsigned threads = 1);

/// 1 - (sin(k_F r) / (k_F r))^2 with k_F = pi rho0.
double tg_g2(double r, double rho0);

struct BetheOptions {
    std::size_t nodes = 256;     ///< Gauss-Legendre nodes; the error estimate reruns with nodes/2
    double tol = 1e-13;          ///< fixed-point and root tolerance
    std::size_t max_iterations = 200000;
};

struct BetheResult {
    double gamma = 0.0;
    double e = 0.0;              ///< ground energy per particle in units of rho0^2 / 2m
    double lambda = 0.0;         ///< rescaled Fermi rapidity
    double quad_error = 0.0;     ///< |e(nodes) - e(nodes/2)|
    std::size_t iterations = 0;  ///< fixed-point sweeps, summed over the root search
};

/// Lieb-Liniger e(gamma) from the rescaled integral equation on [-1, 1].
BetheResult lieb_liniger_energy(double gamma, const BetheOptions& opts = {});

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(std::size_t n, std::vector<double>& x, std::vector<double>& w);

/// Lattice coupling matched to Lieb-Liniger: gamma = U / (2 J filling).
double lattice_gamma(double U, double J, double filling);

enum class LuttingerMethod { EnvelopeExtrema, StructureFactor };

struct LuttingerOptions {
    LuttingerMethod method = LuttingerMethod::EnvelopeExtrema;
    double r_min = 0.0;   ///< 0: 2 / rho0
    double r_max = 0.0;   ///< 0: 0.9 of the largest separation
};

struct LuttingerFit {
    double K = 0.0;
    double amplitude = 0.0;
    double r_min = 0.0;
    double r_max = 0.0;
    double residual = 0.0;
    std::size_t points = 0;
    LuttingerMethod method = LuttingerMethod::EnvelopeExtrema;
};

/// EnvelopeExtrema: least squares of log|g2 - 1| against log r over the local
/// maxima of |g2 - 1| inside the window, slope -2K; needs at least 4 maxima.
/// StructureFactor: K = N S(2 pi / L) from ring data, with
/// S(q) = 1 + rho0 sum_r (g2(r) - 1) cos(q r).
LuttingerFit fit_luttinger_K(const CorrelationData& c, const LuttingerOptions& opts = {});

struct VdwContactReport {
    std::vector<double> r;
    std::vector<double> g2_a;
    std::vector<double> g2_b;
    double sup_distance = 0.0;
};

/// g2 curves of two specs at matched density and their sup-norm distance.
VdwContactReport vdw_vs_contact_comparison(const LatticeSpec& a, const LatticeSpec& b, unsigned threads = 1);

}  // namespace plab
