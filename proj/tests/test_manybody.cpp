#include <algorithm>
#include <cmath>
#include <numbers>

#include <doctest.h>

#include "oracles.hpp"
#include "plab/errors.hpp"
#include "plab/manybody.hpp"

using namespace plab;

namespace {

LatticeSpec ring(int L, int N, Interaction in) {
    LatticeSpec s;
    s.n_sites = L;
    s.n_bosons = N;
    s.interaction = in;
    return s;
}

std::vector<double> dense_spectrum(const LatticeSpec& s) {
    const auto h = build_hamiltonian(s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.H.to_dense());
    const auto& v = es.eigenvalues();
    return {v.data(), v.data() + v.size()};
}

}  // namespace

TEST_CASE("Fock basis ranks its own states") {
    FockBasis b(6, 3, 3);
    CHECK(b.size() == 56);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(b.rank(b.state(i)) == i);
    FockBasis hc(8, 3, 1);
    CHECK(hc.size() == 56);
    for (std::size_t i = 0; i < hc.size(); ++i) CHECK(hc.rank(hc.state(i)) == i);
}

TEST_CASE("one particle on a four-site ring") {
    for (double U : {0.0, 3.0}) {
        const auto e = dense_spectrum(ring(4, 1, {InteractionKind::Contact, U}));
        REQUIRE(e.size() == 4);
        CHECK(e[0] == doctest::Approx(-2.0));
        CHECK(std::abs(e[1]) < 1e-14);
        CHECK(std::abs(e[2]) < 1e-14);
        CHECK(e[3] == doctest::Approx(2.0));
    }
}

TEST_CASE("two hard-core bosons on four open sites") {
    auto s = ring(4, 2, {InteractionKind::HardCore});
    s.boundary = Boundary::Open;
    const auto r = ground_state(s);
    CHECK(r.energy == doctest::Approx(-std::sqrt(5.0)).epsilon(1e-12));
    CHECK(r.energy == doctest::Approx(oracle::free_fermion_open_energy(4, 2)).epsilon(1e-12));
}

TEST_CASE("free bosons condense into the lowest orbital") {
    for (int N : {1, 2, 4}) {
        const auto r = ground_state(ring(8, N, {InteractionKind::Contact, 0.0}));
        CHECK(r.energy == doctest::Approx(-2.0 * N).epsilon(1e-10));
    }
}

TEST_CASE("Hamiltonian is symmetric and Lanczos matches dense ED") {
    for (auto in : {Interaction{InteractionKind::Contact, 1.7}, Interaction{InteractionKind::VdWTail, 0.0, 5.0, 3},
                    Interaction{InteractionKind::HardCore}}) {
        auto s = ring(7, 3, in);
        const auto h = build_hamiltonian(s);
        CHECK(h.H.is_symmetric());
        const auto dense = dense_spectrum(s);
        const auto r = ground_state(h);
        CHECK(r.energy == doctest::Approx(dense.front()).epsilon(1e-10));
        CHECK(r.energy <= dense.front() + 1e-9);
    }
}

TEST_CASE("ground energy grows with the contact strength") {
    double prev = -1e300;
    for (double U : {0.0, 0.5, 1.0, 4.0, 20.0}) {
        const double e = ground_state(ring(8, 3, {InteractionKind::Contact, U})).energy;
        CHECK(e > prev);
        prev = e;
    }
    CHECK(prev < ground_state(ring(8, 3, {InteractionKind::HardCore})).energy);
}

TEST_CASE("hard-core ring g2 equals the free-fermion result") {
    const auto r = ground_state(ring(12, 3, {InteractionKind::HardCore}));
    CHECK(r.g2.values[0] == 0.0);
    for (std::size_t i = 0; i < r.g2.r.size(); ++i)
        CHECK(r.g2.values[i] == doctest::Approx(oracle::tg_ring_g2(static_cast<int>(r.g2.r[i]), 12, 3)).epsilon(1e-8));
    CHECK(r.g2.rho0 == doctest::Approx(0.25));
    CHECK(r.g2.k_F == doctest::Approx(std::numbers::pi / 4));
}

TEST_CASE("density sum rule and translation invariance") {
    const auto s = ring(10, 4, {InteractionKind::Contact, 2.0});
    const auto r = ground_state(s);
    double total = 0.0;
    for (double n : r.density) {
        CHECK(n >= 0.0);
        CHECK(n == doctest::Approx(0.4).epsilon(1e-8));
        total += n;
    }
    CHECK(total == doctest::Approx(4.0).epsilon(1e-10));

    // sum_ij <n_i n_j> = N^2, i.e. sum_ij <b+b+bb> = N(N-1)
    double pairs = 0.0;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) pairs += r.g2_matrix(i, j) * r.density[i] * r.density[j];
    CHECK(pairs == doctest::Approx(12.0).epsilon(1e-8));

    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
            CHECK(r.g2_matrix(i, j) == doctest::Approx(r.g2_matrix(j, i)).epsilon(1e-10));
            CHECK(r.g2_matrix(i, j) ==
                  doctest::Approx(r.g2_matrix((i + 1) % 10, (j + 1) % 10)).epsilon(1e-8).scale(1.0));
            CHECK(r.g2_matrix(i, j) >= -1e-10);
        }
}

TEST_CASE("ground state depends only on the seed") {
    auto s = ring(10, 3, {InteractionKind::Contact, 1.0});
    s.seed = 17;
    const auto a = ground_state(s, 1), b = ground_state(s, 1);
    CHECK(a.energy == b.energy);
    CHECK(a.g2.values == b.g2.values);
    const auto c = ground_state(s, 3);
    CHECK(c.energy == doctest::Approx(a.energy).epsilon(1e-12));
}

TEST_CASE("Hilbert cap raises a size error with the dimension") {
    auto s = ring(30, 10, {InteractionKind::Contact, 1.0});
    s.hilbert_cap = 1000;
    try {
        validate(s);
        FAIL("expected SizeError");
    } catch (const SizeError& e) {
        CHECK(e.dimension() == hilbert_dimension(s));
        CHECK(e.dimension() > 1000);
    }
    auto bad = ring(4, 6, {InteractionKind::HardCore});
    CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("lattice spec JSON round trip") {
    auto s = ring(18, 3, {InteractionKind::VdWTail, 0.0, 50.0, 4});
    s.boundary = Boundary::Open;
    s.seed = 5;
    CHECK(lattice_spec_from_json(to_json(s)) == s);
    CHECK_THROWS_AS(lattice_spec_from_json(nlohmann::json{{"interaction", {{"type", "magic"}}}}), ValidationError);
}

TEST_CASE("continuum TG correlation") {
    CHECK(tg_g2(0.0, 0.25) == 0.0);
    CHECK(tg_g2(4.0, 0.25) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(tg_g2(1e6, 0.25) == doctest::Approx(1.0).epsilon(1e-9));
    for (double r = 0.0; r < 50.0; r += 0.013) {
        const double v = tg_g2(r, 0.37);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0 + 1e-12);
        CHECK(v == doctest::Approx(oracle::tg_continuum_g2(r, 0.37)).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
    std::vector<double> x, w;
    gauss_legendre(10, x, w);
    double s0 = 0.0, s18 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s0 += w[i];
        s18 += w[i] * std::pow(x[i], 18);
    }
    CHECK(s0 == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s18 == doctest::Approx(2.0 / 19.0).epsilon(1e-13));
}

TEST_CASE("Lieb-Liniger energy") {
    const auto strong = lieb_liniger_energy(1e4);
    CHECK(std::abs(strong.e - std::numbers::pi * std::numbers::pi / 3) <= 0.01 * std::numbers::pi * std::numbers::pi / 3);
    const auto weak = lieb_liniger_energy(0.1);
    CHECK(std::abs(weak.e - 0.1) <= 0.15 * 0.1);
    CHECK(weak.e == doctest::Approx(oracle::ll_weak(0.1)).epsilon(0.01));
    CHECK(lieb_liniger_energy(100.0).e == doctest::Approx(oracle::ll_strong(100.0)).epsilon(1e-3));

    const auto one = lieb_liniger_energy(1.0);
    CHECK(one.quad_error < 1e-3 * one.e);
    const auto coarse = lieb_liniger_energy(1.0, {.nodes = 128});
    CHECK(std::abs(coarse.e - one.e) < 1e-3 * one.e);

    double prev = 0.0;
    for (double g : {0.01, 0.1, 1.0, 10.0, 100.0, 1000.0}) {
        const double e = lieb_liniger_energy(g).e;
        CHECK(e > prev);
        CHECK(e < std::numbers::pi * std::numbers::pi / 3);
        prev = e;
    }
    CHECK_THROWS_AS(lieb_liniger_energy(-1.0), ValidationError);
}

TEST_CASE("lattice gamma mapping") {
    CHECK(lattice_gamma(1.0, 1.0, 0.25) == doctest::Approx(2.0));
    CHECK_THROWS_AS(lattice_gamma(1.0, 0.0, 0.25), ValidationError);
}

TEST_CASE("envelope fit recovers the decay exponent") {
    for (double K : {0.5, 1.0, 2.0}) {
        CorrelationData c;
        c.rho0 = 0.25;
        c.k_F = std::numbers::pi * c.rho0;
        c.values = oracle::luttinger_decay(K, c.rho0, 0.3, 400);
        for (std::size_t r = 0; r < c.values.size(); ++r) c.r.push_back(static_cast<double>(r));
        const auto fit = fit_luttinger_K(c);
        CHECK(fit.K == doctest::Approx(K).epsilon(0.01));
        CHECK(fit.points >= 4);
    }
}

TEST_CASE("envelope fit refuses too few extrema") {
    CorrelationData c;
    c.rho0 = 0.25;
    c.values = oracle::luttinger_decay(1.0, c.rho0, 0.3, 10);
    for (std::size_t r = 0; r < c.values.size(); ++r) c.r.push_back(static_cast<double>(r));
    CHECK_THROWS_AS(fit_luttinger_K(c), ValidationError);
}

TEST_CASE("structure-factor K on rings") {
    const auto hc = ground_state(ring(12, 3, {InteractionKind::HardCore}));
    const auto khc = fit_luttinger_K(hc.g2, {.method = LuttingerMethod::StructureFactor}).K;
    CHECK(khc == doctest::Approx(1.0).epsilon(0.05));
    const auto soft = ground_state(ring(12, 3, {InteractionKind::Contact, 1.0}));
    CHECK(fit_luttinger_K(soft.g2, {.method = LuttingerMethod::StructureFactor}).K > khc);

    auto open = ring(12, 3, {InteractionKind::HardCore});
    open.boundary = Boundary::Open;
    CHECK_THROWS_AS(fit_luttinger_K(ground_state(open).g2, {.method = LuttingerMethod::StructureFactor}),
                    ValidationError);
}

TEST_CASE("vdW tail versus contact") {
    auto a = ring(12, 3, {InteractionKind::VdWTail, 0.0, 0.0, 3});
    auto b = ring(12, 3, {InteractionKind::Contact, 0.0});
    CHECK(vdw_vs_contact_comparison(a, b).sup_distance < 1e-8);

    double prev = 1e300;
    for (int L : {12, 18}) {
        a = ring(L, 3, {InteractionKind::VdWTail, 0.0, 50.0, 4});
        b = ring(L, 3, {InteractionKind::HardCore});
        const double d = vdw_vs_contact_comparison(a, b).sup_distance;
        CHECK(d < prev);
        prev = d;
    }
    a = ring(12, 3, {InteractionKind::VdWTail, 0.0, 50.0, 2});
    CHECK_THROWS_AS(vdw_vs_contact_comparison(a, b), ValidationError);
}
