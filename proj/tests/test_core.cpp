#include <cmath>
#include <random>

#include <doctest.h>

#include "plab/core.hpp"
#include "plab/errors.hpp"
#include "plab/fourier.hpp"
#include "plab/schedule.hpp"

using namespace plab;

TEST_CASE("validate_params accepts a balanced pair and derives omega_total") {
    const auto p = validate_params({1.0, 1.0, 1.0, 10.0, 1.0, 0.0});
    CHECK(p.omega_total() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(p.atomic_fraction() == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("validate_params names the offending field") {
    PhysicalParams p;
    p.g = -1.0;
    try {
        validate_params(p);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "g");
    }
    p = PhysicalParams{};
    p.delta = std::nan("");
    CHECK_THROWS_AS(validate_params(p), ValidationError);
    p = PhysicalParams{};
    p.c = 0.0;
    CHECK_THROWS_AS(validate_params(p), ValidationError);
}

TEST_CASE("zero controls have no dark state when one is requested") {
    PhysicalParams p{1.0, 0.0, 0.0, 1.0, 1.0, 0.0};
    CHECK_NOTHROW(validate_params(p));
    try {
        validate_params(p, {.require_dark_state = true});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("no dark state") != std::string::npos);
    }
}

TEST_CASE("zero coupling is opt-in") {
    PhysicalParams p{0.0, 1.0, 0.0, 1.0, 1.0, 0.0};
    CHECK_THROWS_AS(validate_params(p), ValidationError);
    CHECK_NOTHROW(validate_params(p, {.allow_zero_coupling = true}));
}

TEST_CASE("grids") {
    CHECK_THROWS_AS(SpatialGrid(10.0, 4), ValidationError);
    CHECK_THROWS_AS(SpatialGrid(-1.0, 64), ValidationError);
    SpatialGrid g(64.0, 64);
    CHECK(g.spacing() == 1.0);
    const auto k = g.fft_wavenumbers();
    CHECK(k[0] == 0.0);
    CHECK(k[1] > 0.0);
    CHECK(k.back() < 0.0);

    const auto m = MomentumGrid::symmetric(2.0, 5);
    CHECK(m[m.zero_index()] == 0.0);
    CHECK(m.values().front() == -2.0);
    CHECK_THROWS_AS(MomentumGrid::symmetric(2.0, 4), ValidationError);
    CHECK_THROWS_AS(MomentumGrid::from_values({-1.0, 0.0, 2.0}), ValidationError);
    const auto c = MomentumGrid::conjugate(g);
    CHECK(c.size() == 63);
    CHECK(c[c.zero_index()] == 0.0);
}

TEST_CASE("run config round-trips through JSON") {
    RunConfig c;
    c.units = UnitSystem::Physical;
    c.params = {1.5, 2.0, 0.5, 3.0, 1.0, 0.25};
    c.grid = SpatialGrid(100.0, 512);
    c.pulse = PulseSpec{20.0, 3.0, 0.1};
    c.v_ref = 0.02;
    c.seed = 42;
    const auto back = run_config_from_json(nlohmann::json::parse(to_json(c).dump()));
    CHECK(back == c);

    RunConfig d;
    CHECK(run_config_from_json(to_json(d)) == d);
    CHECK_THROWS_AS(run_config_from_json(nlohmann::json{{"params", {{"g", "one"}}}}), ValidationError);
}

TEST_CASE("schedule round-trips and samples continuously") {
    ControlSchedule s({Stage{10.0, Profile::constant(3.0), Profile::constant(0.0), StageFlag::Adiabatic, "load"},
                       Stage{20.0, Profile::smoothstep(3.0, 1.0), Profile::linear(0.0, 1.0), StageFlag::Adiabatic, "ramp"},
                       Stage{5.0, Profile::constant(3.0), Profile::constant(0.0), StageFlag::Fast, "kick"}});
    CHECK(schedule_from_json(to_json(s)) == s);
    CHECK(s.total_duration() == 35.0);
    CHECK(s.sample(10.0).omega_R == doctest::Approx(3.0));
    CHECK(s.sample(30.0 - 1e-12).omega_L == doctest::Approx(1.0));
    CHECK(s.sample(30.0).omega_R == 3.0);
    CHECK(s.final().omega_L == 0.0);
    CHECK(s.max_omega_total() == doctest::Approx(3.0));

    // jump without the fast flag
    CHECK_THROWS_AS(ControlSchedule({Stage{1.0, Profile::constant(1.0), Profile::constant(0.0)},
                                     Stage{1.0, Profile::constant(2.0), Profile::constant(0.0)}}),
                    ValidationError);
    CHECK_THROWS_AS(ControlSchedule({Stage{-1.0, Profile::constant(1.0), Profile::constant(0.0)}}), ValidationError);

    const auto r = s.with_ramp_time(7.0);
    CHECK(r.stages()[0].duration == 10.0);
    CHECK(r.stages()[1].duration == 7.0);
}

TEST_CASE("unitary DFT is an isometry") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n;
    for (std::size_t len : {8u, 64u, 1000u, 2048u}) {
        ComplexBuffer x(len);
        double nx = 0.0;
        for (auto& v : x) {
            v = {n(rng), n(rng)};
            nx += std::norm(v);
        }
        const auto X = unitary_dft(x);
        double nX = 0.0;
        for (const auto& v : X) nX += std::norm(v);
        CHECK(std::abs(nX - nx) <= 1e-12 * nx);
        const auto y = unitary_idft(X);
        double err = 0.0;
        for (std::size_t i = 0; i < len; ++i) err = std::max(err, std::abs(y[i] - x[i]));
        CHECK(err < 1e-12);
    }
}

TEST_CASE("forward DFT matches the direct sum") {
    const std::size_t n = 12;
    ComplexBuffer x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = {std::cos(0.3 * j), std::sin(0.7 * j * j)};
    ComplexBuffer X = x;
    FftPlan plan(n);
    plan.forward(X.data());
    for (std::size_t k = 0; k < n; ++k) {
        cplx s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += x[j] * std::polar(1.0, -2.0 * M_PI * double(j * k) / n);
        CHECK(std::abs(s - X[k]) < 1e-12);
    }
}
