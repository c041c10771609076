#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "kfp/grid.hpp"
#include "kfp/moments.hpp"

using namespace kfp;

namespace {

PhaseGrid grid1d(int nx, double vmax, int nv) {
    GridSpec s;
    s.dim = 1;
    s.space[0] = {0.0, 1.0, nx};
    s.velocity[0] = {vmax, nv};
    return PhaseGrid::build(s);
}

std::vector<double> uniform_in_x(const PhaseGrid& g, const std::vector<double>& slice) {
    std::vector<double> f(g.phase_cells());
    for (int is = 0; is < g.spatial_cells(); ++is)
        for (int iv = 0; iv < g.velocity_cells(); ++iv) f[g.phase_index(is, iv)] = slice[iv];
    return f;
}

}  // namespace

TEST_CASE("saturating cap, scalar") {
    CHECK(renorm_scalar(0.0, 1.0, 1.0) == 0.0);
    CHECK(renorm_scalar(1.0, 1.0, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    // asymptote 1/eps2
    CHECK(renorm_scalar(1e14, 1.0, 0.5) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK_THROWS_AS(renorm_scalar(-1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("saturating cap, vector") {
    const Vec a = renorm_vector({0.0, 0.0}, 2, 1.0, 1.0);
    CHECK(a[0] == 0.0);
    CHECK(a[1] == 0.0);
    const Vec b = renorm_vector({3.0, 4.0}, 2, 1.0, 0.5);  // |r| = 5, denom = 4
    CHECK(b[0] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(b[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::sqrt(norm2(b, 2)) <= std::min(2.0, 5.0) + 1e-14);
    const Vec c = renorm_vector({1.0, 0.0}, 1, 1.0, 1e-14);  // identity limit
    CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cap bound |r|_eps <= min(1/eps, |r|) with eps1 = 1") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> mag(0.0, 50.0);
    std::uniform_real_distribution<double> eps(0.01, 1.0);
    for (int k = 0; k < 500; ++k) {
        const double e = eps(rng);
        const Vec r{mag(rng) - 25.0, mag(rng) - 25.0};
        const Vec capped = renorm_vector(r, 2, 1.0, e);
        const double norm = std::sqrt(norm2(capped, 2));
        CHECK(norm <= std::min(1.0 / e, std::sqrt(norm2(r, 2))) * (1.0 + 1e-14));
    }
}

TEST_CASE("divergence of the capped velocity field") {
    CHECK(div_renorm_v({0.0, 0.0}, 1, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(div_renorm_v({1.0, 0.0}, 2, 1.0) == doctest::Approx(5.0 / 9.0).epsilon(1e-15));
    CHECK(div_renorm_v({3.0, 4.0}, 2, 1e-15) == doctest::Approx(2.0).epsilon(1e-12));
    // bounded by d for assorted inputs
    for (double v : {0.0, 0.3, 2.0, 40.0})
        CHECK(div_renorm_v({v, 0.0}, 1, 0.2) <= 1.0 + 1e-15);
}

TEST_CASE("moments of the zero field use the vacuum convention") {
    const PhaseGrid g = grid1d(4, 4.0, 16);
    std::vector<double> f(g.phase_cells(), 0.0);
    const MacroFields m = compute_moments(g, f, 0.0);
    for (int is = 0; is < g.spatial_cells(); ++is) {
        CHECK(m.rho[is] == 0.0);
        CHECK(m.velocity[2 * is] == 0.0);
        CHECK(m.temperature[is] == 0.0);
        CHECK(m.variance[is] == 0.0);
    }
}

TEST_CASE("Gaussian moment round trip") {
    const PhaseGrid g = grid1d(2, 8.0, 256);
    const std::vector<double> f = uniform_in_x(g, maxwellian(2.0, {1.0, 0.0}, 0.5, g));
    const MacroFields m = compute_moments(g, f, 1e-12);
    CHECK(m.rho[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(m.velocity[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(m.temperature[0] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("round trip error drops at order >= 2 under velocity refinement") {
    auto temp_error = [](int nv) {
        const PhaseGrid g = grid1d(2, 8.0, nv);
        const std::vector<double> f = uniform_in_x(g, maxwellian(1.0, {0.5, 0.0}, 1.0, g));
        const MacroFields m = compute_moments(g, f, 1e-12);
        return std::abs(m.temperature[0] - 1.0);
    };
    CHECK(temp_error(8) / temp_error(16) >= 4.0);
}

TEST_CASE("mixed vacuum and Maxwellian cells") {
    const PhaseGrid g = grid1d(2, 8.0, 256);
    const std::vector<double> slice = maxwellian(1.0, {0.0, 0.0}, 1.0, g);
    std::vector<double> f(g.phase_cells(), 0.0);
    for (int iv = 0; iv < g.velocity_cells(); ++iv) f[g.phase_index(1, iv)] = slice[iv];
    const MacroFields m = compute_moments(g, f, 1e-12);
    CHECK(m.rho[0] == 0.0);
    CHECK(m.temperature[0] == 0.0);
    CHECK(m.velocity[0] == 0.0);
    CHECK(m.rho[1] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(m.temperature[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("corrupted states are rejected") {
    const PhaseGrid g = grid1d(2, 2.0, 8);
    std::vector<double> f(g.phase_cells(), 1.0);
    f[3] = -1e-3;
    CHECK_THROWS_AS(compute_moments(g, f, 0.0), std::runtime_error);
}

TEST_CASE("regularized fields: printed examples") {
    MacroFields m;
    m.dim = 1;
    m.rho = {0.0, 2.0, 1.0};
    m.momentum = {0.0, 0.0, 2.0, 0.0, 0.0, 0.0};
    m.variance = {0.0, 1.0, 1e6};
    m.e2 = {0.0, 3.0, 1e6};
    m.velocity = {0.0, 0.0, 1.0, 0.0, 0.0, 0.0};
    m.temperature = {0.0, 0.5, 1e6};

    const RegularizedFields a = regularize_fields(m, 0.1);
    CHECK(a.temperature[0] == doctest::Approx(0.1).epsilon(1e-15));  // vacuum -> eps
    CHECK(a.velocity[0] == 0.0);

    const RegularizedFields b = regularize_fields(m, 0.5);
    CHECK(b.temperature[1] == doctest::Approx(1.0 / 3.0 + 0.5).epsilon(1e-15));
    CHECK(b.velocity[2] == doctest::Approx(4.0 / 7.0).epsilon(1e-15));
    CHECK(b.temperature[1] <= m.temperature[1] + 0.5 + 1e-15);  // T_reg <= T + eps
    CHECK(b.temperature[2] <= 1.0 / 0.5 + 0.5 + 1e-15);         // large-V cap 1/eps + eps

    CHECK_THROWS_AS(regularize_fields(m, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(regularize_fields(m, -1.0), std::invalid_argument);
}

TEST_CASE("regularized fields: bounds under adversarial moments") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double eps = 0.01 + 0.99 * uni(rng);
        MacroFields m;
        m.dim = 2;
        const double rho = uni(rng) < 0.2 ? 0.0 : std::pow(10.0, 8.0 * uni(rng) - 4.0);
        const double V = uni(rng) < 0.2 ? 0.0 : std::pow(10.0, 10.0 * uni(rng) - 5.0);
        const double jmag = rho * std::pow(10.0, 4.0 * uni(rng) - 2.0);
        m.rho = {rho};
        m.momentum = {jmag, -0.3 * jmag};
        m.variance = {V};
        m.e2 = {V};
        m.velocity = {0.0, 0.0};
        m.temperature = {rho > 0 ? V / rho : 0.0};
        const RegularizedFields r = regularize_fields(m, eps);
        CHECK(r.temperature[0] >= eps - 1e-18);
        CHECK(r.temperature[0] <= 1.0 / eps + eps + 1e-12);
        CHECK(std::sqrt(norm2(r.u_at(0), 2)) <= 1.0 / eps + 1e-12);
    }
}

TEST_CASE("Maxwellian evaluation") {
    const PhaseGrid g = grid1d(2, 8.0, 256);
    const std::vector<double> m = maxwellian(1.0, {0.0, 0.0}, 1.0, g);
    // peak value at the cell nearest v = 0 (centers at +-dv/2)
    const int mid = g.velocity_cells() / 2;
    const double expected = std::exp(-0.5 * g.v_at(mid)[0] * g.v_at(mid)[0]) / std::sqrt(2.0 * M_PI);
    CHECK(m[mid] == doctest::Approx(expected).epsilon(1e-14));
    double mass = 0.0;
    for (double x : m) mass += x;
    CHECK(mass * g.velocity_cell_volume() == doctest::Approx(1.0).epsilon(1e-7));

    const std::vector<double> zero = maxwellian(0.0, {0.0, 0.0}, 1.0, g);
    for (double x : zero) CHECK(x == 0.0);
    CHECK_THROWS_AS(maxwellian(1.0, {0.0, 0.0}, 0.0, g), std::invalid_argument);
}

TEST_CASE("Jensen bound rho|u|^2 <= E2 on random states") {
    const PhaseGrid g = grid1d(6, 5.0, 32);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> f(g.phase_cells());
    for (double& x : f) x = uni(rng);
    const MacroFields m = compute_moments(g, f, 1e-12);
    for (int is = 0; is < g.spatial_cells(); ++is) {
        const Vec u = m.u_at(is);
        CHECK(m.rho[is] * norm2(u, 1) <= m.e2[is] * (1.0 + 1e-13));
    }
}
