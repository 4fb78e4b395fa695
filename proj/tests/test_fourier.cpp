#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fouriermask/fourier.hpp"
#include "support/oracles.hpp"

using namespace fouriermask;

namespace {

CoefficientField random_field(int f, bool global, int h, int w, std::mt19937_64& gen, double scale) {
    CoefficientField field = global ? CoefficientField::global(f) : CoefficientField::per_pixel(f, h, w);
    std::uniform_real_distribution<double> d(-scale, scale);
    for (double& v : field.values()) v = d(gen);
    return field;
}

}  // namespace

TEST_CASE("make_grid s=1 matches i/H normalization") {
    const CoordinateGrid g = make_grid(2, 2, 1);
    REQUIRE(g.size() == 4);
    const double expected[4][2] = {{0, 0}, {0, 0.5}, {0.5, 0}, {0.5, 0.5}};
    for (int r = 0; r < 4; ++r) {
        CHECK(g.coords[r].row == expected[r][0]);
        CHECK(g.coords[r].col == expected[r][1]);
    }
}

TEST_CASE("make_grid s=2 has step 0.25 on a 2x2 base") {
    const CoordinateGrid g = make_grid(2, 2, 2);
    REQUIRE(g.size() == 16);
    CHECK(g.rows == 4);
    CHECK(g.cols == 4);
    CHECK(g.step == 0.5);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            CHECK(g.coords[i * 4 + j].row == 0.25 * i);
            CHECK(g.coords[i * 4 + j].col == 0.25 * j);
        }
}

TEST_CASE("make_grid 28x28 at s=2 is 56x56") {
    const CoordinateGrid g = make_grid(28, 28, 2);
    CHECK(g.rows == 56);
    CHECK(g.cols == 56);
    CHECK(g.size() == 56u * 56u);
    for (const auto& c : g.coords) {
        CHECK(c.row >= 0.0);
        CHECK(c.row < 1.0);
    }
}

TEST_CASE("make_grid guards") {
    CHECK_THROWS_AS(make_grid(0, 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(3, 3, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(1024, 1024, 8), std::invalid_argument);  // 2^34 points
    CHECK_THROWS_AS(make_grid(1024, 1024, 5), std::invalid_argument);  // 2^28 points
    CHECK_NOTHROW(scale_multiplier(4));
}

TEST_CASE("mapping at the origin is cos 1, sin 0") {
    const FrequencyLattice l(3);
    const Matrix m = fourier_mapping(make_grid(4, 4, 1), l);
    for (std::size_t k = 0; k < l.size(); ++k) {
        CHECK(m(0, k) == 1.0);
        CHECK(m(0, l.size() + k) == 0.0);
    }
}

TEST_CASE("mapping at (0, 0.25) for entry (0, 1)") {
    const FrequencyLattice l(1);
    const Matrix m = fourier_mapping(make_grid(4, 4, 1), l);
    const auto k = static_cast<std::size_t>(l.index_of({0, 1}));
    // grid row r = 1 is (0, 0.25)
    CHECK(std::abs(m(1, k)) < 1e-15);
    CHECK(m(1, l.size() + k) == doctest::Approx(1.0));
}

TEST_CASE("grid mapping agrees with direct evaluation") {
    const FrequencyLattice l(4);
    const CoordinateGrid g = make_grid(9, 11, 1);
    const Matrix m = fourier_mapping(g, l);
    std::vector<double> row(2 * l.size());
    for (std::size_t r = 0; r < g.size(); ++r) {
        mapping_row(g.coords[r], l, row);
        for (std::size_t k = 0; k < row.size(); ++k) {
            const Frequency& fq = l[k % l.size()];
            const double theta = 2.0 * std::numbers::pi * (fq.u * g.coords[r].row + fq.v * g.coords[r].col);
            const double ref = k < l.size() ? std::cos(theta) : std::sin(theta);
            CHECK(std::abs(m(r, k) - ref) < 1e-12);
            CHECK(std::abs(row[k] - ref) < 1e-12);
        }
    }
}

TEST_CASE("mapping is periodic in each coordinate") {
    const FrequencyLattice l(5);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    std::vector<double> a(2 * l.size()), b(2 * l.size()), c(2 * l.size());
    for (int trial = 0; trial < 50; ++trial) {
        const Coordinate x{d(gen), d(gen)};
        mapping_row(x, l, a);
        mapping_row({x.row + 1.0, x.col}, l, b);
        mapping_row({x.row, x.col - 2.0}, l, c);
        for (std::size_t k = 0; k < a.size(); ++k) {
            CHECK(std::abs(a[k] - b[k]) < 1e-12);
            CHECK(std::abs(a[k] - c[k]) < 1e-12);
        }
    }
}

TEST_CASE("fourier_features identities") {
    const FrequencyLattice l(2);
    const CoordinateGrid g = make_grid(5, 5, 1);
    const Matrix m = fourier_mapping(g, l);

    CoefficientField ones = CoefficientField::global(2);
    std::fill(ones.values().begin(), ones.values().end(), 1.0);
    CHECK(fourier_features(m, ones) == m);

    const Matrix zero = fourier_features(m, CoefficientField::global(2));
    CHECK(zero.isZero(0.0));

    CoefficientField dc = CoefficientField::global(2);
    dc.values()[0] = 2.0;
    const Matrix ff = fourier_features(m, dc);
    for (Eigen::Index r = 0; r < ff.rows(); ++r) {
        CHECK(ff(r, 0) == 2.0);
        for (Eigen::Index k = 1; k < ff.cols(); ++k) CHECK(ff(r, k) == 0.0);
    }

    CHECK_THROWS_AS(fourier_features(m, CoefficientField::per_pixel(2, 4, 5)), std::invalid_argument);
    CHECK_THROWS_AS(fourier_features(m, CoefficientField::global(3)), std::invalid_argument);
}

TEST_CASE("synthesize_mask examples") {
    const Matrix zeros = Matrix::Zero(6, 4);
    const MaskRaster half = synthesize_mask(zeros, 2, 3);
    for (double v : half.values) CHECK(v == 0.5);
    CHECK_THROWS_AS(synthesize_mask(zeros, 2, 2), std::invalid_argument);

    // DC-only coefficient a.
    const FrequencyLattice l(2);
    const CoordinateGrid g = make_grid(3, 4, 1);
    CoefficientField dc = CoefficientField::global(2);
    dc.values()[0] = -1.3;
    const MaskRaster flat = synthesize_mask(fourier_features(fourier_mapping(g, l), dc), 3, 4);
    for (double v : flat.values) CHECK(v == doctest::Approx(1.0 / (1.0 + std::exp(1.3))).epsilon(1e-14));

    // f=1, cosine (0,1) = 3 on a 4x4 grid: value depends on column only.
    const FrequencyLattice l1(1);
    CoefficientField w = CoefficientField::global(1);
    w.values()[static_cast<std::size_t>(l1.index_of({0, 1}))] = 3.0;
    const MaskRaster y = synthesize_mask(fourier_features(fourier_mapping(make_grid(4, 4, 1), l1), w), 4, 4);
    const double expected[4] = {1.0 / (1.0 + std::exp(-3.0)), 0.5, 1.0 / (1.0 + std::exp(3.0)), 0.5};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(y.at(i, j) == doctest::Approx(expected[j]).epsilon(1e-12));
}

TEST_CASE("synthesized values stay in (0, 1) and the logit is linear in W") {
    std::mt19937_64 gen(11);
    const FrequencyLattice l(3);
    const CoordinateGrid g = make_grid(8, 8, 1);
    const Matrix m = fourier_mapping(g, l);
    for (int trial = 0; trial < 10; ++trial) {
        CoefficientField w = random_field(3, trial % 2 == 0, 8, 8, gen, 2.0);
        const MaskRaster y = evaluate_mask(g, w);
        for (double v : y.values) {
            CHECK(v > 0.0);
            CHECK(v < 1.0);
        }
        const std::vector<double> z = presigmoid_sums(g, w);
        CoefficientField w2 = w;
        for (double& v : w2.values()) v *= 2.0;
        const std::vector<double> z2 = presigmoid_sums(g, w2);
        for (std::size_t r = 0; r < z.size(); ++r) CHECK(z2[r] == 2.0 * z[r]);
    }
}

TEST_CASE("streamed evaluation equals the materialized pipeline bit for bit") {
    std::mt19937_64 gen(5);
    const FrequencyLattice l(4);
    const CoordinateGrid g = make_grid(10, 9, 1);
    const CoefficientField w = random_field(4, false, 10, 9, gen, 1.5);
    const MaskRaster a = synthesize_mask(fourier_features(fourier_mapping(g, l), w), 10, 9);
    const MaskRaster b = evaluate_mask(g, w);
    CHECK(a.values == b.values);
}

TEST_CASE("per-pixel broadcast of a global field gives the same raster") {
    std::mt19937_64 gen(9);
    const CoordinateGrid g = make_grid(7, 6, 1);
    const CoefficientField global = random_field(3, true, 0, 0, gen, 1.0);
    const MaskRaster a = evaluate_mask(g, global);
    const MaskRaster b = evaluate_mask(g, CoefficientField::broadcast(global, 7, 6));
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.values[i] - b.values[i]) < 1e-12);
}

TEST_CASE("synthesis_gradient trivial cases") {
    const FrequencyLattice l(2);
    const CoordinateGrid g = make_grid(4, 4, 1);
    std::mt19937_64 gen(1);
    const CoefficientField w = random_field(2, true, 0, 0, gen, 1.0);
    const std::vector<double> zero(16, 0.0);
    const CoefficientField gz = synthesis_gradient(g, l, w, zero);
    for (double v : gz.values()) CHECK(v == 0.0);

    // One pixel, DC only: dL/da = g * s(a) (1 - s(a)).
    const FrequencyLattice l0(0);
    const CoordinateGrid g1 = make_grid(1, 1, 1);
    CoefficientField a = CoefficientField::global(0, {0.7, 0.0});
    const std::vector<double> up = {-2.5};
    const CoefficientField ga = synthesis_gradient(g1, l0, a, up);
    const double s = 1.0 / (1.0 + std::exp(-0.7));
    CHECK(ga.values()[0] == doctest::Approx(-2.5 * s * (1.0 - s)).epsilon(1e-14));
    CHECK(ga.values()[1] == 0.0);

    CHECK_THROWS_AS(synthesis_gradient(g, l, w, std::vector<double>(3, 0.0)), std::invalid_argument);
}

TEST_CASE("synthesis_gradient matches central differences") {
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const int f = static_cast<int>(gen() % 4);
        const int h = 2 * f + 1 + static_cast<int>(gen() % (8 - 2 * f));
        const int w = 2 * f + 1 + static_cast<int>(gen() % (8 - 2 * f));
        const bool global = trial % 2 == 0;
        const FrequencyLattice l(f);
        const CoordinateGrid g = make_grid(h, w, 1);
        CoefficientField field = random_field(f, global, h, w, gen, 0.8);
        std::vector<double> up(g.size());
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        for (double& v : up) v = d(gen);

        // L = sum_r up_r * y_r
        auto loss = [&](const std::vector<double>& values) {
            CoefficientField probe = field;
            probe.values() = values;
            const MaskRaster y = evaluate_mask(g, probe);
            double acc = 0.0;
            for (std::size_t r = 0; r < y.size(); ++r) acc += up[r] * y.values[r];
            return acc;
        };
        const CoefficientField analytic = synthesis_gradient(g, l, field, up);
        std::vector<double> numeric(field.values().size());
        for (std::size_t k = 0; k < numeric.size(); ++k) {
            numeric[k] = fmk_test::central_difference(loss, field.values(), k);
        }
        CHECK(fmk_test::max_relative_error(analytic.values(), numeric) < 1e-4);
    }
}
