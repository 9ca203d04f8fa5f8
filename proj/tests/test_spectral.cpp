#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>

#include "slt/errors.hpp"
#include "slt/pca.hpp"
#include "slt/reference.hpp"
#include "slt/rng.hpp"

using namespace slt;

namespace {

// 3 smooth endmembers mixed with noise, interleaved float cube.
RasterImage endmember_cube(int w, int h, int bands, double noise, uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> ends(3, std::vector<double>(bands));
    for (int e = 0; e < 3; ++e) {
        double mu = bands * (e + 1) / 4.0;
        for (int b = 0; b < bands; ++b) {
            double d = (b - mu) / (bands * 0.08);
            ends[e][b] = 0.2 + 0.6 * std::exp(-0.5 * d * d);
        }
    }
    RasterImage cube(w, h, bands, ValueRange::unit_float);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int e = static_cast<int>(rng.uniform_int(0, 2));
            float* px = cube.pixel(x, y);
            for (int b = 0; b < bands; ++b)
                px[b] = static_cast<float>(ends[e][b] + rng.normal() * noise);
        }
    return cube;
}

}  // namespace

TEST_CASE("pca_fit recovers the dominant direction of 2-band data") {
    Rng rng(21);
    std::vector<float> pixels;
    for (int i = 0; i < 4000; ++i) {
        double t = rng.normal();
        pixels.push_back(static_cast<float>(t + 0.01 * rng.normal()));
        pixels.push_back(static_cast<float>(t + 0.01 * rng.normal()));
    }
    PcaModel m = pca_fit(pixels, 2, 1);
    CHECK(m.component(0, 0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-2));
    CHECK(m.component(0, 1) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-2));
    CHECK(m.explained_variance_ratio[0] >= 0.99);
}

TEST_CASE("pca_fit degenerate inputs") {
    SUBCASE("constant pixels") {
        std::vector<float> pixels(100 * 4, 0.25f);
        CHECK_THROWS_AS(pca_fit(pixels, 4, 2), DegenerateData);
    }
    SUBCASE("k above the band count") {
        std::vector<float> pixels(100 * 4, 0.0f);
        CHECK_THROWS_AS(pca_fit(pixels, 4, 5), BadRank);
    }
    SUBCASE("k below 1") {
        std::vector<float> pixels(100 * 4, 0.0f);
        CHECK_THROWS_AS(pca_fit(pixels, 4, 0), BadRank);
    }
    SUBCASE("too few samples") {
        std::vector<float> pixels(2 * 4, 0.0f);
        CHECK_THROWS_AS(pca_fit(pixels, 4, 2), DegenerateData);
    }
}

TEST_CASE("three endmembers at 224 bands: k=3 captures the variance") {
    RasterImage cube = endmember_cube(48, 48, 224, 0.01, 31);
    PcaModel m = pca_fit_cube(cube, 3);
    CHECK(m.evr_sum() >= 0.99);

    // Non-increasing EVR, orthonormal components.
    CHECK(m.explained_variance_ratio[0] >= m.explained_variance_ratio[1]);
    CHECK(m.explained_variance_ratio[1] >= m.explained_variance_ratio[2]);
    for (int r = 0; r < 3; ++r)
        for (int s = 0; s < 3; ++s) {
            double dot = 0;
            for (int b = 0; b < 224; ++b) dot += m.component(r, b) * m.component(s, b);
            CHECK(dot == doctest::Approx(r == s ? 1.0 : 0.0).epsilon(1e-6));
        }

    // Oracle: EVR against an independent serial covariance and full
    // eigendecomposition; totals via the trace.
    CovarianceResult cov = ref::sample_covariance(cube.data().data(), cube.pixel_count(),
                                                  224);
    Eigen::Map<const Eigen::MatrixXd> covm(cov.covariance.data(), 224, 224);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covm);
    double trace = covm.trace();
    for (int r = 0; r < 3; ++r) {
        double lambda = solver.eigenvalues()[223 - r];
        CHECK(m.explained_variance_ratio[r] == doctest::Approx(lambda / trace).epsilon(1e-9));
    }
}

TEST_CASE("pca_fit is deterministic and sign-normalized") {
    RasterImage cube = endmember_cube(16, 16, 32, 0.02, 5);
    PcaModel a = pca_fit_cube(cube, 3);
    PcaModel b = pca_fit_cube(cube, 3);
    CHECK(a.components == b.components);
    CHECK(a.mean == b.mean);
    for (int r = 0; r < a.k; ++r) {
        double maxmag = 0.0, signed_val = 0.0;
        for (int j = 0; j < a.source_band_count; ++j)
            if (std::abs(a.component(r, j)) > maxmag) {
                maxmag = std::abs(a.component(r, j));
                signed_val = a.component(r, j);
            }
        CHECK(signed_val > 0.0);
    }
}

TEST_CASE("pca_apply") {
    // Hand-built model: mean (0.5, 0.5), single component (1/sqrt2, 1/sqrt2).
    PcaModel m;
    m.source_band_count = 2;
    m.k = 1;
    m.mean = {0.5, 0.5};
    m.components = {std::sqrt(0.5), std::sqrt(0.5)};
    m.explained_variance_ratio = {1.0};

    SUBCASE("the mean maps to zero") {
        RasterImage cube(1, 1, 2, ValueRange::unit_float);
        cube.at(0, 0, 0) = 0.5f;
        cube.at(0, 0, 1) = 0.5f;
        RasterImage out = pca_apply(cube, m);
        CHECK(out.at(0, 0, 0) == doctest::Approx(0.0).epsilon(1e-7));
    }
    SUBCASE("hand-computed projection") {
        RasterImage cube(1, 1, 2, ValueRange::unit_float);
        cube.at(0, 0, 0) = 0.7f;
        cube.at(0, 0, 1) = 0.9f;
        RasterImage out = pca_apply(cube, m);
        // (0.2 + 0.4) / sqrt(2) = 0.42426...
        CHECK(out.at(0, 0, 0) == doctest::Approx(0.6 * std::sqrt(0.5)).epsilon(1e-5));
    }
    SUBCASE("band mismatch throws") {
        RasterImage cube(1, 1, 3, ValueRange::unit_float);
        CHECK_THROWS_AS(pca_apply(cube, m), ShapeMismatch);
    }
}

TEST_CASE("full-rank projection is invertible and preserves inner products") {
    RasterImage cube = endmember_cube(12, 12, 16, 0.05, 8);
    PcaModel m = pca_fit_cube(cube, 16);
    RasterImage proj = pca_apply(cube, m);
    RasterImage rec = pca_reconstruct(proj, m);
    for (size_t i = 0; i < cube.data().size(); ++i)
        CHECK(rec.data()[i] == doctest::Approx(cube.data()[i]).epsilon(1e-4));

    // Pairwise inner products of centered pixels survive the rotation.
    auto centered_dot = [&](const RasterImage& img, size_t i, size_t j, int c,
                            const std::vector<double>& mean) {
        double acc = 0;
        for (int b = 0; b < c; ++b)
            acc += (img.data()[i * c + b] - mean[b]) * (img.data()[j * c + b] - mean[b]);
        return acc;
    };
    std::vector<double> zero(16, 0.0);
    for (auto [i, j] : {std::pair<size_t, size_t>{0, 1}, {5, 9}, {20, 77}}) {
        double orig = centered_dot(cube, i, j, 16, m.mean);
        double pro = centered_dot(proj, i, j, 16, zero);
        CHECK(pro == doctest::Approx(orig).epsilon(1e-5));
    }
}

TEST_CASE("rank-3 reconstruction beats 20 random rank-3 projections") {
    RasterImage cube = endmember_cube(24, 24, 48, 0.02, 77);
    PcaModel m = pca_fit_cube(cube, 3);
    RasterImage rec = pca_reconstruct(pca_apply(cube, m), m);
    auto mse = [&](const RasterImage& a, const RasterImage& b) {
        double acc = 0;
        for (size_t i = 0; i < a.data().size(); ++i) {
            double d = a.data()[i] - b.data()[i];
            acc += d * d;
        }
        return acc / a.data().size();
    };
    double pca_mse = mse(cube, rec);

    Rng rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd g(48, 3);
        for (int i = 0; i < 48; ++i)
            for (int j = 0; j < 3; ++j) g(i, j) = rng.normal();
        Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() *
                            Eigen::MatrixXd::Identity(48, 3);
        PcaModel randm = m;
        for (int r = 0; r < 3; ++r)
            for (int b = 0; b < 48; ++b) randm.components[r * 48 + b] = q(b, r);
        RasterImage rrec = pca_reconstruct(pca_apply(cube, randm), randm);
        CHECK(pca_mse <= mse(cube, rrec) + 1e-12);
    }
}

TEST_CASE("pca_fit_cube subsample stays deterministic per seed") {
    RasterImage cube = endmember_cube(64, 64, 8, 0.02, 9);
    PcaModel a = pca_fit_cube(cube, 2, 1000, 42);
    PcaModel b = pca_fit_cube(cube, 2, 1000, 42);
    PcaModel c = pca_fit_cube(cube, 2, 1000, 43);
    CHECK(a.components == b.components);
    CHECK(a.evr_sum() == doctest::Approx(c.evr_sum()).epsilon(0.05));
}

TEST_CASE("u16 cube apply matches the float path") {
    HyperCube cube(8, 8, 4);
    Rng rng(6);
    for (auto& v : cube.data()) v = static_cast<uint16_t>(rng.uniform_int(0, 65535));
    RasterImage as_float(8, 8, 4, ValueRange::unit_float);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            for (int b = 0; b < 4; ++b)
                as_float.at(x, y, b) = static_cast<float>(cube.at(x, y, b) / 65535.0);
    PcaModel m = pca_fit_cube(as_float, 2);
    RasterImage from_u16 = pca_apply(cube, m);
    RasterImage from_float = pca_apply(as_float, m);
    for (size_t i = 0; i < from_u16.data().size(); ++i)
        CHECK(from_u16.data()[i] ==
              doctest::Approx(from_float.data()[i]).epsilon(1e-5));
}

TEST_CASE("false_color") {
    HyperCube cube(4, 4, 5);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            cube.at(x, y, 0) = 1000;                                    // constant band
            cube.at(x, y, 1) = static_cast<uint16_t>(1000 * (x + y));  // gradient
            cube.at(x, y, 2) = static_cast<uint16_t>(500 * x);
        }
    SUBCASE("constant band stretches to zero") {
        RasterImage img = false_color(cube, 0, 0, 0);
        for (float v : img.data()) CHECK(v == 0.0f);
    }
    SUBCASE("same band three times gives a gray triplicate") {
        RasterImage img = false_color(cube, 1, 1, 1);
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) {
                CHECK(img.at(x, y, 0) == img.at(x, y, 1));
                CHECK(img.at(x, y, 1) == img.at(x, y, 2));
            }
        CHECK(img.at(0, 0, 0) == 0.0f);
        CHECK(img.at(3, 3, 0) == 1.0f);
    }
    SUBCASE("band index out of range") {
        CHECK_THROWS_AS(false_color(cube, 0, 1, 9), BadQuery);
    }
    SUBCASE("distinct materials produce distinct colors") {
        // two regions with different spectra
        HyperCube c2(8, 4, 3);
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 8; ++x) {
                bool left = x < 4;
                c2.at(x, y, 0) = left ? 60000 : 5000;
                c2.at(x, y, 1) = left ? 5000 : 60000;
                c2.at(x, y, 2) = 30000;
            }
        RasterImage img = false_color(c2, 0, 1, 2);
        double left_r = 0, right_r = 0;
        for (int y = 0; y < 4; ++y) {
            left_r += img.at(1, y, 0);
            right_r += img.at(6, y, 0);
        }
        CHECK(left_r / 4 > 0.9);
        CHECK(right_r / 4 < 0.1);
    }
}

TEST_CASE("model JSON round trip") {
    auto dir = std::filesystem::temp_directory_path() / "slt_pca_test";
    std::filesystem::create_directories(dir);
    RasterImage cube = endmember_cube(16, 16, 12, 0.02, 55);
    PcaModel m = pca_fit_cube(cube, 3);
    save_pca_model(dir / "model.json", m);
    PcaModel back = load_pca_model(dir / "model.json");
    CHECK(back.k == 3);
    CHECK(back.source_band_count == 12);
    CHECK(back.mean == m.mean);
    CHECK(back.components == m.components);
    CHECK(back.explained_variance_ratio == m.explained_variance_ratio);
}
