#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "slt/errors.hpp"
#include "slt/io.hpp"
#include "slt/matching.hpp"
#include "slt/reference.hpp"
#include "slt/rng.hpp"

using namespace slt;

namespace {

// Textured test image: smooth blobs plus seeded noise, enough structure for
// correlation to lock on anywhere.
RasterImage textured(int w, int h, uint64_t seed, double noise = 4.0) {
    Rng rng(seed);
    RasterImage img(w, h, 1, ValueRange::u8_0_255);
    struct Blob {
        double x, y, r, amp;
    };
    std::vector<Blob> blobs;
    for (int i = 0; i < 24; ++i)
        blobs.push_back({rng.uniform(0, w), rng.uniform(0, h), rng.uniform(4, 16),
                         rng.uniform(30, 120)});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double v = 60.0;
            for (const auto& b : blobs) {
                double d2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
                v += b.amp * std::exp(-d2 / (2 * b.r * b.r));
            }
            v += rng.normal() * noise;
            img.at(x, y, 0) = static_cast<float>(std::clamp(v, 0.0, 255.0));
        }
    return img;
}

RasterImage translated(const RasterImage& img, int dx, int dy) {
    RasterImage out(img.width(), img.height(), 1, img.range());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            int sx = x - dx, sy = y - dy;
            if (sx >= 0 && sy >= 0 && sx < img.width() && sy < img.height())
                out.at(x, y, 0) = img.at(sx, sy, 0);
        }
    return out;
}

}  // namespace

TEST_CASE("ncc self-match returns the query with near-perfect confidence") {
    RasterImage img = textured(128, 128, 10);
    NccMatcher matcher;
    std::vector<Vec2> queries;
    Rng rng(3);
    for (int i = 0; i < 12; ++i)
        queries.push_back({rng.uniform(20, 108), rng.uniform(20, 108)});
    auto matches = matcher.match_points(img, img, queries);
    for (size_t i = 0; i < queries.size(); ++i) {
        REQUIRE(matches[i].has_value());
        CHECK(matches[i]->dst.x == doctest::Approx(queries[i].x));
        CHECK(matches[i]->dst.y == doctest::Approx(queries[i].y));
        CHECK(matches[i]->confidence >= 0.99);
    }
}

TEST_CASE("ncc finds an integer translation exactly") {
    RasterImage src = textured(128, 128, 11);
    RasterImage tgt = translated(src, 5, 3);
    NccMatcher matcher;
    std::vector<Vec2> queries = {{40.0, 40.0}, {64.0, 70.0}, {90.5, 55.5}};
    auto matches = matcher.match_points(src, tgt, queries);
    for (size_t i = 0; i < queries.size(); ++i) {
        REQUIRE(matches[i].has_value());
        CHECK(matches[i]->dst.x == doctest::Approx(queries[i].x + 5));
        CHECK(matches[i]->dst.y == doctest::Approx(queries[i].y + 3));
        CHECK(matches[i]->confidence >= 0.99);

        // Oracle: exhaustive single-level NCC agrees on the displacement.
        auto brute = ref::ncc_match_brute(src, tgt, queries[i], matcher.config());
        REQUIRE(brute.has_value());
        CHECK(brute->dst.x == matches[i]->dst.x);
        CHECK(brute->dst.y == matches[i]->dst.y);
    }
}

TEST_CASE("ncc equivariance: shifting the target shifts every interior match") {
    RasterImage src = textured(96, 96, 12);
    NccMatcher matcher;
    std::vector<Vec2> queries;
    for (int y = 30; y <= 60; y += 15)
        for (int x = 30; x <= 60; x += 15) queries.push_back({double(x), double(y)});
    auto base = matcher.match_points(src, src, queries);
    for (auto [dx, dy] : {std::pair{7, 0}, {0, 9}, {4, 6}}) {
        RasterImage tgt = translated(src, dx, dy);
        auto shifted = matcher.match_points(src, tgt, queries);
        for (size_t i = 0; i < queries.size(); ++i) {
            REQUIRE(base[i].has_value());
            REQUIRE(shifted[i].has_value());
            CHECK(shifted[i]->dst.x == base[i]->dst.x + dx);
            CHECK(shifted[i]->dst.y == base[i]->dst.y + dy);
        }
    }
}

TEST_CASE("ncc rejects flat patches") {
    RasterImage flat(64, 64, 1, ValueRange::u8_0_255);
    for (auto& v : flat.data()) v = 128.0f;
    RasterImage tex = textured(64, 64, 13);
    NccMatcher matcher;
    auto matches = matcher.match_points(flat, tex, {{32.0, 32.0}});
    CHECK(!matches[0].has_value());
}

TEST_CASE("ncc on unrelated noise stays below the confidence gate") {
    Rng rng(14);
    RasterImage a(96, 96, 1, ValueRange::u8_0_255);
    RasterImage b(96, 96, 1, ValueRange::u8_0_255);
    for (auto& v : a.data()) v = static_cast<float>(rng.uniform_int(0, 255));
    for (auto& v : b.data()) v = static_cast<float>(rng.uniform_int(0, 255));
    NccMatcher matcher;  // min_confidence 0.5
    std::vector<Vec2> queries;
    for (int i = 0; i < 10; ++i)
        queries.push_back({rng.uniform(30, 66), rng.uniform(30, 66)});
    auto matches = matcher.match_points(a, b, queries);
    for (const auto& m : matches) CHECK(!m.has_value());
}

TEST_CASE("ncc near the border still matches with clipped windows") {
    RasterImage src = textured(96, 96, 15);
    RasterImage tgt = translated(src, 2, 1);
    NccMatcher matcher;
    auto matches = matcher.match_points(src, tgt, {{5.0, 48.0}, {48.0, 5.0}});
    for (const auto& m : matches) {
        REQUIRE(m.has_value());
        CHECK(m->confidence >= 0.5);
    }
}

TEST_CASE("ncc bridges different frame sizes through the frame-ratio scale") {
    RasterImage src = textured(128, 128, 16);
    // Target = source downscaled 2x (plain 2x2 box filter).
    RasterImage tgt(64, 64, 1, ValueRange::u8_0_255);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            tgt.at(x, y, 0) = 0.25f * (src.at(2 * x, 2 * y, 0) + src.at(2 * x + 1, 2 * y, 0) +
                                       src.at(2 * x, 2 * y + 1, 0) +
                                       src.at(2 * x + 1, 2 * y + 1, 0));
    NccMatcher matcher;
    std::vector<Vec2> queries = {{40.0, 40.0}, {80.0, 60.0}, {64.0, 96.0}};
    auto matches = matcher.match_points(src, tgt, queries);
    for (size_t i = 0; i < queries.size(); ++i) {
        REQUIRE(matches[i].has_value());
        CHECK(std::abs(matches[i]->dst.x - queries[i].x / 2.0) <= 1.5);
        CHECK(std::abs(matches[i]->dst.y - queries[i].y / 2.0) <= 1.5);
    }
}

TEST_CASE("matcher contract determinism") {
    RasterImage src = textured(96, 96, 17);
    RasterImage tgt = translated(src, 3, 2);
    NccMatcher matcher;
    std::vector<Vec2> queries = {{30, 30}, {50, 60}, {70, 40}};
    auto a = matcher.match_points(src, tgt, queries);
    auto b = matcher.match_points(src, tgt, queries);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].has_value() == b[i].has_value());
        if (a[i]) {
            CHECK(a[i]->dst.x == b[i]->dst.x);
            CHECK(a[i]->dst.y == b[i]->dst.y);
            CHECK(a[i]->confidence == b[i]->confidence);
        }
    }
}

TEST_CASE("queries outside the source frame throw BadQuery") {
    RasterImage img = textured(32, 32, 18);
    NccMatcher matcher;
    CHECK_THROWS_AS(matcher.match_points(img, img, {{40.0, 10.0}}), BadQuery);
    OracleMatcher oracle(AffineTransform::identity());
    CHECK_THROWS_AS(oracle.match_points(img, img, {{-1.0, 0.0}}), BadQuery);
}

TEST_CASE("oracle matcher applies the ground-truth affine exactly") {
    RasterImage img = textured(64, 64, 19);
    AffineTransform t{1.1, 0.05, 4.0, -0.02, 0.95, -3.0};
    OracleMatcher oracle(t);
    std::vector<Vec2> queries = {{10, 10}, {30, 20}, {50, 50}};
    auto matches = oracle.match_points(img, img, queries);
    for (size_t i = 0; i < queries.size(); ++i) {
        REQUIRE(matches[i].has_value());
        Vec2 expected = t.apply(queries[i]);
        CHECK(matches[i]->dst.x == expected.x);
        CHECK(matches[i]->dst.y == expected.y);
        CHECK(matches[i]->confidence == 1.0);
    }
}

TEST_CASE("file matcher") {
    auto dir = std::filesystem::temp_directory_path() / "slt_match_test";
    std::filesystem::create_directories(dir);
    RasterImage img = textured(64, 64, 20);

    SUBCASE("verbatim and snapped records") {
        write_text_file(dir / "m.jsonl",
                        R"({"sample_id": "s1", "src": [10.0, 10.0], "dst": [12.0, 13.0], "confidence": 0.9})"
                        "\n"
                        R"({"sample_id": "s1", "src": [30.0, 30.0], "dst": [31.0, 30.0], "confidence": 0.8})"
                        "\n"
                        R"({"sample_id": "other", "src": [50.0, 50.0], "dst": [0.0, 0.0], "confidence": 1.0})"
                        "\n");
        FileMatcher matcher(dir / "m.jsonl", "s1");
        CHECK(matcher.record_count() == 2);
        auto matches = matcher.match_points(img, img, {{10.0, 10.0}, {29.0, 30.0}, {50.0, 50.0}});
        REQUIRE(matches[0].has_value());  // exact hit
        CHECK(matches[0]->dst.x == 12.0);
        CHECK(matches[0]->confidence == 0.9);
        REQUIRE(matches[1].has_value());  // 1 px away, snap_radius 2
        CHECK(matches[1]->dst.x == 31.0);
        CHECK(!matches[2].has_value());   // only in another sample
    }
    SUBCASE("empty file yields no matches") {
        write_text_file(dir / "empty.jsonl", "");
        FileMatcher matcher(dir / "empty.jsonl", "s1");
        auto matches = matcher.match_points(img, img, {{10.0, 10.0}});
        CHECK(!matches[0].has_value());
    }
    SUBCASE("missing file throws MissingMatches") {
        CHECK_THROWS_AS(FileMatcher(dir / "nope.jsonl", "s1"), MissingMatches);
    }
    SUBCASE("malformed record throws ParseError") {
        write_text_file(dir / "bad.jsonl", "{\"sample_id\": \"s1\", \"src\": [1.0]}\n");
        CHECK_THROWS_AS(FileMatcher(dir / "bad.jsonl", "s1"), ParseError);
    }
    SUBCASE("low-confidence records are filtered") {
        write_text_file(dir / "low.jsonl",
                        R"({"sample_id": "s1", "src": [10.0, 10.0], "dst": [12.0, 13.0], "confidence": 0.2})"
                        "\n");
        FileMatcher matcher(dir / "low.jsonl", "s1");
        auto matches = matcher.match_points(img, img, {{10.0, 10.0}});
        CHECK(!matches[0].has_value());
    }
}
