#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "oracles.hpp"
#include "slt/errors.hpp"
#include "slt/image_ops.hpp"
#include "slt/io.hpp"
#include "slt/preprocess.hpp"
#include "slt/rasterize.hpp"
#include "slt/rng.hpp"

using namespace slt;

namespace {

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "slt_core_test";
    std::filesystem::create_directories(dir);
    return dir;
}

std::set<uint8_t> label_set(const LabelMask& m) {
    return std::set<uint8_t>(m.class_ids().begin(), m.class_ids().end());
}

}  // namespace

TEST_CASE("preprocess produces production shapes") {
    RasterImage rgb(1200, 1184, 3, ValueRange::u8_0_255);
    HyperCube cube(600, 640, 224);
    Rng rng(1);
    for (auto& v : rgb.data()) v = static_cast<float>(rng.uniform_int(0, 255));
    for (auto& v : cube.data()) v = static_cast<uint16_t>(rng.uniform_int(0, 65535));

    auto out = preprocess(rgb, cube, std::nullopt, PreprocessConfig{});
    CHECK(out.rgb.width() == 256);
    CHECK(out.rgb.height() == 256);
    CHECK(out.rgb.channels() == 3);
    CHECK(out.cube.width() == 256);
    CHECK(out.cube.height() == 256);
    CHECK(out.cube.channels() == 224);
    CHECK(out.rgb.range() == ValueRange::unit_float);
    for (float v : out.rgb.data()) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("preprocess normalization endpoints") {
    RasterImage rgb(4, 4, 3, ValueRange::u8_0_255);
    for (auto& v : rgb.data()) v = 255.0f;
    HyperCube cube(4, 4, 8);
    for (auto& v : cube.data()) v = 65535;

    PreprocessConfig cfg;
    cfg.target_w = cfg.target_h = 4;
    auto out = preprocess(rgb, cube, std::nullopt, cfg);
    CHECK(out.rgb.at(0, 0, 0) == 1.0f);
    CHECK(out.cube.at(3, 3, 7) == 1.0f);
}

TEST_CASE("preprocess identity crop and size is bit-exact after conversion") {
    Rng rng(2);
    RasterImage rgb(17, 13, 3, ValueRange::u8_0_255);
    for (auto& v : rgb.data()) v = static_cast<float>(rng.uniform_int(0, 255));
    HyperCube cube(17, 13, 5);
    for (auto& v : cube.data()) v = static_cast<uint16_t>(rng.uniform_int(0, 65535));

    PreprocessConfig cfg;
    cfg.target_w = 17;
    cfg.target_h = 13;
    auto out = preprocess(rgb, cube, std::nullopt, cfg);
    for (int y = 0; y < 13; ++y)
        for (int x = 0; x < 17; ++x) {
            for (int c = 0; c < 3; ++c)
                CHECK(out.rgb.at(x, y, c) ==
                      rgb.at(x, y, c) * static_cast<float>(1.0 / 255.0));
            for (int b = 0; b < 5; ++b)
                CHECK(out.cube.at(x, y, b) ==
                      static_cast<float>(cube.at(x, y, b) * (1.0f / 65535.0f)));
        }
}

TEST_CASE("preprocess error paths") {
    RasterImage rgb(32, 32, 3, ValueRange::u8_0_255);
    HyperCube cube(16, 16, 4);

    SUBCASE("crop out of bounds") {
        PreprocessConfig cfg;
        cfg.rgb_crop = Rect{20, 20, 20, 20};
        CHECK_THROWS_AS(preprocess(rgb, cube, std::nullopt, cfg), BadCrop);
    }
    SUBCASE("mask shape mismatch") {
        LabelMask mask(16, 16);
        CHECK_THROWS_AS(preprocess(rgb, cube, mask, PreprocessConfig{}), ShapeMismatch);
    }
}

TEST_CASE("mask resize introduces no new labels") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        auto m = oracle::random_mask(rng, 40, 30, 4);
        int tw = static_cast<int>(rng.uniform_int(8, 90));
        int th = static_cast<int>(rng.uniform_int(8, 90));
        auto r = resize_nearest(m, tw, th);
        auto src_labels = label_set(m);
        for (uint8_t v : label_set(r)) CHECK(src_labels.count(v) == 1);
    }
}

TEST_CASE("rasterize_annotations") {
    SUBCASE("empty set gives all background") {
        AnnotationSet ann;
        ann.width = 32;
        ann.height = 32;
        auto m = rasterize_annotations(ann, 32, 32, 32, 32);
        for (uint8_t v : m.class_ids()) CHECK(v == 0);
    }
    SUBCASE("right triangle matches the per-pixel even-odd oracle") {
        AnnotationSet ann;
        ann.width = 16;
        ann.height = 16;
        ann.instances.push_back({"film", 1, {{0, 0}, {10, 0}, {0, 10}}});
        auto m = rasterize_annotations(ann, 16, 16, 16, 16);
        size_t count = 0;
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) {
                bool inside = oracle::point_in_polygon(ann.instances[0].polygon, x + 0.5,
                                                       y + 0.5);
                CHECK((m.cls(x, y) == 1) == inside);
                count += inside;
            }
        CHECK(count == oracle::count_inside_pixels(ann.instances[0].polygon, 16, 16));
    }
    SUBCASE("later annotation wins the overlap") {
        AnnotationSet ann;
        ann.width = 32;
        ann.height = 32;
        ann.instances.push_back({"film", 1, {{2, 2}, {20, 2}, {20, 20}, {2, 20}}});
        ann.instances.push_back({"basket", 2, {{10, 10}, {28, 10}, {28, 28}, {10, 28}}});
        auto m = rasterize_annotations(ann, 32, 32, 32, 32);
        CHECK(m.cls(15, 15) == 2);
        CHECK(m.cls(5, 5) == 1);
        CHECK(m.instance(15, 15) == 2);
    }
    SUBCASE("degenerate polygon throws") {
        AnnotationSet ann;
        ann.width = 8;
        ann.height = 8;
        ann.instances.push_back({"film", 1, {{1, 1}, {1, 1}, {1, 1}, {1, 1}}});
        CHECK_THROWS_AS(rasterize_annotations(ann, 8, 8, 8, 8), DegeneratePolygon);
    }
    SUBCASE("scaling from source coordinates") {
        AnnotationSet ann;
        ann.width = 64;
        ann.height = 64;
        ann.instances.push_back({"film", 1, {{0, 0}, {64, 0}, {64, 64}, {0, 64}}});
        auto m = rasterize_annotations(ann, 16, 16, 64, 64);
        for (uint8_t v : m.class_ids()) CHECK(v == 1);
    }
}

TEST_CASE("raster area tracks analytic polygon area on random convex polygons") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        // convex polygon: radial vertices around a center, sorted angles
        double cx = rng.uniform(20, 44), cy = rng.uniform(20, 44);
        double r = rng.uniform(6, 16);
        std::vector<double> angles;
        for (int i = 0; i < 12; ++i) angles.push_back(rng.uniform(0, 2 * M_PI));
        std::sort(angles.begin(), angles.end());
        std::vector<Vec2> poly;
        for (double a : angles) poly.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});

        LabelMask m(64, 64);
        fill_polygon(m, poly, 1, 0);
        double raster_area = 0;
        for (uint8_t v : m.class_ids()) raster_area += v != 0;
        double analytic = oracle::polygon_area(poly);
        double perimeter = oracle::polygon_perimeter(poly);
        CHECK(std::abs(raster_area - analytic) <= perimeter);
    }
}

TEST_CASE("augment") {
    Rng rng(12);
    RasterImage rgb(48, 48, 3, ValueRange::unit_float);
    RasterImage cube(48, 48, 4, ValueRange::unit_float);
    for (auto& v : rgb.data()) v = static_cast<float>(rng.uniform());
    for (auto& v : cube.data()) v = static_cast<float>(rng.uniform());
    LabelMask mask(48, 48);
    for (int y = 10; y < 30; ++y)
        for (int x = 14; x < 34; ++x) mask.cls(x, y) = 2;

    SUBCASE("no-op spec returns the inputs") {
        auto out = apply_augment(rgb, cube, mask, AugmentSpec{});
        CHECK(out.rgb.data() == rgb.data());
        CHECK(out.cube.data() == cube.data());
        CHECK(out.mask.class_ids() == mask.class_ids());
    }
    SUBCASE("hflip twice is the identity") {
        AugmentSpec flip;
        flip.hflip = true;
        auto once = apply_augment(rgb, cube, mask, flip);
        auto twice = apply_augment(once.rgb, once.cube, once.mask, flip);
        for (size_t i = 0; i < rgb.data().size(); ++i)
            CHECK(twice.rgb.data()[i] == doctest::Approx(rgb.data()[i]).epsilon(1e-6));
        CHECK(twice.mask.class_ids() == mask.class_ids());
    }
    SUBCASE("rotation adds no new labels") {
        AugmentSpec spec;
        spec.rotation_deg = 30.0;
        auto out = apply_augment(rgb, cube, mask, spec);
        auto allowed = label_set(mask);
        for (uint8_t v : label_set(out.mask)) CHECK(allowed.count(v) == 1);
    }
    SUBCASE("one shared coordinate map across image and mask") {
        // Coordinate-encoding image: channel 0 = x, channel 1 = y.
        RasterImage coords(48, 48, 2, ValueRange::unit_float);
        for (int y = 0; y < 48; ++y)
            for (int x = 0; x < 48; ++x) {
                coords.at(x, y, 0) = static_cast<float>(x);
                coords.at(x, y, 1) = static_cast<float>(y);
            }
        LabelMask full(48, 48);
        for (auto& v : full.class_ids()) v = 1;

        AugmentSpec spec;
        spec.rotation_deg = 20.0;
        spec.hflip = true;
        auto out = apply_augment(coords, coords, full, spec);

        // Oracle: the same map assembled by hand.
        double th = 20.0 * M_PI / 180.0;
        double cs = std::cos(th), sn = std::sin(th);
        auto inverse_map = [&](double x, double y) {
            // undo rotation about center (24,24), then undo hflip
            double dx = x - 24.0, dy = y - 24.0;
            double rx = cs * dx + sn * dy + 24.0;
            double ry = -sn * dx + cs * dy + 24.0;
            return Vec2{48.0 - rx, ry};
        };
        int checked = 0;
        for (int y = 4; y < 44; ++y)
            for (int x = 4; x < 44; ++x) {
                if (out.mask.cls(x, y) != 1) continue;
                Vec2 src = inverse_map(x + 0.5, y + 0.5);
                if (src.x < 1 || src.y < 1 || src.x > 46 || src.y > 46) continue;
                CHECK(out.rgb.at(x, y, 0) ==
                      doctest::Approx(src.x - 0.5).epsilon(1e-4));
                CHECK(out.rgb.at(x, y, 1) ==
                      doctest::Approx(src.y - 0.5).epsilon(1e-4));
                ++checked;
            }
        CHECK(checked > 500);
    }
    SUBCASE("seeded sampling stays within limits and is deterministic") {
        auto a = augment(rgb, cube, mask, 30.0, 77);
        auto b = augment(rgb, cube, mask, 30.0, 77);
        CHECK(a.rgb.data() == b.rgb.data());
        Rng r2(123);
        for (int i = 0; i < 50; ++i) {
            AugmentSpec s = sample_augment_spec(r2, 30.0);
            CHECK(std::abs(s.rotation_deg) <= 30.0);
        }
    }
}

TEST_CASE("png round trip") {
    auto dir = temp_dir();
    Rng rng(3);
    RasterImage img(21, 17, 3, ValueRange::u8_0_255);
    for (auto& v : img.data()) v = static_cast<float>(rng.uniform_int(0, 255));
    write_png(dir / "rt.png", img);
    RasterImage back = read_png(dir / "rt.png");
    CHECK(back.width() == img.width());
    CHECK(back.height() == img.height());
    CHECK(back.channels() == 3);
    CHECK(back.data() == img.data());
}

TEST_CASE("mask png round trip with instances") {
    auto dir = temp_dir();
    LabelMask mask(13, 9);
    mask.cls(2, 3) = 4;
    mask.set_instance(2, 3, 17);
    mask.cls(5, 5) = 2;
    mask.set_instance(5, 5, 3);
    write_mask_png(dir / "mask.png", mask);
    LabelMask back = read_mask_png(dir / "mask.png");
    CHECK(back.class_ids() == mask.class_ids());
    CHECK(back.instance_ids() == mask.instance_ids());
}

TEST_CASE("envi round trips") {
    auto dir = temp_dir();
    Rng rng(4);
    SUBCASE("u16 bsq cube with wavelengths") {
        HyperCube cube(9, 7, 12);
        for (auto& v : cube.data()) v = static_cast<uint16_t>(rng.uniform_int(0, 65535));
        cube.wavelengths_nm.resize(12);
        for (int b = 0; b < 12; ++b) cube.wavelengths_nm[b] = 900.0 + b * 66.0;
        write_envi_cube(dir / "cube.hdr", cube);
        HyperCube back = read_envi_cube(dir / "cube.hdr");
        CHECK(back.data() == cube.data());
        CHECK(back.wavelengths_nm.size() == 12);
        CHECK(back.wavelengths_nm[3] == doctest::Approx(cube.wavelengths_nm[3]));
    }
    SUBCASE("float bip raster") {
        RasterImage img(6, 5, 3, ValueRange::unit_float);
        for (auto& v : img.data()) v = static_cast<float>(rng.uniform());
        write_envi_float(dir / "img.hdr", img);
        RasterImage back = read_envi_float(dir / "img.hdr");
        CHECK(back.data() == img.data());
    }
    SUBCASE("malformed header throws ParseError") {
        write_text_file(dir / "bad.hdr", "not an envi file\nsamples = 3\n");
        CHECK_THROWS_AS(read_envi_cube(dir / "bad.hdr"), ParseError);
    }
    SUBCASE("truncated raw throws ParseError") {
        HyperCube cube(4, 4, 2);
        write_envi_cube(dir / "trunc.hdr", cube);
        write_text_file(dir / "trunc.raw", "abc");
        CHECK_THROWS_AS(read_envi_cube(dir / "trunc.hdr"), ParseError);
    }
}

TEST_CASE("manifest and annotations round trip") {
    auto dir = temp_dir();
    DatasetManifest m;
    m.taxonomy = default_taxonomy();
    m.samples.push_back({"s1", "a.png", "a.hdr", "a.json", Split::train, "", ""});
    m.samples.push_back({"s2", "b.png", "b.hdr", "b.json", Split::val, "gt.png", ""});
    save_manifest(dir / "manifest.json", m);
    auto back = load_manifest(dir / "manifest.json");
    CHECK(back.samples.size() == 2);
    CHECK(back.samples[1].split == Split::val);
    CHECK(back.samples[1].gt_target_mask_path == "gt.png");
    CHECK(back.find("s1") != nullptr);
    CHECK(back.find("nope") == nullptr);
    CHECK(back.resolve("a.png").string().find(dir.string()) == 0);

    AnnotationSet ann;
    ann.width = 100;
    ann.height = 80;
    ann.instances.push_back({"filament", 2, {{1, 2}, {3, 4}, {5, 0}}});
    save_annotations(dir / "ann.json", ann);
    auto ann_back = load_annotations(dir / "ann.json");
    CHECK(ann_back.width == 100);
    CHECK(ann_back.instances.size() == 1);
    CHECK(ann_back.instances[0].class_name == "filament");
    CHECK(ann_back.instances[0].polygon[2] == Vec2{5, 0});
}

TEST_CASE("duplicate manifest ids are rejected") {
    auto dir = temp_dir();
    write_text_file(dir / "dup.json", R"({
      "schema": "dataset-manifest/1",
      "classes": [{"id": 1, "name": "film"}],
      "samples": [{"id": "x"}, {"id": "x"}]
    })");
    CHECK_THROWS_AS(load_manifest(dir / "dup.json"), ParseError);
}
