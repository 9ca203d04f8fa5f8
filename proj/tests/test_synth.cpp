#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "oracles.hpp"
#include "slt/geometry.hpp"
#include "slt/io.hpp"
#include "slt/pca.hpp"
#include "slt/rasterize.hpp"
#include "slt/synth.hpp"

using namespace slt;

TEST_CASE("generate_scene is deterministic per seed") {
    SceneSpec a = generate_scene(1234);
    SceneSpec b = generate_scene(1234);
    SceneSpec c = generate_scene(1235);
    CHECK(a == b);
    CHECK(!(a == c));
}

TEST_CASE("zero objects gives an empty scene") {
    SceneConfig cfg;
    cfg.min_objects = cfg.max_objects = 0;
    SceneSpec scene = generate_scene(7, cfg);
    CHECK(scene.objects.empty());
    RenderedViews views = render_views(scene);
    for (uint8_t v : views.gt_mask_rgb.class_ids()) CHECK(v == 0);
    for (uint8_t v : views.gt_mask_hsi.class_ids()) CHECK(v == 0);
}

TEST_CASE("class mix tracks the reference instance proportions") {
    // Targets: film 339, basket 300, cardboard 68, tape 287, filament 111,
    // bag 954 of 2059.
    const double target[7] = {0, 339, 300, 68, 287, 111, 954};
    std::map<int, int> counts;
    int total = 0;
    for (uint64_t seed = 0; seed < 1000; ++seed) {
        SceneSpec scene = generate_scene(seed);
        for (const auto& obj : scene.objects) {
            ++counts[obj.class_id];
            ++total;
        }
    }
    REQUIRE(total > 3000);
    for (int c = 1; c <= 6; ++c) {
        double measured = static_cast<double>(counts[c]) / total;
        double expected = target[c] / 2059.0;
        CHECK(std::abs(measured - expected) <= 0.2 * expected);
    }
    // bag most frequent, cardboard least
    for (int c = 1; c <= 5; ++c) CHECK(counts[6] > counts[c]);
    for (int c = 1; c <= 6; ++c)
        if (c != 3) CHECK(counts[3] < counts[c]);
}

TEST_CASE("identity rig with zero jitter and noise gives identical masks") {
    SceneConfig cfg;
    cfg.rgb_w = cfg.hsi_w = 128;
    cfg.rgb_h = cfg.hsi_h = 128;
    cfg.bands = 16;
    cfg.rig_rotation_deg = 0.0;
    cfg.rig_scale_jitter = 0.0;
    cfg.rig_translation_px = 0.0;
    cfg.object_rotation_deg = 0.0;
    cfg.object_scale_jitter = 0.0;
    cfg.object_translation_px = 0.0;
    cfg.image_noise = 0.0;
    cfg.spectral_noise = 0.0;
    SceneSpec scene = generate_scene(42, cfg);
    REQUIRE(!scene.objects.empty());
    RenderedViews views = render_views(scene);
    CHECK(views.gt_mask_rgb.class_ids() == views.gt_mask_hsi.class_ids());
    for (const auto& t : views.gt_affines)
        CHECK(t.max_coeff_distance(AffineTransform::identity()) < 1e-12);
}

TEST_CASE("per-object ground truth is exactly the warp of the visible component") {
    SceneConfig cfg;
    cfg.max_overlap_frac = 0.0;  // strict: keep objects disjoint
    SceneSpec scene = generate_scene(99, cfg);
    RenderedViews views = render_views(scene);
    REQUIRE(!scene.objects.empty());

    for (size_t i = 0; i < scene.objects.size(); ++i) {
        // Rebuild the visible component from the rgb ground truth.
        Component visible;
        visible.class_id = static_cast<uint8_t>(scene.objects[i].class_id);
        int x0 = scene.rgb_w, y0 = scene.rgb_h, x1 = -1, y1 = -1;
        for (int y = 0; y < scene.rgb_h; ++y)
            for (int x = 0; x < scene.rgb_w; ++x)
                if (views.gt_mask_rgb.instance(x, y) == i + 1) {
                    visible.pixels.push_back({x, y});
                    x0 = std::min(x0, x), y0 = std::min(y0, y);
                    x1 = std::max(x1, x), y1 = std::max(y1, y);
                }
        if (visible.pixels.empty()) continue;
        visible.bbox = Rect{x0, y0, x1 - x0 + 1, y1 - y0 + 1};

        auto warped = warp_component(visible, views.gt_affines[i], scene.hsi_w, scene.hsi_h);
        CHECK(oracle::binary_iou(warped, views.per_object_hsi[i]) == 1.0);

        // With disjoint objects the composed mask shows exactly the same set.
        std::vector<uint8_t> composed(warped.size(), 0);
        for (int y = 0; y < scene.hsi_h; ++y)
            for (int x = 0; x < scene.hsi_w; ++x)
                if (views.gt_mask_hsi.instance(x, y) == i + 1)
                    composed[static_cast<size_t>(y) * scene.hsi_w + x] = 1;
        CHECK(oracle::binary_iou(warped, composed) == 1.0);
    }
}

TEST_CASE("render_views is a pure function of the scene") {
    SceneSpec scene = generate_scene(7);
    RenderedViews a = render_views(scene);
    RenderedViews b = render_views(scene);
    CHECK(a.rgb.data() == b.rgb.data());
    CHECK(a.cube.data() == b.cube.data());
    CHECK(a.gt_mask_rgb.class_ids() == b.gt_mask_rgb.class_ids());
    CHECK(a.gt_mask_hsi.class_ids() == b.gt_mask_hsi.class_ids());
}

TEST_CASE("three distinct spectra with zero noise saturate rank-3 PCA") {
    SceneConfig cfg;
    cfg.bands = 224;
    cfg.spectral_noise = 0.0;
    cfg.image_noise = 0.0;
    cfg.min_objects = cfg.max_objects = 3;
    SceneSpec scene = generate_scene(11, cfg);
    // Force three distinct classes so three endmembers appear.
    REQUIRE(scene.objects.size() >= 1);
    RenderedViews views = render_views(scene);
    RasterImage cube_f(views.cube.width(), views.cube.height(), views.cube.bands(),
                       ValueRange::unit_float);
    for (int y = 0; y < views.cube.height(); ++y)
        for (int x = 0; x < views.cube.width(); ++x)
            for (int b = 0; b < views.cube.bands(); ++b)
                cube_f.at(x, y, b) = views.cube.at(x, y, b) / 65535.0f;
    PcaModel m = pca_fit_cube(cube_f, 3);
    CHECK(m.evr_sum() >= 0.999);
}

TEST_CASE("nearest-spectrum classification recovers the hsi ground truth") {
    SceneConfig cfg;
    cfg.spectral_noise = 200.0;  // well below half the min inter-spectrum gap
    cfg.bands = 64;
    SceneSpec scene = generate_scene(23, cfg);
    RenderedViews views = render_views(scene);

    size_t correct = 0, total = views.gt_mask_hsi.pixel_count();
    for (int y = 0; y < scene.hsi_h; ++y)
        for (int x = 0; x < scene.hsi_w; ++x) {
            int best = -1;
            double best_d = 0;
            for (int c = 0; c <= 6; ++c) {
                double d = 0;
                for (int b = 0; b < scene.bands; ++b) {
                    double diff = views.cube.at(x, y, b) - scene.class_spectra[c][b];
                    d += diff * diff;
                }
                if (best < 0 || d < best_d) {
                    best = c;
                    best_d = d;
                }
            }
            if (best == views.gt_mask_hsi.cls(x, y)) ++correct;
        }
    CHECK(static_cast<double>(correct) / total >= 0.99);
}

TEST_CASE("scene oracle maps object pixels through the true affine") {
    SceneSpec scene = generate_scene(55);
    RenderedViews views = render_views(scene);
    OracleMatcher oracle_matcher = make_scene_oracle(views);
    REQUIRE(!scene.objects.empty());

    // Pick a pixel of the first visible instance.
    for (int y = 0; y < scene.rgb_h; ++y)
        for (int x = 0; x < scene.rgb_w; ++x) {
            uint32_t inst = views.gt_mask_rgb.instance(x, y);
            if (inst == 0) continue;
            Vec2 q{x + 0.5, y + 0.5};
            auto matches = oracle_matcher.match_points(views.rgb, views.rgb, {q});
            REQUIRE(matches[0].has_value());
            Vec2 expected = views.gt_affines[inst - 1].apply(q);
            CHECK(matches[0]->dst.x == expected.x);
            CHECK(matches[0]->dst.y == expected.y);
            return;
        }
}

TEST_CASE("projective hard mode bends the views but keeps affines close") {
    SceneConfig cfg;
    cfg.projective_eps = 0.05;
    SceneSpec scene = generate_scene(66, cfg);
    REQUIRE(!scene.objects.empty());
    RenderedViews views = render_views(scene);
    // gt affines remain invertible and plausibly scaled
    for (const auto& t : views.gt_affines) {
        CHECK(std::abs(t.det()) > 0.1);
        CHECK(std::abs(t.det()) < 4.0);
    }
    size_t fg = 0;
    for (uint8_t v : views.gt_mask_hsi.class_ids()) fg += v != 0;
    CHECK(fg > 0);
}

TEST_CASE("write_dataset produces a loadable, consistent layout") {
    auto dir = std::filesystem::temp_directory_path() / "slt_synth_ds";
    std::filesystem::remove_all(dir);
    SceneConfig cfg;
    cfg.bands = 16;  // keep the cube files small
    auto manifest_path = write_dataset(dir, 3, 500, cfg);
    DatasetManifest manifest = load_manifest(manifest_path);
    REQUIRE(manifest.samples.size() == 3);

    for (const auto& rec : manifest.samples) {
        RasterImage rgb = read_png(manifest.resolve(rec.rgb_path));
        CHECK(rgb.width() == cfg.rgb_w);
        HyperCube cube = read_envi_cube(manifest.resolve(rec.cube_path));
        CHECK(cube.bands() == 16);
        CHECK(cube.wavelengths_nm.front() == doctest::Approx(900.0));
        CHECK(cube.wavelengths_nm.back() == doctest::Approx(1700.0));
        LabelMask gt_hsi = read_mask_png(manifest.resolve(rec.gt_target_mask_path));
        CHECK(gt_hsi.width() == cfg.hsi_w);
        auto affines = load_gt_affines(manifest.resolve(rec.gt_affines_path));

        // Rasterizing the annotations reproduces the rgb ground truth exactly.
        AnnotationSet ann = load_annotations(manifest.resolve(rec.annotation_path));
        LabelMask expected = read_mask_png(
            manifest.resolve(rec.rgb_path.substr(0, rec.rgb_path.size() - 8) + ".gt_rgb.png"));
        LabelMask raster = rasterize_annotations(ann, cfg.rgb_w, cfg.rgb_h, ann.width,
                                                 ann.height);
        CHECK(raster.class_ids() == expected.class_ids());
        CHECK(affines.size() >= 1);
    }

    // Rerun into a second directory: byte-identical outputs.
    auto dir2 = std::filesystem::temp_directory_path() / "slt_synth_ds2";
    std::filesystem::remove_all(dir2);
    write_dataset(dir2, 3, 500, cfg);
    for (const auto& rec : manifest.samples) {
        auto a = read_text_file(dir / rec.annotation_path);
        auto b = read_text_file(dir2 / rec.annotation_path);
        CHECK(a == b);
        auto ca = read_text_file(dir / rec.cube_path);
        auto cb = read_text_file(dir2 / rec.cube_path);
        CHECK(ca == cb);
    }
}
