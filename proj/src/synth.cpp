#include "slt/synth.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "slt/errors.hpp"
#include "slt/io.hpp"
#include "slt/rasterize.hpp"
#include "slt/rng.hpp"
#include "slt/transfer.hpp"

namespace slt {

namespace {

// Instance counts per class, used as sampling weights for the class mix.
constexpr std::array<int, 6> kClassCounts = {339, 300, 68, 287, 111, 954};
constexpr int kClassTotal = 2059;

uint64_t mix_seed(uint64_t a, uint64_t b) {
    uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

int sample_class(Rng& rng) {
    int r = static_cast<int>(rng.uniform_int(0, kClassTotal - 1));
    for (int c = 0; c < 6; ++c) {
        if (r < kClassCounts[c]) return c + 1;
        r -= kClassCounts[c];
    }
    return 6;
}

std::vector<Vec2> blob_polygon(Rng& rng, Vec2 center, double radius) {
    int n = static_cast<int>(rng.uniform_int(6, 9));
    std::vector<double> angles(n);
    for (auto& a : angles) a = rng.uniform(0.0, 2.0 * M_PI);
    std::sort(angles.begin(), angles.end());
    std::vector<Vec2> poly;
    for (double a : angles) {
        double r = radius * rng.uniform(0.75, 1.25);
        poly.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
    }
    return poly;
}

std::vector<Vec2> ellipse_polygon(Rng& rng, Vec2 center, double rx, double ry) {
    double angle = rng.uniform(0.0, M_PI);
    double ca = std::cos(angle), sa = std::sin(angle);
    std::vector<Vec2> poly;
    const int n = 64;
    for (int i = 0; i < n; ++i) {
        double t = 2.0 * M_PI * i / n;
        double ex = rx * std::cos(t), ey = ry * std::sin(t);
        poly.push_back({center.x + ca * ex - sa * ey, center.y + sa * ex + ca * ey});
    }
    return poly;
}

std::vector<Vec2> quad_polygon(Rng& rng, Vec2 center, double hx, double hy) {
    double angle = rng.uniform(0.0, M_PI);
    double ca = std::cos(angle), sa = std::sin(angle);
    std::vector<Vec2> poly;
    for (auto [ux, uy] : {std::pair{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}}) {
        double ex = ux * hx * rng.uniform(0.85, 1.15);
        double ey = uy * hy * rng.uniform(0.85, 1.15);
        poly.push_back({center.x + ca * ex - sa * ey, center.y + sa * ex + ca * ey});
    }
    return poly;
}

// Strip polygon around a gently turning polyline: left offsets out, right
// offsets back. Turns are bounded so the miters stay sane.
std::vector<Vec2> ribbon_polygon(Rng& rng, Vec2 start, double length, double width) {
    int segments = static_cast<int>(rng.uniform_int(3, 5));
    double heading = rng.uniform(0.0, 2.0 * M_PI);
    std::vector<Vec2> line{start};
    double seg_len = length / segments;
    for (int i = 0; i < segments; ++i) {
        heading += rng.uniform(-M_PI / 6.0, M_PI / 6.0);
        Vec2 p = line.back();
        line.push_back({p.x + seg_len * std::cos(heading), p.y + seg_len * std::sin(heading)});
    }

    const int m = static_cast<int>(line.size());
    std::vector<Vec2> normals(m);
    for (int i = 0; i < m; ++i) {
        Vec2 d;
        if (i == 0)
            d = {line[1].x - line[0].x, line[1].y - line[0].y};
        else if (i == m - 1)
            d = {line[m - 1].x - line[m - 2].x, line[m - 1].y - line[m - 2].y};
        else
            d = {line[i + 1].x - line[i - 1].x, line[i + 1].y - line[i - 1].y};
        double len = std::hypot(d.x, d.y);
        normals[i] = {-d.y / len, d.x / len};
    }

    std::vector<Vec2> poly;
    double half = width / 2.0;
    for (int i = 0; i < m; ++i)
        poly.push_back({line[i].x + half * normals[i].x, line[i].y + half * normals[i].y});
    for (int i = m - 1; i >= 0; --i)
        poly.push_back({line[i].x - half * normals[i].x, line[i].y - half * normals[i].y});
    return poly;
}

bool polygon_inside(const std::vector<Vec2>& poly, int w, int h, double margin) {
    for (const auto& v : poly)
        if (v.x < margin || v.y < margin || v.x > w - margin || v.y > h - margin)
            return false;
    return true;
}

Vec2 polygon_center(const std::vector<Vec2>& poly) {
    Vec2 c;
    for (const auto& v : poly) {
        c.x += v.x;
        c.y += v.y;
    }
    c.x /= static_cast<double>(poly.size());
    c.y /= static_cast<double>(poly.size());
    return c;
}

std::vector<Vec2> make_object_polygon(Rng& rng, int class_id, double scale, int w, int h,
                                      bool* thin) {
    Vec2 center{rng.uniform(0.15 * w, 0.85 * w), rng.uniform(0.15 * h, 0.85 * h)};
    *thin = false;
    switch (class_id) {
        case 1:  // film: large blob
            return blob_polygon(rng, center, scale * rng.uniform(28.0, 45.0));
        case 2:  // basket: ellipse
            return ellipse_polygon(rng, center, scale * rng.uniform(16.0, 30.0),
                                   scale * rng.uniform(12.0, 24.0));
        case 3:  // cardboard: quad
            return quad_polygon(rng, center, scale * rng.uniform(16.0, 34.0),
                                scale * rng.uniform(12.0, 26.0));
        case 4:  // video tape: ribbon
            *thin = true;
            return ribbon_polygon(rng, center, scale * rng.uniform(80.0, 150.0),
                                  rng.uniform(2.0, 4.0));
        case 5:  // filament: thinner ribbon
            *thin = true;
            return ribbon_polygon(rng, center, scale * rng.uniform(60.0, 120.0),
                                  rng.uniform(1.0, 2.5));
        default:  // trash bag: blob
            return blob_polygon(rng, center, scale * rng.uniform(20.0, 40.0));
    }
}

// Smooth Gaussian-bump spectra in u16 units, distinct per class; background is
// a dim slightly sloped floor.
std::vector<std::vector<double>> make_spectra(int bands) {
    std::vector<std::vector<double>> spectra(7, std::vector<double>(bands, 0.0));
    for (int b = 0; b < bands; ++b)
        spectra[0][b] = 2500.0 + 1000.0 * b / std::max(1, bands - 1);
    for (int c = 1; c <= 6; ++c) {
        double mu = bands * c / 7.0;
        double sigma = bands * 0.055;
        double amp = 16000.0 + 3200.0 * c;
        double base = 4200.0 + 420.0 * c;
        for (int b = 0; b < bands; ++b) {
            double d = (b - mu) / sigma;
            spectra[c][b] = base + amp * std::exp(-0.5 * d * d);
        }
    }
    return spectra;
}

std::vector<std::array<float, 3>> make_colors() {
    // Gray levels well above the background so both views agree on contrast
    // polarity; per-class chroma offsets sum to zero.
    std::vector<std::array<float, 3>> colors(7);
    colors[0] = {38.0f, 40.0f, 42.0f};
    const std::array<std::array<float, 3>, 6> chroma = {{{30.0f, -10.0f, -20.0f},
                                                         {-25.0f, 20.0f, 5.0f},
                                                         {15.0f, 5.0f, -20.0f},
                                                         {-20.0f, -10.0f, 30.0f},
                                                         {25.0f, -20.0f, -5.0f},
                                                         {-15.0f, 25.0f, -10.0f}}};
    for (int c = 1; c <= 6; ++c) {
        float g = 105.0f + 18.0f * c;
        colors[c] = {std::clamp(g + chroma[c - 1][0], 0.0f, 255.0f),
                     std::clamp(g + chroma[c - 1][1], 0.0f, 255.0f),
                     std::clamp(g + chroma[c - 1][2], 0.0f, 255.0f)};
    }
    return colors;
}

}  // namespace

SceneSpec generate_scene(uint64_t seed, const SceneConfig& cfg) {
    Rng rng(mix_seed(seed, 0x5ce9e));
    SceneSpec scene;
    scene.seed = seed;
    scene.rgb_w = cfg.rgb_w;
    scene.rgb_h = cfg.rgb_h;
    scene.hsi_w = cfg.hsi_w;
    scene.hsi_h = cfg.hsi_h;
    scene.bands = cfg.bands;
    scene.image_noise = cfg.image_noise;
    scene.spectral_noise = cfg.spectral_noise;
    scene.projective_eps = cfg.projective_eps;
    scene.class_spectra = make_spectra(cfg.bands);
    scene.class_colors = make_colors();

    // Rig: frame-ratio scale plus a residual the transfer has to recover.
    AffineTransform base = AffineTransform::scaling(
        static_cast<double>(cfg.hsi_w) / cfg.rgb_w,
        static_cast<double>(cfg.hsi_h) / cfg.rgb_h);
    double rot = rng.uniform(-cfg.rig_rotation_deg, cfg.rig_rotation_deg) * M_PI / 180.0;
    double sx = 1.0 + rng.uniform(-cfg.rig_scale_jitter, cfg.rig_scale_jitter);
    double sy = 1.0 + rng.uniform(-cfg.rig_scale_jitter, cfg.rig_scale_jitter);
    double tx = rng.uniform(-cfg.rig_translation_px, cfg.rig_translation_px);
    double ty = rng.uniform(-cfg.rig_translation_px, cfg.rig_translation_px);
    AffineTransform residual =
        AffineTransform::translation(tx, ty)
            .compose(AffineTransform::rotation(rot, {cfg.hsi_w / 2.0, cfg.hsi_h / 2.0}))
            .compose(AffineTransform::scaling(sx, sy));
    scene.rig = residual.compose(base);

    const double scale = std::min(cfg.rgb_w, cfg.rgb_h) / 320.0;
    const int want = static_cast<int>(rng.uniform_int(cfg.min_objects, cfg.max_objects));

    std::vector<uint8_t> occupancy(static_cast<size_t>(cfg.rgb_w) * cfg.rgb_h, 0);
    LabelMask scratch(cfg.rgb_w, cfg.rgb_h);

    auto try_place = [&](int class_id) {
        for (int attempt = 0; attempt < 20; ++attempt) {
            bool thin = false;
            std::vector<Vec2> poly = make_object_polygon(rng, class_id, scale, cfg.rgb_w,
                                                         cfg.rgb_h, &thin);
            if (!polygon_inside(poly, cfg.rgb_w, cfg.rgb_h, 4.0)) continue;

            std::fill(scratch.class_ids().begin(), scratch.class_ids().end(), 0);
            fill_polygon(scratch, poly, 1, 0);
            size_t area = 0, overlap = 0;
            for (size_t i = 0; i < occupancy.size(); ++i) {
                if (!scratch.class_ids()[i]) continue;
                ++area;
                overlap += occupancy[i];
            }
            if (area == 0) continue;
            if (static_cast<double>(overlap) > cfg.max_overlap_frac * area) continue;

            for (size_t i = 0; i < occupancy.size(); ++i)
                if (scratch.class_ids()[i]) occupancy[i] = 1;

            ObjectSpec obj;
            obj.class_id = class_id;
            obj.polygon = std::move(poly);
            obj.thin_ribbon = thin;
            Vec2 c = polygon_center(obj.polygon);
            double orot = rng.uniform(-cfg.object_rotation_deg, cfg.object_rotation_deg) *
                          M_PI / 180.0;
            double os = 1.0 + rng.uniform(-cfg.object_scale_jitter, cfg.object_scale_jitter);
            double otx = rng.uniform(-cfg.object_translation_px, cfg.object_translation_px);
            double oty = rng.uniform(-cfg.object_translation_px, cfg.object_translation_px);
            AffineTransform about = AffineTransform::translation(-c.x, -c.y);
            AffineTransform back = AffineTransform::translation(c.x + otx, c.y + oty);
            obj.jitter = back.compose(AffineTransform::rotation(orot))
                             .compose(AffineTransform::scaling(os, os))
                             .compose(about);
            scene.objects.push_back(std::move(obj));
            return true;
        }
        return false;
    };

    for (int i = 0; i < want; ++i) try_place(sample_class(rng));

    bool has_ribbon = false;
    for (const auto& o : scene.objects) has_ribbon |= o.thin_ribbon;
    if (!has_ribbon && want > 0 && rng.uniform() < cfg.ensure_ribbon_prob) {
        // 4:video tape vs 5:filament in their natural ratio.
        int cls = rng.uniform_int(0, kClassCounts[3] + kClassCounts[4] - 1) <
                          kClassCounts[3]
                      ? 4
                      : 5;
        try_place(cls);
    }
    return scene;
}

namespace {

Vec2 apply_view_map(const SceneSpec& scene, Vec2 p) {
    Vec2 q = scene.rig.apply(p);
    if (scene.projective_eps != 0.0) {
        // Mild projective bend about the hsi centre.
        double u = (p.x - scene.rgb_w / 2.0) / scene.rgb_w;
        double v = (p.y - scene.rgb_h / 2.0) / scene.rgb_h;
        double wdiv = 1.0 + scene.projective_eps * (u + v);
        Vec2 c{scene.hsi_w / 2.0, scene.hsi_h / 2.0};
        q = {c.x + (q.x - c.x) / wdiv, c.y + (q.y - c.y) / wdiv};
    }
    return q;
}

// Per-object ground-truth affine. Exact in affine mode; the least-squares
// affinization of the projective map over the object's outline in hard mode.
AffineTransform object_gt_affine(const SceneSpec& scene, const ObjectSpec& obj) {
    AffineTransform full = scene.rig.compose(obj.jitter);
    if (scene.projective_eps == 0.0) return full;
    std::vector<PointPair> pairs;
    for (const auto& v : obj.polygon) {
        Vec2 jittered = obj.jitter.apply(v);
        pairs.push_back({v, apply_view_map(scene, jittered)});
    }
    Vec2 c = polygon_center(obj.polygon);
    pairs.push_back({c, apply_view_map(scene, obj.jitter.apply(c))});
    AffineFitConfig fit_cfg;
    fit_cfg.det_floor = 1e-9;
    return fit_affine(pairs, fit_cfg);
}

}  // namespace

RenderedViews render_views(const SceneSpec& scene) {
    RenderedViews out;
    const int rw = scene.rgb_w, rh = scene.rgb_h;
    const int hw = scene.hsi_w, hh = scene.hsi_h;
    const int n = static_cast<int>(scene.objects.size());

    // Rasterize every object through the shared polygon rasterizer and resolve
    // overlaps exactly like the transfer output does.
    std::vector<MaskLayer> rgb_layers(n);
    for (int i = 0; i < n; ++i) {
        const ObjectSpec& obj = scene.objects[i];
        LabelMask scratch(rw, rh);
        fill_polygon(scratch, obj.polygon, static_cast<uint8_t>(obj.class_id), 0);
        MaskLayer layer;
        layer.bitmap.assign(scratch.class_ids().begin(), scratch.class_ids().end());
        for (auto& v : layer.bitmap) v = v ? 1 : 0;
        layer.class_id = static_cast<uint8_t>(obj.class_id);
        layer.instance_id = static_cast<uint32_t>(i + 1);
        layer.source_area = static_cast<size_t>(
            std::count(layer.bitmap.begin(), layer.bitmap.end(), uint8_t{1}));
        layer.priority_rank = class_priority_rank(TransferConfig{}.class_priority,
                                                  obj.class_id);
        rgb_layers[i] = std::move(layer);
    }
    out.gt_mask_rgb = compose_layers(rgb_layers, rw, rh);

    // Visible (post-overlap) pixels per object drive the hsi ground truth, so
    // the hsi mask is exactly the warp of what the dataset mask shows.
    out.gt_affines.resize(n);
    std::vector<MaskLayer> hsi_layers;
    out.per_object_hsi.resize(n);
    for (int i = 0; i < n; ++i) {
        const ObjectSpec& obj = scene.objects[i];
        out.gt_affines[i] = object_gt_affine(scene, obj);

        Component visible;
        visible.class_id = static_cast<uint8_t>(obj.class_id);
        visible.instance_id = static_cast<uint32_t>(i + 1);
        int x0 = rw, y0 = rh, x1 = -1, y1 = -1;
        for (int y = 0; y < rh; ++y)
            for (int x = 0; x < rw; ++x)
                if (out.gt_mask_rgb.instance(x, y) == visible.instance_id) {
                    visible.pixels.push_back({x, y});
                    x0 = std::min(x0, x), y0 = std::min(y0, y);
                    x1 = std::max(x1, x), y1 = std::max(y1, y);
                }
        if (visible.pixels.empty()) {
            out.per_object_hsi[i].assign(static_cast<size_t>(hw) * hh, 0);
            continue;
        }
        visible.bbox = Rect{x0, y0, x1 - x0 + 1, y1 - y0 + 1};

        std::vector<uint8_t> warped;
        if (scene.projective_eps == 0.0) {
            warped = warp_component(visible, out.gt_affines[i], hw, hh);
        } else {
            // Projective mode: invert the bent map per pixel with a few
            // quasi-Newton steps seeded from the affine approximation.
            warped.assign(static_cast<size_t>(hw) * hh, 0);
            std::vector<uint8_t> bm = visible.local_bitmap();
            AffineTransform approx_inv = out.gt_affines[i].inverse();
            auto fwd = [&](Vec2 s) { return apply_view_map(scene, obj.jitter.apply(s)); };
            for (int ty = 0; ty < hh; ++ty)
                for (int tx = 0; tx < hw; ++tx) {
                    Vec2 t{tx + 0.5, ty + 0.5};
                    Vec2 s = approx_inv.apply(t);
                    for (int it = 0; it < 3; ++it) {
                        Vec2 f = fwd(s);
                        Vec2 step = approx_inv.apply_vector({t.x - f.x, t.y - f.y});
                        s = {s.x + step.x, s.y + step.y};
                    }
                    int sx = static_cast<int>(std::floor(s.x)) - visible.bbox.x;
                    int sy = static_cast<int>(std::floor(s.y)) - visible.bbox.y;
                    if (sx < 0 || sy < 0 || sx >= visible.bbox.w || sy >= visible.bbox.h)
                        continue;
                    if (bm[static_cast<size_t>(sy) * visible.bbox.w + sx])
                        warped[static_cast<size_t>(ty) * hw + tx] = 1;
                }
        }
        out.per_object_hsi[i] = warped;

        MaskLayer layer;
        layer.bitmap = std::move(warped);
        layer.class_id = static_cast<uint8_t>(obj.class_id);
        layer.instance_id = static_cast<uint32_t>(i + 1);
        layer.source_area = visible.pixels.size();
        layer.priority_rank = rgb_layers[i].priority_rank;
        hsi_layers.push_back(std::move(layer));
    }
    out.gt_mask_hsi = compose_layers(hsi_layers, hw, hh);

    // RGB view: flat class colors plus noise, one seeded stream per row.
    out.rgb = RasterImage(rw, rh, 3, ValueRange::u8_0_255);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < rh; ++y) {
        Rng noise(mix_seed(scene.seed, 0x1000 + y));
        for (int x = 0; x < rw; ++x) {
            const auto& color = scene.class_colors[out.gt_mask_rgb.cls(x, y)];
            for (int c = 0; c < 3; ++c) {
                double v = color[c] + noise.normal() * scene.image_noise;
                out.rgb.at(x, y, c) = static_cast<float>(
                    std::clamp(std::round(v), 0.0, 255.0));
            }
        }
    }

    // Hyperspectral view: class spectrum plus noise per band.
    out.cube = HyperCube(hw, hh, scene.bands);
    out.cube.wavelengths_nm.resize(scene.bands);
    for (int b = 0; b < scene.bands; ++b)
        out.cube.wavelengths_nm[b] =
            900.0 + 800.0 * b / std::max(1, scene.bands - 1);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < hh; ++y) {
        Rng noise(mix_seed(scene.seed, 0x2000000 + y));
        for (int x = 0; x < hw; ++x) {
            const auto& spectrum = scene.class_spectra[out.gt_mask_hsi.cls(x, y)];
            for (int b = 0; b < scene.bands; ++b) {
                double v = spectrum[b] + noise.normal() * scene.spectral_noise;
                out.cube.at(x, y, b) = static_cast<uint16_t>(
                    std::clamp(std::round(v), 0.0, 65535.0));
            }
        }
    }
    return out;
}

OracleMatcher make_scene_oracle(const RenderedViews& views) {
    const LabelMask* rgb_mask = &views.gt_mask_rgb;
    const std::vector<AffineTransform>* affines = &views.gt_affines;
    return OracleMatcher([rgb_mask, affines](Vec2 q) -> std::optional<Vec2> {
        int x = static_cast<int>(std::floor(q.x));
        int y = static_cast<int>(std::floor(q.y));
        uint32_t inst = 0;
        for (int r = 0; r <= 2 && inst == 0; ++r) {
            for (int dy = -r; dy <= r && inst == 0; ++dy)
                for (int dx = -r; dx <= r && inst == 0; ++dx) {
                    int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= rgb_mask->width() ||
                        ny >= rgb_mask->height())
                        continue;
                    inst = rgb_mask->instance(nx, ny);
                }
        }
        if (inst == 0 || inst > affines->size()) return std::nullopt;
        return (*affines)[inst - 1].apply(q);
    });
}

void save_gt_affines(const std::filesystem::path& path,
                     const std::vector<AffineTransform>& affines) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& t : affines) {
        auto c = t.coeffs();
        list.push_back({{c[0], c[1], c[2]}, {c[3], c[4], c[5]}});
    }
    nlohmann::json doc{{"schema", "gt-affines/1"}, {"affines", list}};
    write_text_file(path, doc.dump(2) + "\n");
}

std::vector<AffineTransform> load_gt_affines(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("bad gt affine file " + path.string() + ": " + e.what());
    }
    std::vector<AffineTransform> out;
    for (const auto& m : doc.at("affines")) {
        AffineTransform t;
        t.a = m.at(0).at(0).get<double>();
        t.b = m.at(0).at(1).get<double>();
        t.tx = m.at(0).at(2).get<double>();
        t.c = m.at(1).at(0).get<double>();
        t.d = m.at(1).at(1).get<double>();
        t.ty = m.at(1).at(2).get<double>();
        out.push_back(t);
    }
    return out;
}

std::filesystem::path write_dataset(const std::filesystem::path& out_dir, int count,
                                    uint64_t base_seed, const SceneConfig& cfg) {
    std::filesystem::create_directories(out_dir / "samples");

    DatasetManifest manifest;
    manifest.taxonomy = default_taxonomy();
    manifest.base_dir = out_dir;

    for (int i = 0; i < count; ++i) {
        SceneSpec scene = generate_scene(base_seed + static_cast<uint64_t>(i), cfg);
        RenderedViews views = render_views(scene);

        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "scene_%04d", i);
        std::string id(idbuf);
        std::string stem = "samples/" + id;

        write_png(out_dir / (stem + ".rgb.png"), views.rgb);
        write_envi_cube(out_dir / (stem + ".cube.hdr"), views.cube);
        write_mask_png(out_dir / (stem + ".gt_rgb.png"), views.gt_mask_rgb);
        write_mask_png(out_dir / (stem + ".gt_hsi.png"), views.gt_mask_hsi);
        save_gt_affines(out_dir / (stem + ".gt_affines.json"), views.gt_affines);

        // Annotations in overlap-resolution paint order, so later-wins
        // rasterization reproduces the ground-truth mask exactly.
        AnnotationSet ann;
        ann.width = scene.rgb_w;
        ann.height = scene.rgb_h;
        std::vector<size_t> order(scene.objects.size());
        for (size_t j = 0; j < order.size(); ++j) order[j] = j;
        std::vector<size_t> areas(scene.objects.size(), 0);
        for (size_t j = 0; j < scene.objects.size(); ++j) {
            LabelMask scratch(scene.rgb_w, scene.rgb_h);
            fill_polygon(scratch, scene.objects[j].polygon,
                         static_cast<uint8_t>(scene.objects[j].class_id), 0);
            areas[j] = std::count_if(scratch.class_ids().begin(), scratch.class_ids().end(),
                                     [](uint8_t v) { return v != 0; });
        }
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            if (areas[a] != areas[b]) return areas[a] > areas[b];
            int ra = class_priority_rank(TransferConfig{}.class_priority,
                                         scene.objects[a].class_id);
            int rb = class_priority_rank(TransferConfig{}.class_priority,
                                         scene.objects[b].class_id);
            if (ra != rb) return ra > rb;
            return a > b;
        });
        for (size_t j : order) {
            Annotation a;
            a.class_name = class_name_by_id(manifest.taxonomy, scene.objects[j].class_id);
            a.instance_id = static_cast<uint32_t>(j + 1);
            a.polygon = scene.objects[j].polygon;
            ann.instances.push_back(std::move(a));
        }
        save_annotations(out_dir / (stem + ".annotations.json"), ann);

        SampleRecord rec;
        rec.id = id;
        rec.rgb_path = stem + ".rgb.png";
        rec.cube_path = stem + ".cube.hdr";
        rec.annotation_path = stem + ".annotations.json";
        rec.gt_target_mask_path = stem + ".gt_hsi.png";
        rec.gt_affines_path = stem + ".gt_affines.json";
        rec.split = (i % 5 == 4) ? Split::val : Split::train;
        manifest.samples.push_back(std::move(rec));
    }

    std::filesystem::path manifest_path = out_dir / "manifest.json";
    save_manifest(manifest_path, manifest);
    return manifest_path;
}

}  // namespace slt
