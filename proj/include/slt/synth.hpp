#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "slt/affine.hpp"
#include "slt/geometry.hpp"
#include "slt/manifest.hpp"
#include "slt/matching.hpp"
#include "slt/types.hpp"

namespace slt {

// Synthetic dual line-scan rig: one scene rendered as an RGB view and a
// hyperspectral view related by a known global rig transform plus per-object
// jitter. Every object is a polygon (ellipses and ribbons are emitted as
// polygon outlines) so the ground truth, the annotations and the rendered
// masks all go through the same rasterizer.

struct ObjectSpec {
    int class_id = 0;
    std::vector<Vec2> polygon;          // rgb-frame outline
    AffineTransform jitter;             // rgb-frame, about the object centre
    bool thin_ribbon = false;
    bool operator==(const ObjectSpec&) const = default;
};

struct SceneSpec {
    uint64_t seed = 0;
    int rgb_w = 0, rgb_h = 0;
    int hsi_w = 0, hsi_h = 0;
    int bands = 0;
    AffineTransform rig;                // rgb frame -> hsi frame
    double projective_eps = 0.0;        // hard mode: perspective bend strength
    std::vector<ObjectSpec> objects;
    std::vector<std::vector<double>> class_spectra;  // index 0 = background, u16 units
    std::vector<std::array<float, 3>> class_colors;  // index 0 = background, u8 units
    double image_noise = 0.0;           // sigma, u8 units
    double spectral_noise = 0.0;        // sigma, u16 units
    bool operator==(const SceneSpec&) const = default;
};

struct SceneConfig {
    int rgb_w = 320, rgb_h = 320;
    int hsi_w = 256, hsi_h = 256;
    int bands = 224;
    int min_objects = 3, max_objects = 6;
    double ensure_ribbon_prob = 0.35;  // chance to add a ribbon when none was drawn
    // Residual rig misalignment on top of the frame-ratio scale.
    double rig_rotation_deg = 3.0;
    double rig_scale_jitter = 0.07;
    double rig_translation_px = 12.0;
    // Per-object jitter.
    double object_rotation_deg = 3.0;
    double object_scale_jitter = 0.05;
    double object_translation_px = 6.0;
    double image_noise = 2.0;
    double spectral_noise = 650.0;  // about 1% of the 16-bit range
    double projective_eps = 0.0;    // > 0 bends the rig projectively (hard mode)
    double max_overlap_frac = 0.25;
};

struct RenderedViews {
    RasterImage rgb;        // u8-range values
    HyperCube cube;         // hsi frame, wavelengths 900-1700 nm
    LabelMask gt_mask_rgb;  // instance i+1 = objects[i]
    LabelMask gt_mask_hsi;
    std::vector<AffineTransform> gt_affines;  // per object, rgb -> hsi
    // Per-object warped bitmaps before overlap resolution (hsi_w * hsi_h each).
    std::vector<std::vector<uint8_t>> per_object_hsi;
};

// Deterministic per seed; identical seeds give identical scenes.
SceneSpec generate_scene(uint64_t seed, const SceneConfig& cfg = {});

// Pure function of the scene spec.
RenderedViews render_views(const SceneSpec& scene);

// Ground-truth matcher for a rendered scene: a query maps through the true
// affine of the object that owns it (declined on background).
OracleMatcher make_scene_oracle(const RenderedViews& views);

// Writes `count` scenes as a dataset (PNG + ENVI + annotation JSON + manifest)
// rooted at out_dir; returns the manifest path. Scene i uses seed base_seed+i.
std::filesystem::path write_dataset(const std::filesystem::path& out_dir, int count,
                                    uint64_t base_seed, const SceneConfig& cfg = {});

void save_gt_affines(const std::filesystem::path& path,
                     const std::vector<AffineTransform>& affines);
std::vector<AffineTransform> load_gt_affines(const std::filesystem::path& path);

}  // namespace slt
