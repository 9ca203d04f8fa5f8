#include "slt/preprocess.hpp"

#include <cmath>

#include "slt/errors.hpp"

namespace slt {

namespace {

Rect full_frame_or(const Rect& r, int w, int h) {
    if (r.empty()) return Rect{0, 0, w, h};
    return r;
}

}  // namespace

PreprocessedSample preprocess(const RasterImage& rgb, const HyperCube& cube,
                              const std::optional<LabelMask>& mask,
                              const PreprocessConfig& cfg) {
    if (rgb.empty() || cube.empty()) throw ShapeMismatch("preprocess: empty input");
    if (cfg.target_w <= 0 || cfg.target_h <= 0)
        throw ShapeMismatch("preprocess: target size must be positive");
    if (mask && (mask->width() != rgb.width() || mask->height() != rgb.height()))
        throw ShapeMismatch("preprocess: mask does not match the RGB frame");

    Rect rc = full_frame_or(cfg.rgb_crop, rgb.width(), rgb.height());
    Rect cc = full_frame_or(cfg.cube_crop, cube.width(), cube.height());

    PreprocessedSample out;
    out.rgb = resize_bilinear(normalize(crop(rgb, rc), cfg.rgb_norm_divisor),
                              cfg.target_w, cfg.target_h);
    out.cube = resize_bilinear(cube_to_float(crop(cube, cc), cfg.cube_norm_divisor),
                               cfg.target_w, cfg.target_h);
    if (mask) out.mask = resize_nearest(crop(*mask, rc), cfg.target_w, cfg.target_h);
    return out;
}

AffineTransform augment_transform(const AugmentSpec& spec, int w, int h) {
    AffineTransform flips = AffineTransform::identity();
    if (spec.hflip) flips = AffineTransform{-1.0, 0.0, static_cast<double>(w), 0.0, 1.0, 0.0};
    if (spec.vflip) {
        AffineTransform v{1.0, 0.0, 0.0, 0.0, -1.0, static_cast<double>(h)};
        flips = v.compose(flips);
    }
    AffineTransform rot = AffineTransform::rotation(spec.rotation_deg * M_PI / 180.0,
                                                    {w / 2.0, h / 2.0});
    return rot.compose(flips);
}

AugmentedSample apply_augment(const RasterImage& rgb, const RasterImage& cube,
                              const LabelMask& mask, const AugmentSpec& spec) {
    if (rgb.width() != cube.width() || rgb.height() != cube.height() ||
        rgb.width() != mask.width() || rgb.height() != mask.height())
        throw ShapeMismatch("augment: inputs must share the same spatial size");

    AffineTransform m = augment_transform(spec, rgb.width(), rgb.height());
    AugmentedSample out;
    if (spec.rotation_deg == 0.0 && !spec.hflip && !spec.vflip) {
        out.rgb = rgb;
        out.cube = cube;
        out.mask = mask;
        return out;
    }
    out.rgb = warp_image_bilinear(rgb, m);
    out.cube = warp_image_bilinear(cube, m);
    out.mask = warp_mask_nearest(mask, m);
    return out;
}

AugmentSpec sample_augment_spec(Rng& rng, double max_rotation_deg) {
    AugmentSpec spec;
    spec.rotation_deg = rng.uniform(-max_rotation_deg, max_rotation_deg);
    spec.hflip = rng.uniform() < 0.5;
    spec.vflip = rng.uniform() < 0.5;
    return spec;
}

AugmentedSample augment(const RasterImage& rgb, const RasterImage& cube,
                        const LabelMask& mask, double max_rotation_deg, uint64_t seed) {
    Rng rng(seed);
    return apply_augment(rgb, cube, mask, sample_augment_spec(rng, max_rotation_deg));
}

}  // namespace slt
