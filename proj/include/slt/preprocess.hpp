#pragma once

#include <optional>

#include "slt/image_ops.hpp"
#include "slt/manifest.hpp"
#include "slt/rng.hpp"
#include "slt/types.hpp"

namespace slt {

struct PreprocessConfig {
    Rect rgb_crop;   // empty = full frame
    Rect cube_crop;  // empty = full frame
    int target_w = 256;
    int target_h = 256;
    double rgb_norm_divisor = 255.0;
    double cube_norm_divisor = 65535.0;
};

struct PreprocessedSample {
    RasterImage rgb;   // target size, unit_float
    RasterImage cube;  // target size, bands interleaved, unit_float
    std::optional<LabelMask> mask;  // target size, nearest-neighbor resized
};

// Crop mismatched borders, resize everything to the target size and scale to
// [0,1] floats. The mask rides the RGB frame (annotations are drawn there) and
// is resized with nearest-neighbor so no new class IDs appear.
PreprocessedSample preprocess(const RasterImage& rgb, const HyperCube& cube,
                              const std::optional<LabelMask>& mask,
                              const PreprocessConfig& cfg);

struct AugmentSpec {
    double rotation_deg = 0.0;  // about the image center
    bool hflip = false;
    bool vflip = false;
};

struct AugmentedSample {
    RasterImage rgb;
    RasterImage cube;
    LabelMask mask;
};

// Applies one shared coordinate map to all three inputs: flips first, then the
// rotation. Images are sampled bilinearly, the mask nearest-neighbor;
// out-of-frame regions become zero / background.
AugmentedSample apply_augment(const RasterImage& rgb, const RasterImage& cube,
                              const LabelMask& mask, const AugmentSpec& spec);

// Draws rotation in [-max_rotation_deg, +max_rotation_deg] and independent
// coin-flip h/v flips from the seed, then applies them.
AugmentedSample augment(const RasterImage& rgb, const RasterImage& cube,
                        const LabelMask& mask, double max_rotation_deg, uint64_t seed);

AugmentSpec sample_augment_spec(Rng& rng, double max_rotation_deg);

// The forward pixel map an AugmentSpec induces on a w x h frame.
AffineTransform augment_transform(const AugmentSpec& spec, int w, int h);

}  // namespace slt
