#pragma once

#include "slt/affine.hpp"
#include "slt/types.hpp"

namespace slt {

// Data-parallel raster kernels (OpenMP over rows). Serial twins used by the
// tests and the benchmark live in slt::ref (reference.hpp).

RasterImage crop(const RasterImage& img, const Rect& r);
HyperCube crop(const HyperCube& cube, const Rect& r);
LabelMask crop(const LabelMask& mask, const Rect& r);

// Pixel-center sampling: target center (tx+0.5, ty+0.5) maps to source
// coordinates ((tx+0.5)*sw/tw, (ty+0.5)*sh/th). When sizes match, output
// equals input bit-for-bit.
RasterImage resize_bilinear(const RasterImage& img, int tw, int th);
LabelMask resize_nearest(const LabelMask& mask, int tw, int th);

// Divides every sample by `divisor` and tags the result unit_float.
RasterImage normalize(const RasterImage& img, double divisor);

// u16 band-sequential cube -> pixel-interleaved float raster, divided by `divisor`.
RasterImage cube_to_float(const HyperCube& cube, double divisor = 65535.0);

// Mean over channels; used as the matcher's single-channel rendering.
RasterImage to_gray(const RasterImage& img);

// Samples `img` through the inverse of `forward` (bilinear, zero fill outside
// the source frame). Shape-preserving geometric warp used by augmentation.
RasterImage warp_image_bilinear(const RasterImage& img, const AffineTransform& forward);
LabelMask warp_mask_nearest(const LabelMask& mask, const AffineTransform& forward);

}  // namespace slt
