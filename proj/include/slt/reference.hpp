#pragma once

#include <optional>
#include <vector>

#include "slt/geometry.hpp"
#include "slt/matching.hpp"
#include "slt/pca.hpp"
#include "slt/types.hpp"

// Serial reference implementations of the data-parallel kernels. Kept out of
// the main library: tests check the OpenMP kernels against these, and the
// benchmark times the two side by side.
namespace slt::ref {

RasterImage resize_bilinear(const RasterImage& img, int tw, int th);
LabelMask resize_nearest(const LabelMask& mask, int tw, int th);

// Single straight loop in doubles, no blocking.
CovarianceResult sample_covariance(const float* pixels, size_t n, int c);

RasterImage pca_apply(const RasterImage& cube, const PcaModel& model);

// Single-level exhaustive NCC over the full search window (no pyramid).
std::optional<Correspondence> ncc_match_brute(const RasterImage& source,
                                              const RasterImage& target, Vec2 query,
                                              const MatcherConfig& cfg);

std::vector<uint8_t> warp_component(const Component& c, const AffineTransform& t,
                                    int target_w, int target_h);

}  // namespace slt::ref
