#pragma once

#include <optional>
#include <vector>

#include "slt/affine.hpp"
#include "slt/types.hpp"

namespace slt {

// One 8-connected region of a single (class, instance) label.
struct Component {
    uint8_t class_id = 0;
    uint32_t instance_id = 0;
    std::vector<Vec2i> pixels;  // raster-scan order
    Rect bbox;

    size_t area() const { return pixels.size(); }
    Vec2 centroid() const;
    // Bitmap over bbox (row-major, bbox.w * bbox.h) for constant-time membership.
    std::vector<uint8_t> local_bitmap() const;
};

// Closed outer boundary, consecutive points 8-adjacent.
using Contour = std::vector<Vec2i>;

struct ControlPoints {
    std::vector<Vec2i> points;
    std::vector<bool> is_extreme;  // parallel to points
};

struct AffineFitConfig {
    bool use_ransac = false;
    int ransac_iters = 100;
    double ransac_inlier_px = 3.0;
    uint64_t ransac_seed = 1;
    double det_floor = 1e-3;  // |det(A)| below this -> ImplausibleTransform
};

struct PointPair {
    Vec2 src;
    Vec2 dst;
};

// Decomposes the foreground into 8-connected components, one list entry per
// region, ordered by first pixel in raster-scan order. Pixels only join when
// they share both class and instance IDs.
std::vector<Component> connected_components(const LabelMask& mask);

// Moore boundary tracing from the topmost-leftmost pixel; returns the outer
// boundary only (holes ignored). Single-pixel components yield one point.
Contour trace_contour(const Component& c);

// Picks `n` control points: uniform arc-length samples with the four outermost
// points (min-x/max-x/min-y/max-y representatives, first-in-trace-order on
// ties) snapped into the nearest slots. Contours with <= n points are returned
// whole. Duplicate picks are collapsed, so fewer than n points can come back.
ControlPoints sample_contour(const Contour& contour, int n);

// Least-squares affine from point pairs. With RANSAC enabled, refits on the
// best inlier consensus (deterministic given the seed).
AffineTransform fit_affine(const std::vector<PointPair>& pairs,
                           const AffineFitConfig& cfg = {});

// Root-mean-square residual of T over the pairs.
double affine_residual_rms(const AffineTransform& t, const std::vector<PointPair>& pairs);

// Inverse-mapped nearest-neighbor rasterization of the component under T into
// a target frame. Returned byte mask is 0/1 of size target_w * target_h.
std::vector<uint8_t> warp_component(const Component& c, const AffineTransform& t,
                                    int target_w, int target_h);

}  // namespace slt
