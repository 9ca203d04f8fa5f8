#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "slt/geometry.hpp"
#include "slt/matching.hpp"
#include "slt/types.hpp"

namespace slt {

enum class FallbackPolicy {
    keep_resized_original,  // copy the component with frame-ratio scaling
    drop_component,
};

struct TransferConfig {
    int points_per_contour = 16;
    int points_per_contour_long = 32;  // used when the contour exceeds...
    int long_contour_threshold = 512;  // ...this many boundary pixels
    int min_matches = 4;
    int min_component_area = 9;  // below this, pure centroid translation
    FallbackPolicy fallback = FallbackPolicy::keep_resized_original;
    AffineFitConfig fit;
    // Classes earlier in this list win overlap ties; thin classes first.
    std::vector<int> class_priority = {4, 5, 1, 2, 3, 6};
};

enum class ComponentStatus {
    accepted,
    accepted_translation,  // tiny component moved by its centroid match
    fallback_insufficient_matches,
    fallback_degenerate_fit,
    fallback_implausible_transform,
    dropped,
};

std::string to_string(ComponentStatus s);

struct ComponentRecord {
    int component_index = 0;
    int class_id = 0;
    uint32_t instance_id = 0;
    size_t area = 0;
    int match_count = 0;
    double mean_confidence = 0.0;
    double fit_residual_rms = 0.0;
    ComponentStatus status = ComponentStatus::accepted;
    bool kept = false;  // a layer made it into the output mask
    std::optional<AffineTransform> transform;
};

struct TransferReport {
    std::vector<ComponentRecord> components;
    int accepted = 0;
    int fallback = 0;
    int dropped = 0;
};

// Thrown when the matcher fails for the whole image; carries the partial report.
struct TransferFailed : Error {
    TransferFailed(const std::string& msg, TransferReport partial)
        : Error(msg), report(std::move(partial)) {}
    TransferReport report;
};

struct TransferResult {
    LabelMask mask;  // target frame
    TransferReport report;
};

// Full label-transfer pipeline: split the mask into 8-connected components,
// trace and sparsely sample each contour, query the matcher, fit one affine
// per component and warp it into the target frame. Components with too few
// confident matches follow the fallback policy. Overlaps resolve to the
// smaller component, then by class priority; the result does not depend on
// processing order.
TransferResult transfer_mask(const RasterImage& source_img, const RasterImage& target_img,
                             const LabelMask& mask, const PointMatcher& matcher,
                             const TransferConfig& cfg = {});

// The crop+resize-only baseline: the mask rescaled to the target frame.
LabelMask manual_alignment(const LabelMask& mask, int target_w, int target_h);

// Deterministic overlap resolution shared by transfer and the synthetic rig.
struct MaskLayer {
    std::vector<uint8_t> bitmap;  // target_w * target_h, 0/1
    uint8_t class_id = 0;
    uint32_t instance_id = 0;
    size_t source_area = 0;
    int priority_rank = 0;
};
LabelMask compose_layers(const std::vector<MaskLayer>& layers, int w, int h);

int class_priority_rank(const std::vector<int>& priority, int class_id);

// Report serialization ("transfer-report/1").
std::string transfer_report_json(const TransferReport& report, const std::string& sample_id);

}  // namespace slt
