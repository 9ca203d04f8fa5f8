#include "slt/transfer.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "slt/errors.hpp"
#include "slt/image_ops.hpp"

namespace slt {

std::string to_string(ComponentStatus s) {
    switch (s) {
        case ComponentStatus::accepted: return "accepted";
        case ComponentStatus::accepted_translation: return "accepted_translation";
        case ComponentStatus::fallback_insufficient_matches: return "insufficient_matches";
        case ComponentStatus::fallback_degenerate_fit: return "degenerate_fit";
        case ComponentStatus::fallback_implausible_transform: return "implausible_transform";
        case ComponentStatus::dropped: return "dropped";
    }
    return "unknown";
}

int class_priority_rank(const std::vector<int>& priority, int class_id) {
    for (size_t i = 0; i < priority.size(); ++i)
        if (priority[i] == class_id) return static_cast<int>(i);
    return static_cast<int>(priority.size());
}

LabelMask compose_layers(const std::vector<MaskLayer>& layers, int w, int h) {
    LabelMask out(w, h);
    bool any_instances = false;
    for (const auto& l : layers) any_instances |= l.instance_id != 0;
    if (any_instances) out.ensure_instances();

    // Winner per pixel = lexicographic min of (source_area, priority_rank,
    // layer index); painting in descending key order lets the strongest layer
    // land last, independent of input order.
    std::vector<size_t> order(layers.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const MaskLayer& la = layers[a];
        const MaskLayer& lb = layers[b];
        if (la.source_area != lb.source_area) return la.source_area > lb.source_area;
        if (la.priority_rank != lb.priority_rank) return la.priority_rank > lb.priority_rank;
        return a > b;
    });

    for (size_t oi : order) {
        const MaskLayer& l = layers[oi];
        for (size_t i = 0; i < l.bitmap.size(); ++i) {
            if (!l.bitmap[i]) continue;
            out.class_ids()[i] = l.class_id;
            if (any_instances) out.instance_ids()[i] = l.instance_id;
        }
    }
    return out;
}

LabelMask manual_alignment(const LabelMask& mask, int target_w, int target_h) {
    return resize_nearest(mask, target_w, target_h);
}

namespace {

struct ComponentOutcome {
    ComponentRecord record;
    std::optional<MaskLayer> layer;
    bool processed = false;
};

ComponentOutcome process_component(const Component& comp, int comp_index,
                                   const RasterImage& source_img,
                                   const RasterImage& target_img,
                                   const PointMatcher& matcher, const TransferConfig& cfg,
                                   const AffineTransform& frame_scale) {
    ComponentOutcome out;
    out.processed = true;
    ComponentRecord& rec = out.record;
    rec.component_index = comp_index;
    rec.class_id = comp.class_id;
    rec.instance_id = comp.instance_id;
    rec.area = comp.area();

    const int tw = target_img.width(), th = target_img.height();
    auto make_layer = [&](const AffineTransform& t) {
        MaskLayer layer;
        layer.bitmap = warp_component(comp, t, tw, th);
        layer.class_id = comp.class_id;
        layer.instance_id = comp.instance_id;
        layer.source_area = comp.area();
        layer.priority_rank = class_priority_rank(cfg.class_priority, comp.class_id);
        return layer;
    };
    auto fall_back = [&](ComponentStatus status) {
        rec.status = status;
        if (cfg.fallback == FallbackPolicy::keep_resized_original)
            out.layer = make_layer(frame_scale);
    };

    // Tiny components: 3 stable correspondences are unobtainable, translate by
    // the centroid match instead.
    if (comp.area() < static_cast<size_t>(cfg.min_component_area)) {
        Vec2 centroid = comp.centroid();
        auto matches = matcher.match_points(source_img, target_img, {centroid});
        if (matches[0]) {
            rec.match_count = 1;
            rec.mean_confidence = matches[0]->confidence;
            AffineTransform t = AffineTransform::translation(
                matches[0]->dst.x - centroid.x, matches[0]->dst.y - centroid.y);
            rec.status = ComponentStatus::accepted_translation;
            rec.transform = t;
            out.layer = make_layer(t);
        } else {
            fall_back(ComponentStatus::fallback_insufficient_matches);
        }
        return out;
    }

    Contour contour = trace_contour(comp);
    int n = static_cast<int>(contour.size()) > cfg.long_contour_threshold
                ? cfg.points_per_contour_long
                : cfg.points_per_contour;
    ControlPoints cps = sample_contour(contour, n);

    std::vector<Vec2> queries;
    queries.reserve(cps.points.size());
    for (const auto& p : cps.points) queries.push_back({p.x + 0.5, p.y + 0.5});

    auto matches = matcher.match_points(source_img, target_img, queries);

    std::vector<PointPair> pairs;
    double conf_sum = 0.0;
    for (const auto& m : matches) {
        if (!m) continue;
        pairs.push_back({m->src, m->dst});
        conf_sum += m->confidence;
    }
    rec.match_count = static_cast<int>(pairs.size());
    rec.mean_confidence = pairs.empty() ? 0.0 : conf_sum / pairs.size();

    if (rec.match_count < cfg.min_matches) {
        fall_back(ComponentStatus::fallback_insufficient_matches);
        return out;
    }

    try {
        AffineTransform t = fit_affine(pairs, cfg.fit);
        rec.fit_residual_rms = affine_residual_rms(t, pairs);
        rec.status = ComponentStatus::accepted;
        rec.transform = t;
        out.layer = make_layer(t);
    } catch (const DegenerateFit&) {
        fall_back(ComponentStatus::fallback_degenerate_fit);
    } catch (const ImplausibleTransform&) {
        fall_back(ComponentStatus::fallback_implausible_transform);
    }
    return out;
}

}  // namespace

TransferResult transfer_mask(const RasterImage& source_img, const RasterImage& target_img,
                             const LabelMask& mask, const PointMatcher& matcher,
                             const TransferConfig& cfg) {
    if (mask.width() != source_img.width() || mask.height() != source_img.height())
        throw ShapeMismatch("transfer_mask: mask must be registered to the source frame");
    if (cfg.min_matches < 3)
        throw BadQuery("transfer_mask: min_matches must be >= 3");
    if (cfg.points_per_contour < 4)
        throw BadQuery("transfer_mask: points_per_contour must be >= 4");

    const int tw = target_img.width(), th = target_img.height();
    const AffineTransform frame_scale = AffineTransform::scaling(
        static_cast<double>(tw) / source_img.width(),
        static_cast<double>(th) / source_img.height());

    std::vector<Component> components = connected_components(mask);
    std::vector<ComponentOutcome> outcomes(components.size());

    std::exception_ptr failure;
    const int nc = static_cast<int>(components.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < nc; ++i) {
        try {
            outcomes[i] = process_component(components[i], i, source_img, target_img,
                                            matcher, cfg, frame_scale);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }

    TransferReport report;
    std::vector<MaskLayer> layers;
    for (auto& o : outcomes) {
        if (!o.processed) continue;  // only reached when the matcher failed
        const bool ok = o.record.status == ComponentStatus::accepted ||
                        o.record.status == ComponentStatus::accepted_translation;
        if (ok)
            ++report.accepted;
        else if (o.layer)
            ++report.fallback;
        else
            ++report.dropped;
        o.record.kept = o.layer.has_value();
        report.components.push_back(o.record);
        if (o.layer) layers.push_back(std::move(*o.layer));
    }

    if (failure) {
        try {
            std::rethrow_exception(failure);
        } catch (const std::exception& e) {
            throw TransferFailed(std::string("matcher failed: ") + e.what(),
                                 std::move(report));
        }
    }

    TransferResult result;
    result.report = std::move(report);
    result.mask = compose_layers(layers, tw, th);
    return result;
}

std::string transfer_report_json(const TransferReport& report, const std::string& sample_id) {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& r : report.components) {
        nlohmann::json rec{{"component", r.component_index},
                           {"class_id", r.class_id},
                           {"instance_id", r.instance_id},
                           {"area", r.area},
                           {"match_count", r.match_count},
                           {"mean_confidence", r.mean_confidence},
                           {"fit_residual_rms", r.fit_residual_rms},
                           {"status", to_string(r.status)},
                           {"kept", r.kept}};
        if (r.transform) {
            auto c = r.transform->coeffs();
            rec["transform"] = {{c[0], c[1], c[2]}, {c[3], c[4], c[5]}};
        }
        comps.push_back(std::move(rec));
    }
    nlohmann::json doc{{"schema", "transfer-report/1"},
                       {"sample_id", sample_id},
                       {"components", comps},
                       {"totals",
                        {{"accepted", report.accepted},
                         {"fallback", report.fallback},
                         {"dropped", report.dropped}}}};
    return doc.dump(2) + "\n";
}

}  // namespace slt
