#include "slt/rasterize.hpp"

#include <algorithm>
#include <cmath>

#include "slt/errors.hpp"

namespace slt {

void fill_polygon(LabelMask& mask, const std::vector<Vec2>& polygon, uint8_t class_id,
                  uint32_t instance_id) {
    std::vector<Vec2> distinct;
    for (const auto& v : polygon) {
        if (distinct.empty() || v.x != distinct.back().x || v.y != distinct.back().y)
            distinct.push_back(v);
    }
    if (distinct.size() > 1 && distinct.front().x == distinct.back().x &&
        distinct.front().y == distinct.back().y)
        distinct.pop_back();
    if (distinct.size() < 3)
        throw DegeneratePolygon("polygon has fewer than 3 distinct vertices");

    double ymin = distinct[0].y, ymax = distinct[0].y;
    for (const auto& v : distinct) {
        ymin = std::min(ymin, v.y);
        ymax = std::max(ymax, v.y);
    }
    int row_lo = std::max(0, static_cast<int>(std::floor(ymin - 0.5)));
    int row_hi = std::min(mask.height() - 1, static_cast<int>(std::ceil(ymax)));

    std::vector<double> xs;
    for (int y = row_lo; y <= row_hi; ++y) {
        double yc = y + 0.5;
        xs.clear();
        for (size_t i = 0; i < distinct.size(); ++i) {
            const Vec2& p = distinct[i];
            const Vec2& q = distinct[(i + 1) % distinct.size()];
            // Half-open span [min, max) keeps vertex crossings counted once.
            if ((p.y <= yc && q.y > yc) || (q.y <= yc && p.y > yc)) {
                double t = (yc - p.y) / (q.y - p.y);
                xs.push_back(p.x + t * (q.x - p.x));
            }
        }
        std::sort(xs.begin(), xs.end());
        for (size_t i = 0; i + 1 < xs.size(); i += 2) {
            // Pixel centers in [xs[i], xs[i+1]).
            int x_lo = static_cast<int>(std::ceil(xs[i] - 0.5));
            int x_hi = static_cast<int>(std::ceil(xs[i + 1] - 0.5)) - 1;
            x_lo = std::max(x_lo, 0);
            x_hi = std::min(x_hi, mask.width() - 1);
            for (int x = x_lo; x <= x_hi; ++x) {
                mask.cls(x, y) = class_id;
                if (instance_id != 0) mask.set_instance(x, y, instance_id);
            }
        }
    }
}

LabelMask rasterize_annotations(const AnnotationSet& ann, int width, int height,
                                int source_width, int source_height,
                                const std::vector<ClassInfo>& taxonomy) {
    if (width <= 0 || height <= 0)
        throw ShapeMismatch("rasterize_annotations: size must be positive");
    LabelMask mask(width, height);
    if (ann.instances.empty()) return mask;

    const double sx = static_cast<double>(width) / source_width;
    const double sy = static_cast<double>(height) / source_height;
    for (const auto& inst : ann.instances) {
        uint8_t cls = static_cast<uint8_t>(class_id_by_name(taxonomy, inst.class_name));
        std::vector<Vec2> scaled;
        scaled.reserve(inst.polygon.size());
        for (const auto& v : inst.polygon) scaled.push_back({v.x * sx, v.y * sy});
        fill_polygon(mask, scaled, cls, inst.instance_id);
    }
    return mask;
}

}  // namespace slt
