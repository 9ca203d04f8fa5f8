#include "slt/reference.hpp"

#include <algorithm>
#include <cmath>

#include "slt/errors.hpp"
#include "slt/image_ops.hpp"

namespace slt::ref {

RasterImage resize_bilinear(const RasterImage& img, int tw, int th) {
    RasterImage out(tw, th, img.channels(), img.range());
    const int sw = img.width(), sh = img.height(), ch = img.channels();
    const double sx_scale = static_cast<double>(sw) / tw;
    const double sy_scale = static_cast<double>(sh) / th;
    for (int ty = 0; ty < th; ++ty) {
        double sy = std::clamp((ty + 0.5) * sy_scale - 0.5, 0.0, static_cast<double>(sh - 1));
        int y0 = static_cast<int>(sy);
        int y1 = std::min(y0 + 1, sh - 1);
        float fy = static_cast<float>(sy - y0);
        for (int tx = 0; tx < tw; ++tx) {
            double sx = std::clamp((tx + 0.5) * sx_scale - 0.5, 0.0,
                                   static_cast<double>(sw - 1));
            int x0 = static_cast<int>(sx);
            int x1 = std::min(x0 + 1, sw - 1);
            float fx = static_cast<float>(sx - x0);
            for (int c = 0; c < ch; ++c) {
                float top = img.at(x0, y0, c) + (img.at(x1, y0, c) - img.at(x0, y0, c)) * fx;
                float bot = img.at(x0, y1, c) + (img.at(x1, y1, c) - img.at(x0, y1, c)) * fx;
                out.at(tx, ty, c) = top + (bot - top) * fy;
            }
        }
    }
    return out;
}

LabelMask resize_nearest(const LabelMask& mask, int tw, int th) {
    LabelMask out(tw, th);
    if (mask.has_instances()) out.ensure_instances();
    const int sw = mask.width(), sh = mask.height();
    for (int ty = 0; ty < th; ++ty) {
        int sy = std::min(static_cast<int>((ty + 0.5) * sh / static_cast<double>(th)), sh - 1);
        for (int tx = 0; tx < tw; ++tx) {
            int sx = std::min(static_cast<int>((tx + 0.5) * sw / static_cast<double>(tw)),
                              sw - 1);
            out.cls(tx, ty) = mask.cls(sx, sy);
            if (mask.has_instances())
                out.instance_ids()[static_cast<size_t>(ty) * tw + tx] = mask.instance(sx, sy);
        }
    }
    return out;
}

CovarianceResult sample_covariance(const float* pixels, size_t n, int c) {
    if (n == 0 || c <= 0) throw DegenerateData("ref::sample_covariance: empty sample");
    CovarianceResult res;
    res.count = n;
    res.mean.assign(c, 0.0);
    for (size_t i = 0; i < n; ++i) {
        const float* row = pixels + i * c;
        for (int j = 0; j < c; ++j) res.mean[j] += row[j];
    }
    for (int j = 0; j < c; ++j) res.mean[j] /= static_cast<double>(n);

    res.covariance.assign(static_cast<size_t>(c) * c, 0.0);
    std::vector<double> centered(c);
    for (size_t i = 0; i < n; ++i) {
        const float* row = pixels + i * c;
        for (int j = 0; j < c; ++j) centered[j] = row[j] - res.mean[j];
        for (int j = 0; j < c; ++j)
            for (int l = 0; l < c; ++l)
                res.covariance[static_cast<size_t>(j) * c + l] += centered[j] * centered[l];
    }
    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    for (auto& v : res.covariance) v /= denom;
    return res;
}

RasterImage pca_apply(const RasterImage& cube, const PcaModel& model) {
    const int c = model.source_band_count, k = model.k;
    RasterImage out(cube.width(), cube.height(), k, ValueRange::unit_float);
    for (size_t i = 0; i < cube.pixel_count(); ++i) {
        const float* px = cube.data().data() + i * c;
        float* dst = out.data().data() + i * k;
        for (int r = 0; r < k; ++r) {
            double acc = 0.0;
            for (int j = 0; j < c; ++j)
                acc += (px[j] - model.mean[j]) * model.components[static_cast<size_t>(r) * c + j];
            dst[r] = static_cast<float>(acc);
        }
    }
    return out;
}

std::optional<Correspondence> ncc_match_brute(const RasterImage& source,
                                              const RasterImage& target, Vec2 query,
                                              const MatcherConfig& cfg) {
    RasterImage src = to_gray(source);
    RasterImage tgt = to_gray(target);
    const int qx = static_cast<int>(query.x);
    const int qy = static_cast<int>(query.y);
    const int wr = cfg.window_radius;

    auto ncc = [&](int cx, int cy) -> std::optional<double> {
        int lo_dx = std::max({-wr, -qx, -cx});
        int hi_dx = std::min({wr, src.width() - 1 - qx, tgt.width() - 1 - cx});
        int lo_dy = std::max({-wr, -qy, -cy});
        int hi_dy = std::min({wr, src.height() - 1 - qy, tgt.height() - 1 - cy});
        if (lo_dx > hi_dx || lo_dy > hi_dy) return std::nullopt;
        double ms = 0, mt = 0;
        int count = 0;
        for (int dy = lo_dy; dy <= hi_dy; ++dy)
            for (int dx = lo_dx; dx <= hi_dx; ++dx) {
                ms += src.at(qx + dx, qy + dy, 0);
                mt += tgt.at(cx + dx, cy + dy, 0);
                ++count;
            }
        ms /= count, mt /= count;
        double num = 0, vs = 0, vt = 0;
        for (int dy = lo_dy; dy <= hi_dy; ++dy)
            for (int dx = lo_dx; dx <= hi_dx; ++dx) {
                double a = src.at(qx + dx, qy + dy, 0) - ms;
                double b = tgt.at(cx + dx, cy + dy, 0) - mt;
                num += a * b;
                vs += a * a;
                vt += b * b;
            }
        if (vs <= 0.0 || vt <= 0.0) return std::nullopt;
        return num / std::sqrt(vs * vt);
    };

    double best = -2.0;
    int best_dx = 0, best_dy = 0;
    bool found = false;
    for (int dy = -cfg.search_radius; dy <= cfg.search_radius; ++dy) {
        for (int dx = -cfg.search_radius; dx <= cfg.search_radius; ++dx) {
            int cx = qx + dx, cy = qy + dy;
            if (cx < 0 || cy < 0 || cx >= tgt.width() || cy >= tgt.height()) continue;
            auto v = ncc(cx, cy);
            if (!v) continue;
            if (!found || *v > best) {
                found = true;
                best = *v;
                best_dx = dx;
                best_dy = dy;
            }
        }
    }
    if (!found) return std::nullopt;
    double confidence = std::max(0.0, best);
    if (confidence < cfg.min_confidence) return std::nullopt;
    return Correspondence{query, {query.x + best_dx, query.y + best_dy}, confidence};
}

std::vector<uint8_t> warp_component(const Component& c, const AffineTransform& t,
                                    int target_w, int target_h) {
    std::vector<uint8_t> out(static_cast<size_t>(target_w) * target_h, 0);
    const AffineTransform inv = t.inverse();
    const std::vector<uint8_t> bm = c.local_bitmap();
    for (int ty = 0; ty < target_h; ++ty) {
        for (int tx = 0; tx < target_w; ++tx) {
            Vec2 s = inv.apply({tx + 0.5, ty + 0.5});
            int sx = static_cast<int>(std::floor(s.x)) - c.bbox.x;
            int sy = static_cast<int>(std::floor(s.y)) - c.bbox.y;
            if (sx < 0 || sy < 0 || sx >= c.bbox.w || sy >= c.bbox.h) continue;
            if (bm[static_cast<size_t>(sy) * c.bbox.w + sx])
                out[static_cast<size_t>(ty) * target_w + tx] = 1;
        }
    }
    return out;
}

}  // namespace slt::ref
