#include "slt/image_ops.hpp"

#include <algorithm>
#include <cmath>

#include "slt/errors.hpp"

namespace slt {

namespace {

void check_crop(const Rect& r, int w, int h, const char* what) {
    if (r.w <= 0 || r.h <= 0 || r.x < 0 || r.y < 0 || r.x + r.w > w || r.y + r.h > h)
        throw BadCrop(std::string(what) + ": crop rectangle out of bounds");
}

}  // namespace

RasterImage crop(const RasterImage& img, const Rect& r) {
    check_crop(r, img.width(), img.height(), "image");
    RasterImage out(r.w, r.h, img.channels(), img.range());
    const int ch = img.channels();
#pragma omp parallel for schedule(static)
    for (int y = 0; y < r.h; ++y) {
        const float* src = img.pixel(r.x, r.y + y);
        float* dst = out.pixel(0, y);
        std::copy(src, src + static_cast<size_t>(r.w) * ch, dst);
    }
    return out;
}

HyperCube crop(const HyperCube& cube, const Rect& r) {
    check_crop(r, cube.width(), cube.height(), "cube");
    HyperCube out(r.w, r.h, cube.bands());
    out.wavelengths_nm = cube.wavelengths_nm;
#pragma omp parallel for schedule(static)
    for (int b = 0; b < cube.bands(); ++b) {
        for (int y = 0; y < r.h; ++y) {
            const uint16_t* src = cube.band(b) + static_cast<size_t>(r.y + y) * cube.width() + r.x;
            uint16_t* dst = out.band(b) + static_cast<size_t>(y) * r.w;
            std::copy(src, src + r.w, dst);
        }
    }
    return out;
}

LabelMask crop(const LabelMask& mask, const Rect& r) {
    check_crop(r, mask.width(), mask.height(), "mask");
    LabelMask out(r.w, r.h);
    if (mask.has_instances()) out.ensure_instances();
    for (int y = 0; y < r.h; ++y) {
        for (int x = 0; x < r.w; ++x) {
            out.cls(x, y) = mask.cls(r.x + x, r.y + y);
            if (mask.has_instances())
                out.instance_ids()[static_cast<size_t>(y) * r.w + x] =
                    mask.instance(r.x + x, r.y + y);
        }
    }
    return out;
}

RasterImage resize_bilinear(const RasterImage& img, int tw, int th) {
    if (tw <= 0 || th <= 0) throw ShapeMismatch("resize target must be positive");
    RasterImage out(tw, th, img.channels(), img.range());
    const int sw = img.width(), sh = img.height(), ch = img.channels();
    const double sx_scale = static_cast<double>(sw) / tw;
    const double sy_scale = static_cast<double>(sh) / th;
#pragma omp parallel for schedule(static)
    for (int ty = 0; ty < th; ++ty) {
        double sy = (ty + 0.5) * sy_scale - 0.5;
        sy = std::clamp(sy, 0.0, static_cast<double>(sh - 1));
        int y0 = static_cast<int>(sy);
        int y1 = std::min(y0 + 1, sh - 1);
        float fy = static_cast<float>(sy - y0);
        for (int tx = 0; tx < tw; ++tx) {
            double sx = (tx + 0.5) * sx_scale - 0.5;
            sx = std::clamp(sx, 0.0, static_cast<double>(sw - 1));
            int x0 = static_cast<int>(sx);
            int x1 = std::min(x0 + 1, sw - 1);
            float fx = static_cast<float>(sx - x0);
            const float* p00 = img.pixel(x0, y0);
            const float* p10 = img.pixel(x1, y0);
            const float* p01 = img.pixel(x0, y1);
            const float* p11 = img.pixel(x1, y1);
            float* dst = out.pixel(tx, ty);
            for (int c = 0; c < ch; ++c) {
                float top = p00[c] + (p10[c] - p00[c]) * fx;
                float bot = p01[c] + (p11[c] - p01[c]) * fx;
                dst[c] = top + (bot - top) * fy;
            }
        }
    }
    return out;
}

LabelMask resize_nearest(const LabelMask& mask, int tw, int th) {
    if (tw <= 0 || th <= 0) throw ShapeMismatch("resize target must be positive");
    LabelMask out(tw, th);
    const bool inst = mask.has_instances();
    if (inst) out.ensure_instances();
    const int sw = mask.width(), sh = mask.height();
    const double sx_scale = static_cast<double>(sw) / tw;
    const double sy_scale = static_cast<double>(sh) / th;
#pragma omp parallel for schedule(static)
    for (int ty = 0; ty < th; ++ty) {
        int sy = std::min(static_cast<int>((ty + 0.5) * sy_scale), sh - 1);
        for (int tx = 0; tx < tw; ++tx) {
            int sx = std::min(static_cast<int>((tx + 0.5) * sx_scale), sw - 1);
            out.cls(tx, ty) = mask.cls(sx, sy);
            if (inst)
                out.instance_ids()[static_cast<size_t>(ty) * tw + tx] = mask.instance(sx, sy);
        }
    }
    return out;
}

RasterImage normalize(const RasterImage& img, double divisor) {
    RasterImage out = img;
    out.set_range(ValueRange::unit_float);
    const float inv = static_cast<float>(1.0 / divisor);
    float* data = out.data().data();
    const int64_t n = static_cast<int64_t>(out.data().size());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) data[i] *= inv;
    return out;
}

RasterImage cube_to_float(const HyperCube& cube, double divisor) {
    RasterImage out(cube.width(), cube.height(), cube.bands(), ValueRange::unit_float);
    const int w = cube.width(), h = cube.height(), nb = cube.bands();
    const float inv = static_cast<float>(1.0 / divisor);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int b = 0; b < nb; ++b) {
            const uint16_t* src = cube.band(b) + static_cast<size_t>(y) * w;
            float* dst = out.data().data() + (static_cast<size_t>(y) * w) * nb + b;
            for (int x = 0; x < w; ++x) dst[static_cast<size_t>(x) * nb] = src[x] * inv;
        }
    }
    return out;
}

RasterImage to_gray(const RasterImage& img) {
    if (img.channels() == 1) return img;
    RasterImage out(img.width(), img.height(), 1, img.range());
    const int ch = img.channels();
    const float inv = 1.0f / static_cast<float>(ch);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const float* p = img.pixel(x, y);
            float sum = 0.0f;
            for (int c = 0; c < ch; ++c) sum += p[c];
            out.at(x, y, 0) = sum * inv;
        }
    }
    return out;
}

RasterImage warp_image_bilinear(const RasterImage& img, const AffineTransform& forward) {
    const AffineTransform inv = forward.inverse();
    RasterImage out(img.width(), img.height(), img.channels(), img.range());
    const int w = img.width(), h = img.height(), ch = img.channels();
#pragma omp parallel for schedule(static)
    for (int ty = 0; ty < h; ++ty) {
        for (int tx = 0; tx < w; ++tx) {
            Vec2 s = inv.apply({tx + 0.5, ty + 0.5});
            double sx = s.x - 0.5, sy = s.y - 0.5;
            float* dst = out.pixel(tx, ty);
            if (sx < -1.0 || sy < -1.0 || sx > w - 0.0 || sy > h - 0.0) continue;
            int x0 = static_cast<int>(std::floor(sx));
            int y0 = static_cast<int>(std::floor(sy));
            float fx = static_cast<float>(sx - x0);
            float fy = static_cast<float>(sy - y0);
            for (int c = 0; c < ch; ++c) {
                auto sample = [&](int x, int y) -> float {
                    if (x < 0 || y < 0 || x >= w || y >= h) return 0.0f;
                    return img.at(x, y, c);
                };
                float top = sample(x0, y0) + (sample(x0 + 1, y0) - sample(x0, y0)) * fx;
                float bot = sample(x0, y0 + 1) + (sample(x0 + 1, y0 + 1) - sample(x0, y0 + 1)) * fx;
                dst[c] = top + (bot - top) * fy;
            }
        }
    }
    return out;
}

LabelMask warp_mask_nearest(const LabelMask& mask, const AffineTransform& forward) {
    const AffineTransform inv = forward.inverse();
    LabelMask out(mask.width(), mask.height());
    const bool instances = mask.has_instances();
    if (instances) out.ensure_instances();
    const int w = mask.width(), h = mask.height();
#pragma omp parallel for schedule(static)
    for (int ty = 0; ty < h; ++ty) {
        for (int tx = 0; tx < w; ++tx) {
            Vec2 s = inv.apply({tx + 0.5, ty + 0.5});
            int sx = static_cast<int>(std::floor(s.x));
            int sy = static_cast<int>(std::floor(s.y));
            if (sx < 0 || sy < 0 || sx >= w || sy >= h) continue;
            out.cls(tx, ty) = mask.cls(sx, sy);
            if (instances)
                out.instance_ids()[static_cast<size_t>(ty) * w + tx] = mask.instance(sx, sy);
        }
    }
    return out;
}

}  // namespace slt
