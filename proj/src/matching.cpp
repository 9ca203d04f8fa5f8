#include "slt/matching.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "slt/errors.hpp"
#include "slt/image_ops.hpp"

namespace slt {

namespace {

void check_queries(const RasterImage& source, const std::vector<Vec2>& queries) {
    for (const auto& q : queries) {
        if (q.x < 0.0 || q.y < 0.0 || q.x >= source.width() || q.y >= source.height())
            throw BadQuery("query (" + std::to_string(q.x) + ", " + std::to_string(q.y) +
                           ") outside the source frame");
    }
}

// 2x2 box downsample (odd edges clamp to the last row/column).
RasterImage downsample2(const RasterImage& img) {
    int w = std::max(1, img.width() / 2), h = std::max(1, img.height() / 2);
    RasterImage out(w, h, 1, img.range());
    for (int y = 0; y < h; ++y) {
        int y0 = 2 * y, y1 = std::min(2 * y + 1, img.height() - 1);
        for (int x = 0; x < w; ++x) {
            int x0 = 2 * x, x1 = std::min(2 * x + 1, img.width() - 1);
            out.at(x, y, 0) = 0.25f * (img.at(x0, y0, 0) + img.at(x1, y0, 0) +
                                       img.at(x0, y1, 0) + img.at(x1, y1, 0));
        }
    }
    return out;
}

struct NccScore {
    double value = -2.0;  // below any valid NCC
    bool valid = false;
};

// NCC of the windows centered at ps (source) and pt (target), offsets clipped
// identically on both frames.
NccScore ncc_at(const RasterImage& src, const RasterImage& tgt, Vec2i ps, Vec2i pt,
                int radius) {
    int lo_dx = std::max({-radius, -ps.x, -pt.x});
    int hi_dx = std::min({radius, src.width() - 1 - ps.x, tgt.width() - 1 - pt.x});
    int lo_dy = std::max({-radius, -ps.y, -pt.y});
    int hi_dy = std::min({radius, src.height() - 1 - ps.y, tgt.height() - 1 - pt.y});
    if (lo_dx > hi_dx || lo_dy > hi_dy) return {};

    double sum_s = 0, sum_t = 0;
    int count = 0;
    for (int dy = lo_dy; dy <= hi_dy; ++dy)
        for (int dx = lo_dx; dx <= hi_dx; ++dx) {
            sum_s += src.at(ps.x + dx, ps.y + dy, 0);
            sum_t += tgt.at(pt.x + dx, pt.y + dy, 0);
            ++count;
        }
    const double mean_s = sum_s / count, mean_t = sum_t / count;

    double num = 0, var_s = 0, var_t = 0;
    for (int dy = lo_dy; dy <= hi_dy; ++dy)
        for (int dx = lo_dx; dx <= hi_dx; ++dx) {
            double vs = src.at(ps.x + dx, ps.y + dy, 0) - mean_s;
            double vt = tgt.at(pt.x + dx, pt.y + dy, 0) - mean_t;
            num += vs * vt;
            var_s += vs * vs;
            var_t += vt * vt;
        }
    if (var_s <= 0.0 || var_t <= 0.0) return {};
    return {num / std::sqrt(var_s * var_t), true};
}

struct PeakResult {
    Vec2i displacement{0, 0};
    double ncc = -2.0;
    bool valid = false;
};

// Best integer displacement in the box [center-r, center+r]^2; fixed raster
// scan order with strict improvement keeps the argmax deterministic.
PeakResult search_peak(const RasterImage& src, const RasterImage& tgt, Vec2i ps,
                       Vec2i center, int search_r, int window_r) {
    PeakResult best;
    for (int dy = -search_r; dy <= search_r; ++dy) {
        for (int dx = -search_r; dx <= search_r; ++dx) {
            Vec2i pt{ps.x + center.x + dx, ps.y + center.y + dy};
            if (pt.x < 0 || pt.y < 0 || pt.x >= tgt.width() || pt.y >= tgt.height()) continue;
            NccScore s = ncc_at(src, tgt, ps, pt, window_r);
            if (!s.valid) continue;
            if (!best.valid || s.value > best.ncc) {
                best.valid = true;
                best.ncc = s.value;
                best.displacement = {center.x + dx, center.y + dy};
            }
        }
    }
    return best;
}

}  // namespace

std::vector<std::optional<Correspondence>> NccMatcher::match_points(
    const RasterImage& source, const RasterImage& target,
    const std::vector<Vec2>& queries) const {
    check_queries(source, queries);

    RasterImage src_gray = to_gray(source);
    RasterImage tgt_gray = to_gray(target);

    // Different frame sizes: rescale the source onto the target frame so the
    // correlation windows compare like with like; radii are target-frame px.
    double qx_scale = 1.0, qy_scale = 1.0;
    if (src_gray.width() != tgt_gray.width() || src_gray.height() != tgt_gray.height()) {
        qx_scale = static_cast<double>(tgt_gray.width()) / src_gray.width();
        qy_scale = static_cast<double>(tgt_gray.height()) / src_gray.height();
        src_gray = resize_bilinear(src_gray, tgt_gray.width(), tgt_gray.height());
    }

    // Shared pyramid, level 0 = full resolution.
    int levels = std::max(1, cfg_.pyramid_levels);
    std::vector<RasterImage> src_pyr{src_gray}, tgt_pyr{tgt_gray};
    for (int l = 1; l < levels; ++l) {
        const RasterImage& prev = src_pyr.back();
        if (std::min(prev.width(), prev.height()) < 32) break;
        src_pyr.push_back(downsample2(src_pyr.back()));
        tgt_pyr.push_back(downsample2(tgt_pyr.back()));
    }
    levels = static_cast<int>(src_pyr.size());

    const int nq = static_cast<int>(queries.size());
    std::vector<std::optional<Correspondence>> out(nq);

#pragma omp parallel for schedule(dynamic)
    for (int qi = 0; qi < nq; ++qi) {
        Vec2 q{queries[qi].x * qx_scale, queries[qi].y * qy_scale};
        Vec2i qpix{std::clamp(static_cast<int>(q.x), 0, src_gray.width() - 1),
                   std::clamp(static_cast<int>(q.y), 0, src_gray.height() - 1)};

        // Zero-variance source patch: NCC undefined, no match.
        NccScore self = ncc_at(src_pyr[0], src_pyr[0], qpix, qpix, cfg_.window_radius);
        if (!self.valid) continue;

        // Coarse full search, then refine down the pyramid.
        const int coarse = levels - 1;
        Vec2i qc{qpix.x >> coarse, qpix.y >> coarse};
        PeakResult peak = search_peak(src_pyr[coarse], tgt_pyr[coarse], qc, {0, 0},
                                      std::max(2, cfg_.search_radius >> coarse),
                                      std::max(2, cfg_.window_radius >> coarse));
        if (!peak.valid) continue;
        for (int l = coarse - 1; l >= 0; --l) {
            Vec2i ql{qpix.x >> l, qpix.y >> l};
            Vec2i center{2 * peak.displacement.x, 2 * peak.displacement.y};
            PeakResult refined = search_peak(src_pyr[l], tgt_pyr[l], ql, center, 3,
                                             std::max(2, cfg_.window_radius >> l));
            if (!refined.valid) {
                peak.valid = false;
                break;
            }
            peak = refined;
        }
        if (!peak.valid) continue;

        double confidence = std::max(0.0, peak.ncc);
        if (confidence < cfg_.min_confidence) continue;
        out[qi] = Correspondence{queries[qi],
                                 {q.x + peak.displacement.x, q.y + peak.displacement.y},
                                 confidence};
    }
    return out;
}

FileMatcher::FileMatcher(const std::filesystem::path& path, const std::string& sample_id,
                         double snap_radius, double min_confidence)
    : snap_radius_(snap_radius), min_confidence_(min_confidence) {
    std::ifstream in(path);
    if (!in) throw MissingMatches("correspondence file not found: " + path.string());
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
            if (rec.at("sample_id").get<std::string>() != sample_id) continue;
            Correspondence c;
            c.src = {rec.at("src").at(0).get<double>(), rec.at("src").at(1).get<double>()};
            c.dst = {rec.at("dst").at(0).get<double>(), rec.at("dst").at(1).get<double>()};
            c.confidence = rec.value("confidence", 1.0);
            records_.push_back(c);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("bad correspondence record at " + path.string() + ":" +
                             std::to_string(line_no) + ": " + e.what());
        }
    }
}

std::vector<std::optional<Correspondence>> FileMatcher::match_points(
    const RasterImage& source, const RasterImage& /*target*/,
    const std::vector<Vec2>& queries) const {
    check_queries(source, queries);
    std::vector<std::optional<Correspondence>> out(queries.size());
    for (size_t i = 0; i < queries.size(); ++i) {
        const Vec2& q = queries[i];
        double best_d2 = snap_radius_ * snap_radius_;
        const Correspondence* best = nullptr;
        for (const auto& rec : records_) {
            double dx = rec.src.x - q.x, dy = rec.src.y - q.y;
            double d2 = dx * dx + dy * dy;
            if (d2 <= best_d2 && (!best || d2 < best_d2)) {
                best_d2 = d2;
                best = &rec;
            }
        }
        if (best && best->confidence >= min_confidence_)
            out[i] = Correspondence{q, best->dst, best->confidence};
    }
    return out;
}

std::vector<std::optional<Correspondence>> OracleMatcher::match_points(
    const RasterImage& source, const RasterImage& /*target*/,
    const std::vector<Vec2>& queries) const {
    check_queries(source, queries);
    std::vector<std::optional<Correspondence>> out(queries.size());
    for (size_t i = 0; i < queries.size(); ++i) {
        if (auto dst = fn_(queries[i])) out[i] = Correspondence{queries[i], *dst, 1.0};
    }
    return out;
}

}  // namespace slt
