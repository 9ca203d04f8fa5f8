#include "slt/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "slt/errors.hpp"
#include "slt/rng.hpp"

namespace slt {

Vec2 Component::centroid() const {
    double sx = 0.0, sy = 0.0;
    for (const auto& p : pixels) {
        sx += p.x;
        sy += p.y;
    }
    double n = static_cast<double>(pixels.size());
    return {sx / n + 0.5, sy / n + 0.5};
}

std::vector<uint8_t> Component::local_bitmap() const {
    std::vector<uint8_t> bm(static_cast<size_t>(bbox.w) * bbox.h, 0);
    for (const auto& p : pixels)
        bm[static_cast<size_t>(p.y - bbox.y) * bbox.w + (p.x - bbox.x)] = 1;
    return bm;
}

std::vector<Component> connected_components(const LabelMask& mask) {
    const int w = mask.width(), h = mask.height();
    std::vector<Component> out;
    if (w <= 0 || h <= 0) return out;

    std::vector<int32_t> label(static_cast<size_t>(w) * h, -1);
    auto idx = [w](int x, int y) { return static_cast<size_t>(y) * w + x; };

    std::vector<Vec2i> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (mask.cls(x, y) == 0 || label[idx(x, y)] >= 0) continue;
            const uint8_t cls = mask.cls(x, y);
            const uint32_t inst = mask.instance(x, y);
            const int32_t id = static_cast<int32_t>(out.size());
            out.push_back(Component{cls, inst, {}, Rect{x, y, 1, 1}});

            stack.clear();
            stack.push_back({x, y});
            label[idx(x, y)] = id;
            while (!stack.empty()) {
                Vec2i p = stack.back();
                stack.pop_back();
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        int nx = p.x + dx, ny = p.y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        if (label[idx(nx, ny)] >= 0) continue;
                        if (mask.cls(nx, ny) != cls || mask.instance(nx, ny) != inst) continue;
                        label[idx(nx, ny)] = id;
                        stack.push_back({nx, ny});
                    }
                }
            }
        }
    }

    // Second raster pass keeps each pixel list in scan order.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int32_t id = label[idx(x, y)];
            if (id < 0) continue;
            Component& c = out[id];
            c.pixels.push_back({x, y});
            int x0 = std::min(c.bbox.x, x), y0 = std::min(c.bbox.y, y);
            int x1 = std::max(c.bbox.x + c.bbox.w, x + 1);
            int y1 = std::max(c.bbox.y + c.bbox.h, y + 1);
            c.bbox = Rect{x0, y0, x1 - x0, y1 - y0};
        }
    }
    return out;
}

namespace {

// Moore neighborhood in clockwise screen order (y down), starting East.
constexpr std::array<Vec2i, 8> kMooreDirs = {{{1, 0},
                                              {1, 1},
                                              {0, 1},
                                              {-1, 1},
                                              {-1, 0},
                                              {-1, -1},
                                              {0, -1},
                                              {1, -1}}};

int dir_index(Vec2i from, Vec2i to) {
    Vec2i d{to.x - from.x, to.y - from.y};
    for (int i = 0; i < 8; ++i)
        if (kMooreDirs[i] == d) return i;
    return -1;
}

}  // namespace

Contour trace_contour(const Component& c) {
    if (c.pixels.empty()) throw DegenerateData("trace_contour: empty component");
    const std::vector<uint8_t> bm = c.local_bitmap();
    const Rect& bb = c.bbox;
    auto fg = [&](Vec2i p) {
        int lx = p.x - bb.x, ly = p.y - bb.y;
        if (lx < 0 || ly < 0 || lx >= bb.w || ly >= bb.h) return false;
        return bm[static_cast<size_t>(ly) * bb.w + lx] != 0;
    };

    // pixels are in raster order, so pixels[0] is the topmost-leftmost pixel
    // and its west neighbor is guaranteed background.
    const Vec2i start = c.pixels[0];
    const Vec2i start_back{start.x - 1, start.y};

    Contour contour;
    contour.push_back(start);

    Vec2i cur = start;
    Vec2i back = start_back;
    const size_t max_steps = 4 * c.pixels.size() + 8;
    for (size_t step = 0; step < max_steps; ++step) {
        int d = dir_index(cur, back);
        Vec2i next{-1, -1}, next_back = back;
        bool found = false;
        for (int k = 1; k <= 8; ++k) {
            int di = (d + k) % 8;
            Vec2i cand{cur.x + kMooreDirs[di].x, cur.y + kMooreDirs[di].y};
            if (fg(cand)) {
                next = cand;
                found = true;
                break;
            }
            next_back = cand;
        }
        if (!found) break;  // isolated pixel
        cur = next;
        back = next_back;
        if (cur == start && back == start_back) break;  // full cycle
        contour.push_back(cur);
    }
    return contour;
}

ControlPoints sample_contour(const Contour& contour, int n) {
    ControlPoints out;
    const int m = static_cast<int>(contour.size());
    if (m == 0) return out;

    // Extreme representatives, first occurrence in trace order.
    int ix_min = 0, ix_max = 0, iy_min = 0, iy_max = 0;
    for (int i = 1; i < m; ++i) {
        if (contour[i].x < contour[ix_min].x) ix_min = i;
        if (contour[i].x > contour[ix_max].x) ix_max = i;
        if (contour[i].y < contour[iy_min].y) iy_min = i;
        if (contour[i].y > contour[iy_max].y) iy_max = i;
    }
    const std::array<int, 4> extremes = {ix_min, ix_max, iy_min, iy_max};
    auto is_extreme_vertex = [&](int v) {
        return v == ix_min || v == ix_max || v == iy_min || v == iy_max;
    };

    if (m <= std::max(n, 4)) {
        for (int i = 0; i < m; ++i) {
            out.points.push_back(contour[i]);
            out.is_extreme.push_back(is_extreme_vertex(i));
        }
        return out;
    }

    // Arc positions: s[i] = length along the closed boundary before vertex i.
    std::vector<double> s(m + 1, 0.0);
    for (int i = 0; i < m; ++i) {
        const Vec2i& p = contour[i];
        const Vec2i& q = contour[(i + 1) % m];
        s[i + 1] = s[i] + std::hypot(static_cast<double>(q.x - p.x),
                                     static_cast<double>(q.y - p.y));
    }
    const double total = s[m];

    auto circ_dist = [&](double a, double b) {
        double d = std::abs(a - b);
        return std::min(d, total - d);
    };

    // n uniform slots mapped to the nearest vertex by arc position.
    std::vector<int> slots(n);
    for (int j = 0; j < n; ++j) {
        double target = total * j / n;
        auto it = std::lower_bound(s.begin(), s.begin() + m, target);
        int hi = static_cast<int>(it - s.begin()) % m;
        int lo = (hi + m - 1) % m;
        slots[j] = circ_dist(s[lo], target) <= circ_dist(s[hi], target) ? lo : hi;
    }

    // Snap each extreme into the nearest slot not already holding an extreme.
    std::vector<bool> slot_fixed(n, false);
    for (int e : extremes) {
        bool present = false;
        for (int j = 0; j < n; ++j) {
            if (slots[j] == e) {
                slot_fixed[j] = true;
                present = true;
                break;
            }
        }
        if (present) continue;
        int best = -1;
        double best_d = std::numeric_limits<double>::max();
        for (int j = 0; j < n; ++j) {
            if (slot_fixed[j]) continue;
            double d = circ_dist(s[slots[j]], s[e]);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        if (best >= 0) {
            slots[best] = e;
            slot_fixed[best] = true;
        }
    }

    // Emit in trace order, collapsing duplicate vertices.
    std::vector<int> order(slots.begin(), slots.end());
    std::sort(order.begin(), order.end());
    order.erase(std::unique(order.begin(), order.end()), order.end());
    for (int v : order) {
        out.points.push_back(contour[v]);
        out.is_extreme.push_back(is_extreme_vertex(v));
    }
    return out;
}

namespace {

struct CenteredFit {
    AffineTransform t;
    bool ok = false;
};

// Least squares on centered coordinates: A = N * M^-1, t = c_dst - A * c_src.
CenteredFit fit_affine_lsq(const std::vector<PointPair>& pairs) {
    CenteredFit res;
    const double n = static_cast<double>(pairs.size());
    double csx = 0, csy = 0, cdx = 0, cdy = 0;
    for (const auto& pr : pairs) {
        csx += pr.src.x;
        csy += pr.src.y;
        cdx += pr.dst.x;
        cdy += pr.dst.y;
    }
    csx /= n, csy /= n, cdx /= n, cdy /= n;

    double mxx = 0, mxy = 0, myy = 0;          // scatter of centered sources
    double nxx = 0, nxy = 0, nyx = 0, nyy = 0;  // cross terms dst x src
    for (const auto& pr : pairs) {
        double px = pr.src.x - csx, py = pr.src.y - csy;
        double qx = pr.dst.x - cdx, qy = pr.dst.y - cdy;
        mxx += px * px;
        mxy += px * py;
        myy += py * py;
        nxx += qx * px;
        nxy += qx * py;
        nyx += qy * px;
        nyy += qy * py;
    }
    double det = mxx * myy - mxy * mxy;
    double scale = (mxx + myy) / 2.0;
    if (!(det > 1e-12 * scale * scale)) return res;  // collinear sources

    double i00 = myy / det, i01 = -mxy / det, i11 = mxx / det;
    AffineTransform t;
    t.a = nxx * i00 + nxy * i01;
    t.b = nxx * i01 + nxy * i11;
    t.c = nyx * i00 + nyy * i01;
    t.d = nyx * i01 + nyy * i11;
    t.tx = cdx - (t.a * csx + t.b * csy);
    t.ty = cdy - (t.c * csx + t.d * csy);
    res.t = t;
    res.ok = std::isfinite(t.a) && std::isfinite(t.b) && std::isfinite(t.c) &&
             std::isfinite(t.d) && std::isfinite(t.tx) && std::isfinite(t.ty);
    return res;
}

}  // namespace

double affine_residual_rms(const AffineTransform& t, const std::vector<PointPair>& pairs) {
    if (pairs.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& pr : pairs) {
        Vec2 m = t.apply(pr.src);
        double dx = m.x - pr.dst.x, dy = m.y - pr.dst.y;
        sum += dx * dx + dy * dy;
    }
    return std::sqrt(sum / static_cast<double>(pairs.size()));
}

AffineTransform fit_affine(const std::vector<PointPair>& pairs, const AffineFitConfig& cfg) {
    if (pairs.size() < 3)
        throw DegenerateFit("fit_affine: need at least 3 point pairs, got " +
                            std::to_string(pairs.size()));

    AffineTransform best;
    if (!cfg.use_ransac) {
        CenteredFit fit = fit_affine_lsq(pairs);
        if (!fit.ok) throw DegenerateFit("fit_affine: collinear or degenerate sources");
        best = fit.t;
    } else {
        Rng rng(cfg.ransac_seed);
        const int np = static_cast<int>(pairs.size());
        size_t best_inliers = 0;
        double best_rms = std::numeric_limits<double>::max();
        std::vector<PointPair> triple(3), consensus;
        std::vector<PointPair> best_consensus;
        for (int it = 0; it < cfg.ransac_iters; ++it) {
            int i0 = static_cast<int>(rng.uniform_int(0, np - 1));
            int i1 = static_cast<int>(rng.uniform_int(0, np - 1));
            int i2 = static_cast<int>(rng.uniform_int(0, np - 1));
            if (i0 == i1 || i1 == i2 || i0 == i2) continue;
            triple = {pairs[i0], pairs[i1], pairs[i2]};
            CenteredFit fit = fit_affine_lsq(triple);
            if (!fit.ok) continue;
            consensus.clear();
            for (const auto& pr : pairs) {
                Vec2 m = fit.t.apply(pr.src);
                double dx = m.x - pr.dst.x, dy = m.y - pr.dst.y;
                if (dx * dx + dy * dy <= cfg.ransac_inlier_px * cfg.ransac_inlier_px)
                    consensus.push_back(pr);
            }
            if (consensus.size() < 3) continue;
            double rms = affine_residual_rms(fit.t, consensus);
            if (consensus.size() > best_inliers ||
                (consensus.size() == best_inliers && rms < best_rms)) {
                best_inliers = consensus.size();
                best_rms = rms;
                best_consensus = consensus;
            }
        }
        const std::vector<PointPair>& final_set =
            best_consensus.size() >= 3 ? best_consensus : pairs;
        CenteredFit fit = fit_affine_lsq(final_set);
        if (!fit.ok) throw DegenerateFit("fit_affine: collinear or degenerate sources");
        best = fit.t;
    }

    if (std::abs(best.det()) < cfg.det_floor)
        throw ImplausibleTransform("fit_affine: |det| = " + std::to_string(best.det()) +
                                   " below floor");
    return best;
}

std::vector<uint8_t> warp_component(const Component& c, const AffineTransform& t,
                                    int target_w, int target_h) {
    std::vector<uint8_t> out(static_cast<size_t>(target_w) * target_h, 0);
    if (c.pixels.empty()) return out;

    const AffineTransform inv = t.inverse();  // throws ImplausibleTransform if singular

    // Bound the target-side work by the transformed source bbox.
    const Rect& bb = c.bbox;
    double x0 = std::numeric_limits<double>::max(), y0 = x0;
    double x1 = std::numeric_limits<double>::lowest(), y1 = x1;
    for (const Vec2& corner : {Vec2{static_cast<double>(bb.x), static_cast<double>(bb.y)},
                               Vec2{static_cast<double>(bb.x + bb.w), static_cast<double>(bb.y)},
                               Vec2{static_cast<double>(bb.x), static_cast<double>(bb.y + bb.h)},
                               Vec2{static_cast<double>(bb.x + bb.w),
                                    static_cast<double>(bb.y + bb.h)}}) {
        Vec2 m = t.apply(corner);
        x0 = std::min(x0, m.x), x1 = std::max(x1, m.x);
        y0 = std::min(y0, m.y), y1 = std::max(y1, m.y);
    }
    int tx0 = std::max(0, static_cast<int>(std::floor(x0)) - 1);
    int ty0 = std::max(0, static_cast<int>(std::floor(y0)) - 1);
    int tx1 = std::min(target_w - 1, static_cast<int>(std::ceil(x1)) + 1);
    int ty1 = std::min(target_h - 1, static_cast<int>(std::ceil(y1)) + 1);
    if (tx0 > tx1 || ty0 > ty1) return out;

    const std::vector<uint8_t> bm = c.local_bitmap();
#pragma omp parallel for schedule(static)
    for (int ty = ty0; ty <= ty1; ++ty) {
        for (int tx = tx0; tx <= tx1; ++tx) {
            Vec2 s = inv.apply({tx + 0.5, ty + 0.5});
            int sx = static_cast<int>(std::floor(s.x)) - bb.x;
            int sy = static_cast<int>(std::floor(s.y)) - bb.y;
            if (sx < 0 || sy < 0 || sx >= bb.w || sy >= bb.h) continue;
            if (bm[static_cast<size_t>(sy) * bb.w + sx])
                out[static_cast<size_t>(ty) * target_w + tx] = 1;
        }
    }
    return out;
}

}  // namespace slt
