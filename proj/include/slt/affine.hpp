#pragma once

#include <array>
#include <cmath>

#include "slt/errors.hpp"
#include "slt/types.hpp"

namespace slt {

// 2x3 affine map [A|t]: p' = A*p + t.
struct AffineTransform {
    // Row-major: [a b tx; c d ty].
    double a = 1.0, b = 0.0, tx = 0.0;
    double c = 0.0, d = 1.0, ty = 0.0;

    bool operator==(const AffineTransform&) const = default;

    static AffineTransform identity() { return {}; }

    static AffineTransform translation(double dx, double dy) {
        return {1.0, 0.0, dx, 0.0, 1.0, dy};
    }

    static AffineTransform scaling(double sx, double sy) {
        return {sx, 0.0, 0.0, 0.0, sy, 0.0};
    }

    // Rotation by `radians` about `center` (positive = x-axis toward y-axis,
    // i.e. clockwise on screens with y pointing down).
    static AffineTransform rotation(double radians, Vec2 center = {0.0, 0.0}) {
        double cs = std::cos(radians), sn = std::sin(radians);
        AffineTransform t{cs, -sn, 0.0, sn, cs, 0.0};
        t.tx = center.x - (cs * center.x - sn * center.y);
        t.ty = center.y - (sn * center.x + cs * center.y);
        return t;
    }

    Vec2 apply(Vec2 p) const {
        return {a * p.x + b * p.y + tx, c * p.x + d * p.y + ty};
    }

    // Linear part only, no translation.
    Vec2 apply_vector(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }

    double det() const { return a * d - b * c; }

    AffineTransform inverse() const {
        double dv = det();
        if (std::abs(dv) < 1e-12)
            throw ImplausibleTransform("affine transform is not invertible");
        double ia = d / dv, ib = -b / dv, ic = -c / dv, id = a / dv;
        return {ia, ib, -(ia * tx + ib * ty), ic, id, -(ic * tx + id * ty)};
    }

    // Composition: (this ∘ o)(p) = this(o(p)).
    AffineTransform compose(const AffineTransform& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, a * o.tx + b * o.ty + tx,
                c * o.a + d * o.c, c * o.b + d * o.d, c * o.tx + d * o.ty + ty};
    }

    // Max absolute difference over the six coefficients.
    double max_coeff_distance(const AffineTransform& o) const {
        double m = std::abs(a - o.a);
        m = std::max(m, std::abs(b - o.b));
        m = std::max(m, std::abs(tx - o.tx));
        m = std::max(m, std::abs(c - o.c));
        m = std::max(m, std::abs(d - o.d));
        m = std::max(m, std::abs(ty - o.ty));
        return m;
    }

    std::array<double, 6> coeffs() const { return {a, b, tx, c, d, ty}; }
};

}  // namespace slt
