#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "slt/affine.hpp"
#include "slt/types.hpp"

namespace slt {

struct Correspondence {
    Vec2 src;
    Vec2 dst;
    double confidence = 0.0;  // in [0, 1]
};

struct MatcherConfig {
    int window_radius = 15;
    int search_radius = 48;
    int pyramid_levels = 3;
    double min_confidence = 0.5;
};

// Point-correspondence provider between a source and a target view. One slot
// per query, order preserved; an empty slot means no confident match.
// Implementations must be deterministic given inputs and configuration.
class PointMatcher {
public:
    virtual ~PointMatcher() = default;
    virtual std::vector<std::optional<Correspondence>> match_points(
        const RasterImage& source, const RasterImage& target,
        const std::vector<Vec2>& queries) const = 0;
};

// Coarse-to-fine normalized cross-correlation matcher. Integer-pixel
// displacements; confidence = max(0, NCC peak). Queries on zero-variance
// patches come back empty. When the frames differ in size the source is
// internally rescaled to the target frame before matching.
class NccMatcher : public PointMatcher {
public:
    explicit NccMatcher(MatcherConfig cfg = {}) : cfg_(cfg) {}
    std::vector<std::optional<Correspondence>> match_points(
        const RasterImage& source, const RasterImage& target,
        const std::vector<Vec2>& queries) const override;
    const MatcherConfig& config() const { return cfg_; }

private:
    MatcherConfig cfg_;
};

// Serves correspondences precomputed by an external matcher from a JSON-lines
// file (one record per line: {"sample_id", "src": [x,y], "dst": [x,y],
// "confidence"}). A query snaps to the nearest stored source point within
// snap_radius, else the slot is empty.
class FileMatcher : public PointMatcher {
public:
    FileMatcher(const std::filesystem::path& path, const std::string& sample_id,
                double snap_radius = 2.0, double min_confidence = 0.5);
    std::vector<std::optional<Correspondence>> match_points(
        const RasterImage& source, const RasterImage& target,
        const std::vector<Vec2>& queries) const override;
    size_t record_count() const { return records_.size(); }

private:
    std::vector<Correspondence> records_;
    double snap_radius_;
    double min_confidence_;
};

// Answers every query through a known ground-truth mapping; confidence 1.
// The mapping may decline a query (returns nullopt) e.g. for points outside
// any object. Used by the synthetic rig and by tests.
class OracleMatcher : public PointMatcher {
public:
    using MapFn = std::function<std::optional<Vec2>(Vec2)>;
    explicit OracleMatcher(MapFn fn) : fn_(std::move(fn)) {}
    explicit OracleMatcher(const AffineTransform& t)
        : fn_([t](Vec2 p) { return std::optional<Vec2>(t.apply(p)); }) {}
    std::vector<std::optional<Correspondence>> match_points(
        const RasterImage& source, const RasterImage& target,
        const std::vector<Vec2>& queries) const override;

private:
    MapFn fn_;
};

}  // namespace slt
