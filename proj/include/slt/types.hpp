#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slt/errors.hpp"

namespace slt {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Vec2&) const = default;
};

struct Vec2i {
    int x = 0;
    int y = 0;
    bool operator==(const Vec2i&) const = default;
};

// Rectangle in pixel coordinates, {x,y} = top-left corner.
struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
    bool empty() const { return w <= 0 || h <= 0; }
    bool contains(int px, int py) const {
        return px >= x && px < x + w && py >= y && py < y + h;
    }
};

enum class ValueRange : uint8_t {
    u8_0_255,
    u16_0_65535,
    unit_float,
};

// 2-D multi-channel raster, row-major, channels interleaved per pixel.
// Index of (x, y, c) is (y*width + x)*channels + c.
class RasterImage {
public:
    RasterImage() = default;
    RasterImage(int width, int height, int channels,
                ValueRange range = ValueRange::unit_float)
        : width_(width), height_(height), channels_(channels), range_(range),
          data_(static_cast<size_t>(width) * height * channels, 0.0f) {}

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    ValueRange range() const { return range_; }
    void set_range(ValueRange r) { range_ = r; }

    bool empty() const { return data_.empty(); }
    size_t pixel_count() const { return static_cast<size_t>(width_) * height_; }

    float& at(int x, int y, int c) {
        return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
    }
    float at(int x, int y, int c) const {
        return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
    }
    const float* pixel(int x, int y) const {
        return data_.data() + (static_cast<size_t>(y) * width_ + x) * channels_;
    }
    float* pixel(int x, int y) {
        return data_.data() + (static_cast<size_t>(y) * width_ + x) * channels_;
    }

    std::vector<float>& data() { return data_; }
    const std::vector<float>& data() const { return data_; }

    bool same_shape(const RasterImage& o) const {
        return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    ValueRange range_ = ValueRange::unit_float;
    std::vector<float> data_;
};

// H x W x C hyperspectral cube, 16-bit samples, band-sequential layout.
// Index of (x, y, b) is b*width*height + y*width + x.
class HyperCube {
public:
    HyperCube() = default;
    HyperCube(int width, int height, int bands)
        : width_(width), height_(height), bands_(bands),
          data_(static_cast<size_t>(width) * height * bands, 0) {}

    int width() const { return width_; }
    int height() const { return height_; }
    int bands() const { return bands_; }
    bool empty() const { return data_.empty(); }

    uint16_t& at(int x, int y, int b) {
        return data_[band_offset(b) + static_cast<size_t>(y) * width_ + x];
    }
    uint16_t at(int x, int y, int b) const {
        return data_[band_offset(b) + static_cast<size_t>(y) * width_ + x];
    }
    const uint16_t* band(int b) const { return data_.data() + band_offset(b); }
    uint16_t* band(int b) { return data_.data() + band_offset(b); }

    std::vector<uint16_t>& data() { return data_; }
    const std::vector<uint16_t>& data() const { return data_; }

    // Per-band center wavelengths; empty when unknown. Strictly increasing when present.
    std::vector<double> wavelengths_nm;

private:
    size_t band_offset(int b) const {
        return static_cast<size_t>(b) * width_ * height_;
    }
    int width_ = 0;
    int height_ = 0;
    int bands_ = 0;
    std::vector<uint16_t> data_;
};

// Per-pixel class IDs (0 = background) with an optional parallel instance channel
// (0 = none). instance_id > 0 implies class_id > 0.
class LabelMask {
public:
    LabelMask() = default;
    LabelMask(int width, int height)
        : width_(width), height_(height),
          class_ids_(static_cast<size_t>(width) * height, 0) {}

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return class_ids_.empty(); }
    size_t pixel_count() const { return class_ids_.size(); }

    uint8_t& cls(int x, int y) { return class_ids_[idx(x, y)]; }
    uint8_t cls(int x, int y) const { return class_ids_[idx(x, y)]; }

    bool has_instances() const { return !instance_ids_.empty(); }
    void ensure_instances() {
        if (instance_ids_.empty()) instance_ids_.assign(class_ids_.size(), 0);
    }
    uint32_t instance(int x, int y) const {
        return instance_ids_.empty() ? 0 : instance_ids_[idx(x, y)];
    }
    void set_instance(int x, int y, uint32_t id) {
        ensure_instances();
        instance_ids_[idx(x, y)] = id;
    }

    std::vector<uint8_t>& class_ids() { return class_ids_; }
    const std::vector<uint8_t>& class_ids() const { return class_ids_; }
    std::vector<uint32_t>& instance_ids() { return instance_ids_; }
    const std::vector<uint32_t>& instance_ids() const { return instance_ids_; }

    bool same_shape(const LabelMask& o) const {
        return width_ == o.width_ && height_ == o.height_;
    }

private:
    size_t idx(int x, int y) const { return static_cast<size_t>(y) * width_ + x; }
    int width_ = 0;
    int height_ = 0;
    std::vector<uint8_t> class_ids_;
    std::vector<uint32_t> instance_ids_;
};

struct ClassInfo {
    int id = 0;
    std::string name;
};

// The six-class waste taxonomy, in reporting column order.
const std::vector<ClassInfo>& default_taxonomy();

// Looks up a class id by name; throws ParseError for unknown names.
int class_id_by_name(const std::vector<ClassInfo>& taxonomy, const std::string& name);
const std::string& class_name_by_id(const std::vector<ClassInfo>& taxonomy, int id);

}  // namespace slt
