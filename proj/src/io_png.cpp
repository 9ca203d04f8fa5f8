#include "slt/io.hpp"

#include <png.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>

#include <json.hpp>

#include "slt/errors.hpp"

namespace slt {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

}  // namespace

RasterImage read_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw IoError("cannot open PNG file: " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("failed to decode PNG: " + path.string());
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int color_type = png_get_color_type(png, info);
    int bit_depth = png_get_bit_depth(png, info);

    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_read_update_info(png, info);

    int channels = png_get_channels(png, info);
    size_t rowbytes = png_get_rowbytes(png, info);

    std::vector<uint8_t> raw(rowbytes * h);
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = raw.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    RasterImage img(static_cast<int>(w), static_cast<int>(h), channels, ValueRange::u8_0_255);
    float* dst = img.data().data();
    const size_t n = img.data().size();
    for (size_t i = 0; i < n; ++i) dst[i] = static_cast<float>(raw[i]);
    return img;
}

void write_png(const std::filesystem::path& path, const RasterImage& img) {
    if (img.empty()) throw IoError("refusing to write empty PNG: " + path.string());
    int channels = img.channels();
    if (channels != 1 && channels != 3 && channels != 4)
        throw IoError("PNG writer supports 1/3/4 channels, got " + std::to_string(channels));

    const bool quantize = img.range() == ValueRange::unit_float;
    std::vector<uint8_t> raw(img.data().size());
    const float* src = img.data().data();
    for (size_t i = 0; i < raw.size(); ++i) {
        float v = quantize ? src[i] * 255.0f : src[i];
        raw[i] = static_cast<uint8_t>(std::clamp(v + 0.5f, 0.0f, 255.0f));
    }

    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw IoError("cannot open PNG for writing: " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed to encode PNG: " + path.string());
    }

    png_init_io(png, fp.get());
    int color_type = channels == 1   ? PNG_COLOR_TYPE_GRAY
                     : channels == 3 ? PNG_COLOR_TYPE_RGB
                                     : PNG_COLOR_TYPE_RGBA;
    png_set_IHDR(png, info, img.width(), img.height(), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    size_t rowbytes = static_cast<size_t>(img.width()) * channels;
    std::vector<png_bytep> rows(img.height());
    for (int y = 0; y < img.height(); ++y) rows[y] = raw.data() + y * rowbytes;
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void write_mask_png(const std::filesystem::path& path, const LabelMask& mask) {
    RasterImage img(mask.width(), mask.height(), 1, ValueRange::u8_0_255);
    for (size_t i = 0; i < mask.class_ids().size(); ++i)
        img.data()[i] = static_cast<float>(mask.class_ids()[i]);
    write_png(path, img);

    std::filesystem::path sidecar = path;
    sidecar += ".instances.json";
    if (!mask.has_instances()) {
        std::filesystem::remove(sidecar);
        return;
    }
    // Run-length encode the instance channel: [[id, count], ...] in raster order.
    nlohmann::json runs = nlohmann::json::array();
    const auto& ids = mask.instance_ids();
    size_t i = 0;
    while (i < ids.size()) {
        size_t j = i;
        while (j < ids.size() && ids[j] == ids[i]) ++j;
        runs.push_back({ids[i], j - i});
        i = j;
    }
    nlohmann::json doc{{"schema", "mask-instances/1"},
                       {"width", mask.width()},
                       {"height", mask.height()},
                       {"runs", runs}};
    write_text_file(sidecar, doc.dump(2) + "\n");
}

LabelMask read_mask_png(const std::filesystem::path& path) {
    RasterImage img = read_png(path);
    if (img.channels() != 1)
        throw ParseError("mask PNG must be single-channel: " + path.string());
    LabelMask mask(img.width(), img.height());
    for (size_t i = 0; i < mask.class_ids().size(); ++i)
        mask.class_ids()[i] = static_cast<uint8_t>(img.data()[i]);

    std::filesystem::path sidecar = path;
    sidecar += ".instances.json";
    if (std::filesystem::exists(sidecar)) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(read_text_file(sidecar));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("bad instance sidecar " + sidecar.string() + ": " + e.what());
        }
        mask.ensure_instances();
        size_t pos = 0;
        for (const auto& run : doc.at("runs")) {
            uint32_t id = run.at(0).get<uint32_t>();
            size_t count = run.at(1).get<size_t>();
            if (pos + count > mask.instance_ids().size())
                throw ParseError("instance runs exceed mask size: " + sidecar.string());
            std::fill_n(mask.instance_ids().begin() + pos, count, id);
            pos += count;
        }
        if (pos != mask.instance_ids().size())
            throw ParseError("instance runs do not cover mask: " + sidecar.string());
    }
    return mask;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace slt
