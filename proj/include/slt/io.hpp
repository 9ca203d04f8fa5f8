#pragma once

#include <filesystem>
#include <string>

#include "slt/types.hpp"

namespace slt {

// ---- PNG ----
// Images are read as 8-bit (u8_0_255); 16-bit files are downscaled, palette
// files expanded. Gray/RGB/RGBA, i.e. 1, 3 or 4 channels.
RasterImage read_png(const std::filesystem::path& path);

// Writes an 8-bit PNG. Accepts u8_0_255 data, or unit_float data which is
// quantized to 0..255.
void write_png(const std::filesystem::path& path, const RasterImage& img);

// Class-ID masks as single-channel 8-bit PNG. Instance IDs, when present, go
// to a run-length-encoded JSON sidecar at `path + ".instances.json"`.
void write_mask_png(const std::filesystem::path& path, const LabelMask& mask);
LabelMask read_mask_png(const std::filesystem::path& path);

// ---- ENVI pairs (text header + raw binary) ----
// 16-bit cubes use interleave=bsq, data type 12. Float rasters (e.g.
// preprocessed cubes, PCA projections) use interleave=bip, data type 4.
// `header_path` names the .hdr file; the raw file drops the .hdr extension
// and uses .raw.
void write_envi_cube(const std::filesystem::path& header_path, const HyperCube& cube);
HyperCube read_envi_cube(const std::filesystem::path& header_path);

void write_envi_float(const std::filesystem::path& header_path, const RasterImage& img);
RasterImage read_envi_float(const std::filesystem::path& header_path);

// ---- small helpers ----
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace slt
