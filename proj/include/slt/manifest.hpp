#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "slt/types.hpp"

namespace slt {

// One polygon instance in source-image coordinates.
struct Annotation {
    std::string class_name;
    uint32_t instance_id = 0;
    std::vector<Vec2> polygon;  // >= 3 vertices
};

struct AnnotationSet {
    int width = 0;  // source image size the polygons refer to
    int height = 0;
    std::vector<Annotation> instances;
};

enum class Split { train, val, test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct SampleRecord {
    std::string id;
    std::string rgb_path;
    std::string cube_path;
    std::string annotation_path;
    Split split = Split::train;
    // Optional extras written by the synthetic rig: a ground-truth mask in the
    // target (HSI) frame and the per-object true affines.
    std::string gt_target_mask_path;
    std::string gt_affines_path;
};

struct DatasetManifest {
    std::vector<ClassInfo> taxonomy;
    std::vector<SampleRecord> samples;
    std::filesystem::path base_dir;  // directory the relative paths resolve against

    std::filesystem::path resolve(const std::string& rel) const { return base_dir / rel; }
    const SampleRecord* find(const std::string& id) const;
};

AnnotationSet load_annotations(const std::filesystem::path& path);
void save_annotations(const std::filesystem::path& path, const AnnotationSet& ann);

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

}  // namespace slt
