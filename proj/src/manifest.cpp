#include "slt/manifest.hpp"

#include <set>

#include <json.hpp>

#include "slt/errors.hpp"
#include "slt/io.hpp"

namespace slt {

using nlohmann::json;

const std::vector<ClassInfo>& default_taxonomy() {
    static const std::vector<ClassInfo> taxonomy = {
        {1, "film"},     {2, "basket"},   {3, "cardboard"},
        {4, "video_tape"}, {5, "filament"}, {6, "trash_bag"},
    };
    return taxonomy;
}

int class_id_by_name(const std::vector<ClassInfo>& taxonomy, const std::string& name) {
    for (const auto& c : taxonomy)
        if (c.name == name) return c.id;
    throw ParseError("unknown class name: " + name);
}

const std::string& class_name_by_id(const std::vector<ClassInfo>& taxonomy, int id) {
    for (const auto& c : taxonomy)
        if (c.id == id) return c.name;
    throw ParseError("unknown class id: " + std::to_string(id));
}

std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "train";
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    throw ParseError("unknown split: " + s);
}

const SampleRecord* DatasetManifest::find(const std::string& id) const {
    for (const auto& s : samples)
        if (s.id == id) return &s;
    return nullptr;
}

AnnotationSet load_annotations(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ParseError("bad annotation file " + path.string() + ": " + e.what());
    }
    AnnotationSet ann;
    try {
        ann.width = doc.at("image_size").at(0).get<int>();
        ann.height = doc.at("image_size").at(1).get<int>();
        for (const auto& inst : doc.at("instances")) {
            Annotation a;
            a.class_name = inst.at("class").get<std::string>();
            a.instance_id = inst.value("instance_id", 0u);
            for (const auto& v : inst.at("polygon"))
                a.polygon.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
            ann.instances.push_back(std::move(a));
        }
    } catch (const json::exception& e) {
        throw ParseError("bad annotation file " + path.string() + ": " + e.what());
    }
    return ann;
}

void save_annotations(const std::filesystem::path& path, const AnnotationSet& ann) {
    json instances = json::array();
    for (const auto& a : ann.instances) {
        json poly = json::array();
        for (const auto& v : a.polygon) poly.push_back({v.x, v.y});
        instances.push_back({{"class", a.class_name},
                             {"instance_id", a.instance_id},
                             {"polygon", poly}});
    }
    json doc{{"schema", "annotations/1"},
             {"image_size", {ann.width, ann.height}},
             {"instances", instances}};
    write_text_file(path, doc.dump(2) + "\n");
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ParseError("bad manifest " + path.string() + ": " + e.what());
    }

    DatasetManifest m;
    m.base_dir = std::filesystem::absolute(path).parent_path();
    try {
        for (const auto& c : doc.at("classes"))
            m.taxonomy.push_back({c.at("id").get<int>(), c.at("name").get<std::string>()});
        std::set<std::string> seen;
        for (const auto& s : doc.at("samples")) {
            SampleRecord r;
            r.id = s.at("id").get<std::string>();
            if (!seen.insert(r.id).second)
                throw ParseError("duplicate sample id in manifest: " + r.id);
            r.rgb_path = s.value("rgb", "");
            r.cube_path = s.value("cube", "");
            r.annotation_path = s.value("annotations", "");
            r.split = split_from_string(s.value("split", "train"));
            r.gt_target_mask_path = s.value("gt_target_mask", "");
            r.gt_affines_path = s.value("gt_affines", "");
            m.samples.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw ParseError("bad manifest " + path.string() + ": " + e.what());
    }
    return m;
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
    json classes = json::array();
    for (const auto& c : manifest.taxonomy)
        classes.push_back({{"id", c.id}, {"name", c.name}});
    json samples = json::array();
    for (const auto& s : manifest.samples) {
        json rec{{"id", s.id}, {"split", to_string(s.split)}};
        if (!s.rgb_path.empty()) rec["rgb"] = s.rgb_path;
        if (!s.cube_path.empty()) rec["cube"] = s.cube_path;
        if (!s.annotation_path.empty()) rec["annotations"] = s.annotation_path;
        if (!s.gt_target_mask_path.empty()) rec["gt_target_mask"] = s.gt_target_mask_path;
        if (!s.gt_affines_path.empty()) rec["gt_affines"] = s.gt_affines_path;
        samples.push_back(std::move(rec));
    }
    json doc{{"schema", "dataset-manifest/1"}, {"classes", classes}, {"samples", samples}};
    write_text_file(path, doc.dump(2) + "\n");
}

}  // namespace slt
