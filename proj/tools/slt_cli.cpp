// Command-line front end: synth | preprocess | pca-fit | pca-apply |
// transfer | evaluate | report. Every run drops a run_manifest.json with the
// resolved configuration and the artifacts it produced.

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "slt/errors.hpp"
#include "slt/image_ops.hpp"
#include "slt/io.hpp"
#include "slt/manifest.hpp"
#include "slt/matching.hpp"
#include "slt/metrics.hpp"
#include "slt/pca.hpp"
#include "slt/preprocess.hpp"
#include "slt/rasterize.hpp"
#include "slt/synth.hpp"
#include "slt/transfer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace slt;

namespace {

// Relative output directories land under $SLT_OUT_ROOT when it is set.
fs::path resolve_out(const fs::path& out) {
    const char* root = std::getenv("SLT_OUT_ROOT");
    if (!root || out.is_absolute()) return out;
    return fs::path(root) / out;
}

// Single versioned config file ("slt-config/1"); command-line flags override
// whatever it sets. Loaded before CLI11 parses so the flags win.
struct FileConfig {
    SceneConfig synth;
    PreprocessConfig preprocess;
    MatcherConfig matcher;
    TransferConfig transfer;
    int pca_k = 3;
    size_t pca_max_pixels = 1000000;
    uint64_t pca_seed = 0;
};

void load_file_config(const fs::path& path, FileConfig& cfg) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ParseError("bad config file " + path.string() + ": " + e.what());
    }
    if (doc.value("schema", "") != "slt-config/1")
        throw ParseError("unsupported config schema in " + path.string());
    if (doc.contains("synth")) {
        const json& s = doc["synth"];
        cfg.synth.rgb_w = s.value("rgb_width", cfg.synth.rgb_w);
        cfg.synth.rgb_h = s.value("rgb_height", cfg.synth.rgb_h);
        cfg.synth.hsi_w = s.value("hsi_width", cfg.synth.hsi_w);
        cfg.synth.hsi_h = s.value("hsi_height", cfg.synth.hsi_h);
        cfg.synth.bands = s.value("bands", cfg.synth.bands);
        cfg.synth.min_objects = s.value("min_objects", cfg.synth.min_objects);
        cfg.synth.max_objects = s.value("max_objects", cfg.synth.max_objects);
        cfg.synth.ensure_ribbon_prob =
            s.value("ensure_ribbon_prob", cfg.synth.ensure_ribbon_prob);
        cfg.synth.image_noise = s.value("image_noise", cfg.synth.image_noise);
        cfg.synth.spectral_noise = s.value("spectral_noise", cfg.synth.spectral_noise);
        cfg.synth.projective_eps = s.value("projective_eps", cfg.synth.projective_eps);
    }
    if (doc.contains("preprocess")) {
        const json& p = doc["preprocess"];
        cfg.preprocess.target_w = p.value("target_width", cfg.preprocess.target_w);
        cfg.preprocess.target_h = p.value("target_height", cfg.preprocess.target_h);
        cfg.preprocess.rgb_norm_divisor =
            p.value("rgb_norm_divisor", cfg.preprocess.rgb_norm_divisor);
        cfg.preprocess.cube_norm_divisor =
            p.value("cube_norm_divisor", cfg.preprocess.cube_norm_divisor);
        auto crop = [&](const char* key, Rect& r) {
            if (p.contains(key) && p[key].size() == 4)
                r = Rect{p[key][0], p[key][1], p[key][2], p[key][3]};
        };
        crop("rgb_crop", cfg.preprocess.rgb_crop);
        crop("cube_crop", cfg.preprocess.cube_crop);
    }
    if (doc.contains("matcher")) {
        const json& m = doc["matcher"];
        cfg.matcher.window_radius = m.value("window_radius", cfg.matcher.window_radius);
        cfg.matcher.search_radius = m.value("search_radius", cfg.matcher.search_radius);
        cfg.matcher.pyramid_levels = m.value("pyramid_levels", cfg.matcher.pyramid_levels);
        cfg.matcher.min_confidence = m.value("min_confidence", cfg.matcher.min_confidence);
    }
    if (doc.contains("transfer")) {
        const json& t = doc["transfer"];
        cfg.transfer.points_per_contour =
            t.value("points_per_contour", cfg.transfer.points_per_contour);
        cfg.transfer.points_per_contour_long =
            t.value("points_per_contour_long", cfg.transfer.points_per_contour_long);
        cfg.transfer.long_contour_threshold =
            t.value("long_contour_threshold", cfg.transfer.long_contour_threshold);
        cfg.transfer.min_matches = t.value("min_matches", cfg.transfer.min_matches);
        cfg.transfer.min_component_area =
            t.value("min_component_area", cfg.transfer.min_component_area);
        if (t.value("fallback", "keep") == "drop")
            cfg.transfer.fallback = FallbackPolicy::drop_component;
        cfg.transfer.fit.use_ransac = t.value("ransac", cfg.transfer.fit.use_ransac);
        cfg.transfer.fit.det_floor = t.value("det_floor", cfg.transfer.fit.det_floor);
    }
    if (doc.contains("pca")) {
        const json& p = doc["pca"];
        cfg.pca_k = p.value("k", cfg.pca_k);
        cfg.pca_max_pixels = p.value("max_pixels", cfg.pca_max_pixels);
        cfg.pca_seed = p.value("seed", cfg.pca_seed);
    }
}

struct RunRecorder {
    fs::path out_dir;
    json config = json::object();
    std::vector<std::string> artifacts;

    void add(const fs::path& p) { artifacts.push_back(fs::relative(p, out_dir).string()); }

    void write(const std::string& command) {
        json doc{{"schema", "run-manifest/1"},
                 {"command", command},
                 {"config", config},
                 {"artifacts", artifacts}};
        write_text_file(out_dir / "run_manifest.json", doc.dump(2) + "\n");
    }
};

json rect_to_json(const Rect& r) { return {r.x, r.y, r.w, r.h}; }

// Sample-level failures skip the sample; a summary decides the exit code.
struct BatchStatus {
    int processed = 0;
    int skipped = 0;
    std::vector<std::string> failures;

    void fail(const std::string& id, const std::string& why) {
        ++skipped;
        failures.push_back(id + ": " + why);
        std::cerr << "skip " << id << ": " << why << "\n";
    }
    int exit_code() const { return processed == 0 && skipped > 0 ? 1 : 0; }
    void print(const std::string& what) const {
        std::cout << what << ": " << processed << " processed, " << skipped
                  << " skipped\n";
    }
};

RasterImage first_channel(const RasterImage& img) {
    RasterImage out(img.width(), img.height(), 1, img.range());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) out.at(x, y, 0) = img.at(x, y, 0);
    return out;
}

RasterImage cube_mean_projection(const HyperCube& cube) {
    RasterImage out(cube.width(), cube.height(), 1, ValueRange::unit_float);
    const double inv = 1.0 / (65535.0 * cube.bands());
#pragma omp parallel for schedule(static)
    for (int y = 0; y < cube.height(); ++y)
        for (int x = 0; x < cube.width(); ++x) {
            double acc = 0;
            for (int b = 0; b < cube.bands(); ++b) acc += cube.at(x, y, b);
            out.at(x, y, 0) = static_cast<float>(acc * inv);
        }
    return out;
}

LabelMask mask_for_sample(const DatasetManifest& manifest, const SampleRecord& rec,
                          int w, int h) {
    AnnotationSet ann = load_annotations(manifest.resolve(rec.annotation_path));
    return rasterize_annotations(ann, w, h, ann.width, ann.height, manifest.taxonomy);
}

std::vector<int> taxonomy_ids(const DatasetManifest& manifest) {
    std::vector<int> ids;
    for (const auto& c : manifest.taxonomy) ids.push_back(c.id);
    return ids;
}

// ---- synth ----

int cmd_synth(const fs::path& out, int scenes, uint64_t seed, const SceneConfig& cfg) {
    fs::create_directories(out);
    fs::path manifest_path = write_dataset(out, scenes, seed, cfg);

    RunRecorder rec;
    rec.out_dir = out;
    rec.config = {{"scenes", scenes},
                  {"seed", seed},
                  {"rgb_size", {cfg.rgb_w, cfg.rgb_h}},
                  {"hsi_size", {cfg.hsi_w, cfg.hsi_h}},
                  {"bands", cfg.bands},
                  {"ensure_ribbon_prob", cfg.ensure_ribbon_prob},
                  {"image_noise", cfg.image_noise},
                  {"spectral_noise", cfg.spectral_noise},
                  {"projective_eps", cfg.projective_eps}};
    rec.add(manifest_path);
    DatasetManifest m = load_manifest(manifest_path);
    for (const auto& s : m.samples) {
        rec.add(m.resolve(s.rgb_path));
        rec.add(m.resolve(s.cube_path));
        rec.add(m.resolve(s.annotation_path));
        rec.add(m.resolve(s.gt_target_mask_path));
    }
    rec.write("synth");
    std::cout << "synth: wrote " << scenes << " scenes to " << out.string() << "\n";
    return 0;
}

// ---- preprocess ----

int cmd_preprocess(const fs::path& manifest_path, const fs::path& out,
                   const PreprocessConfig& cfg) {
    DatasetManifest manifest = load_manifest(manifest_path);
    fs::create_directories(out / "samples");

    RunRecorder rec;
    rec.out_dir = out;
    rec.config = {{"target", {cfg.target_w, cfg.target_h}},
                  {"rgb_crop", rect_to_json(cfg.rgb_crop)},
                  {"cube_crop", rect_to_json(cfg.cube_crop)},
                  {"rgb_norm_divisor", cfg.rgb_norm_divisor},
                  {"cube_norm_divisor", cfg.cube_norm_divisor}};

    DatasetManifest out_manifest;
    out_manifest.taxonomy = manifest.taxonomy;
    out_manifest.base_dir = out;

    BatchStatus status;
    for (const auto& s : manifest.samples) {
        try {
            RasterImage rgb = read_png(manifest.resolve(s.rgb_path));
            HyperCube cube = read_envi_cube(manifest.resolve(s.cube_path));
            std::optional<LabelMask> mask;
            if (!s.annotation_path.empty())
                mask = mask_for_sample(manifest, s, rgb.width(), rgb.height());

            PreprocessedSample pre = preprocess(rgb, cube, mask, cfg);

            std::string stem = "samples/" + s.id;
            write_envi_float(out / (stem + ".rgb.hdr"), pre.rgb);
            write_envi_float(out / (stem + ".cube.hdr"), pre.cube);
            write_png(out / (stem + ".rgb.png"), pre.rgb);
            SampleRecord outrec;
            outrec.id = s.id;
            outrec.rgb_path = stem + ".rgb.hdr";
            outrec.cube_path = stem + ".cube.hdr";
            outrec.split = s.split;
            if (pre.mask) {
                write_mask_png(out / (stem + ".mask.png"), *pre.mask);
                rec.add(out / (stem + ".mask.png"));
            }
            rec.add(out / (stem + ".rgb.hdr"));
            rec.add(out / (stem + ".cube.hdr"));
            out_manifest.samples.push_back(std::move(outrec));
            ++status.processed;
        } catch (const Error& e) {
            status.fail(s.id, e.what());
        }
    }
    save_manifest(out / "manifest.json", out_manifest);
    rec.add(out / "manifest.json");
    rec.write("preprocess");
    status.print("preprocess");
    return status.exit_code();
}

// ---- pca ----

RasterImage load_cube_as_float(const DatasetManifest& manifest, const SampleRecord& s) {
    fs::path path = manifest.resolve(s.cube_path);
    try {
        return cube_to_float(read_envi_cube(path));
    } catch (const ParseError&) {
        return read_envi_float(path);  // already-preprocessed float cube
    }
}

int cmd_pca_fit(const fs::path& manifest_path, const fs::path& out, const std::string& split,
                int k, size_t max_pixels, uint64_t seed) {
    DatasetManifest manifest = load_manifest(manifest_path);
    fs::create_directories(out);

    std::vector<const SampleRecord*> picked;
    for (const auto& s : manifest.samples)
        if (split == "all" || to_string(s.split) == split) picked.push_back(&s);
    if (picked.empty()) throw Error("pca-fit: no samples in split '" + split + "'");

    // Budget the pixel cap evenly across samples, seeded phase per sample.
    size_t per_sample = std::max<size_t>(1, max_pixels / picked.size());
    std::vector<float> pixels;
    int bands = 0;
    BatchStatus status;
    for (size_t i = 0; i < picked.size(); ++i) {
        try {
            RasterImage cube = load_cube_as_float(manifest, *picked[i]);
            if (bands == 0) {
                bands = cube.channels();
                pixels.reserve(std::min(max_pixels, per_sample * picked.size()) * bands);
            }
            if (cube.channels() != bands)
                throw ShapeMismatch("band count differs from the first sample");
            size_t n = cube.pixel_count();
            size_t stride = n <= per_sample ? 1 : n / per_sample + 1;
            Rng rng(seed + i);
            size_t phase = stride == 1
                               ? 0
                               : static_cast<size_t>(rng.uniform_int(
                                     0, static_cast<int64_t>(stride) - 1));
            for (size_t p = phase; p < n; p += stride) {
                const float* row = cube.data().data() + p * bands;
                pixels.insert(pixels.end(), row, row + bands);
            }
            ++status.processed;
        } catch (const Error& e) {
            status.fail(picked[i]->id, e.what());
        }
    }
    if (pixels.empty()) return 1;

    PcaModel model = pca_fit(pixels, bands, k);
    save_pca_model(out / "pca_model.json", model);

    RunRecorder rec;
    rec.out_dir = out;
    rec.config = {{"split", split}, {"k", k}, {"max_pixels", max_pixels}, {"seed", seed}};
    rec.add(out / "pca_model.json");
    rec.write("pca-fit");

    std::cout << "pca-fit: " << pixels.size() / bands << " spectra, k=" << k
              << ", explained variance " << model.evr_sum() * 100.0 << "%\n";
    status.print("pca-fit");
    return status.exit_code();
}

int cmd_pca_apply(const fs::path& manifest_path, const fs::path& out,
                  const fs::path& model_path, bool write_false_color) {
    DatasetManifest manifest = load_manifest(manifest_path);
    PcaModel model = load_pca_model(model_path);
    fs::create_directories(out / "samples");

    RunRecorder rec;
    rec.out_dir = out;
    rec.config = {{"model", model_path.string()}, {"k", model.k}};

    BatchStatus status;
    for (const auto& s : manifest.samples) {
        try {
            RasterImage cube = load_cube_as_float(manifest, s);
            RasterImage projected = pca_apply(cube, model);
            std::string stem = "samples/" + s.id;
            write_envi_float(out / (stem + ".hyper3.hdr"), projected);
            rec.add(out / (stem + ".hyper3.hdr"));
            if (write_false_color && model.k >= 3) {
                RasterImage fc = false_color(projected, 0, 1, 2);
                write_png(out / (stem + ".hyper3.png"), fc);
                rec.add(out / (stem + ".hyper3.png"));
            }
            ++status.processed;
        } catch (const Error& e) {
            status.fail(s.id, e.what());
        }
    }
    rec.write("pca-apply");
    status.print("pca-apply");
    return status.exit_code();
}

// ---- transfer ----

struct TransferCliOptions {
    std::string matcher = "ncc";
    fs::path matches_file;
    std::string hsi_projection = "mean";  // mean | pca
    fs::path pca_model;
    MatcherConfig matcher_cfg;
    TransferConfig transfer_cfg;
    int target_w = 0, target_h = 0;  // 0 = native hsi frame
};

int cmd_transfer(const fs::path& manifest_path, const fs::path& out,
                 const TransferCliOptions& opt) {
    DatasetManifest manifest = load_manifest(manifest_path);
    fs::create_directories(out / "masks");
    fs::create_directories(out / "reports");

    std::optional<PcaModel> pca_model;
    if (opt.hsi_projection == "pca") pca_model = load_pca_model(opt.pca_model);

    RunRecorder rec;
    rec.out_dir = out;
    rec.config = {{"matcher", opt.matcher},
                  {"hsi_projection", opt.hsi_projection},
                  {"points_per_contour", opt.transfer_cfg.points_per_contour},
                  {"min_matches", opt.transfer_cfg.min_matches},
                  {"min_component_area", opt.transfer_cfg.min_component_area},
                  {"fallback",
                   opt.transfer_cfg.fallback == FallbackPolicy::keep_resized_original
                       ? "keep_resized_original"
                       : "drop_component"},
                  {"window_radius", opt.matcher_cfg.window_radius},
                  {"search_radius", opt.matcher_cfg.search_radius},
                  {"pyramid_levels", opt.matcher_cfg.pyramid_levels},
                  {"min_confidence", opt.matcher_cfg.min_confidence}};

    BatchStatus status;
    for (const auto& s : manifest.samples) {
        try {
            RasterImage rgb = read_png(manifest.resolve(s.rgb_path));
            RasterImage src_gray = to_gray(rgb);
            HyperCube cube = read_envi_cube(manifest.resolve(s.cube_path));
            RasterImage tgt_gray = pca_model
                                       ? first_channel(pca_apply(cube, *pca_model))
                                       : cube_mean_projection(cube);
            if (opt.target_w > 0)
                tgt_gray = resize_bilinear(tgt_gray, opt.target_w, opt.target_h);

            LabelMask mask = mask_for_sample(manifest, s, rgb.width(), rgb.height());

            LabelMask out_mask;
            TransferReport report;
            if (opt.matcher == "ma") {
                out_mask = manual_alignment(mask, tgt_gray.width(), tgt_gray.height());
            } else {
                std::unique_ptr<PointMatcher> matcher;
                if (opt.matcher == "ncc") {
                    matcher = std::make_unique<NccMatcher>(opt.matcher_cfg);
                } else if (opt.matcher == "file") {
                    matcher = std::make_unique<FileMatcher>(
                        opt.matches_file, s.id, 2.0, opt.matcher_cfg.min_confidence);
                } else if (opt.matcher == "oracle") {
                    if (s.gt_affines_path.empty())
                        throw Error("sample has no gt affines for the oracle matcher");
                    auto affines = load_gt_affines(manifest.resolve(s.gt_affines_path));
                    auto mask_copy = std::make_shared<LabelMask>(mask);
                    auto affines_copy =
                        std::make_shared<std::vector<AffineTransform>>(std::move(affines));
                    matcher = std::make_unique<OracleMatcher>(
                        [mask_copy, affines_copy](Vec2 q) -> std::optional<Vec2> {
                            int x = static_cast<int>(q.x), y = static_cast<int>(q.y);
                            if (x < 0 || y < 0 || x >= mask_copy->width() ||
                                y >= mask_copy->height())
                                return std::nullopt;
                            uint32_t inst = mask_copy->instance(x, y);
                            if (inst == 0 || inst > affines_copy->size())
                                return std::nullopt;
                            return (*affines_copy)[inst - 1].apply(q);
                        });
                } else {
                    throw Error("unknown matcher: " + opt.matcher);
                }
                TransferResult res =
                    transfer_mask(src_gray, tgt_gray, mask, *matcher, opt.transfer_cfg);
                out_mask = std::move(res.mask);
                report = std::move(res.report);
            }

            write_mask_png(out / "masks" / (s.id + ".png"), out_mask);
            rec.add(out / "masks" / (s.id + ".png"));
            write_text_file(out / "reports" / (s.id + ".json"),
                            transfer_report_json(report, s.id));
            rec.add(out / "reports" / (s.id + ".json"));
            ++status.processed;
        } catch (const Error& e) {
            status.fail(s.id, e.what());
        }
    }
    rec.write("transfer");
    status.print("transfer");
    return status.exit_code();
}

// ---- evaluate / report ----

int cmd_evaluate(const fs::path& manifest_path, const fs::path& pred_dir,
                 const fs::path& gt_dir, const std::string& method,
                 const std::string& format, const fs::path& out) {
    DatasetManifest manifest = load_manifest(manifest_path);
    DatasetEvaluator eval(taxonomy_ids(manifest));

    int attempted = 0;
    for (const auto& s : manifest.samples) {
        fs::path pred = pred_dir / (s.id + ".png");
        if (!fs::exists(pred)) pred = pred_dir / "masks" / (s.id + ".png");
        fs::path gt = gt_dir.empty() ? manifest.resolve(s.gt_target_mask_path)
                                     : gt_dir / (s.id + ".png");
        ++attempted;
        if (!fs::exists(pred) || (s.gt_target_mask_path.empty() && gt_dir.empty())) {
            eval.add_skipped(s.id);
            continue;
        }
        if (!fs::exists(gt)) {
            eval.add_skipped(s.id);
            continue;
        }
        eval.add(s.id, read_mask_png(pred), read_mask_png(gt));
    }

    EvalReport report = eval.report(method);
    std::string table = render_report_table({report}, manifest.taxonomy);
    std::string json_text = eval_report_json(report, manifest.taxonomy);
    if (format == "table")
        std::cout << table;
    else
        std::cout << json_text;
    if (!report.skipped.empty())
        std::cout << "skipped " << report.skipped.size() << " samples without masks\n";

    if (!out.empty()) {
        fs::create_directories(out);
        write_text_file(out / "eval_report.json", json_text);
        write_text_file(out / "eval_report.txt", table);
        RunRecorder rec;
        rec.out_dir = out;
        rec.config = {{"method", method}, {"pred", pred_dir.string()},
                      {"gt", gt_dir.string()}};
        rec.add(out / "eval_report.json");
        rec.add(out / "eval_report.txt");
        rec.write("evaluate");
    }
    return attempted > 0 && report.samples.empty() ? 1 : 0;
}

int cmd_report(const std::vector<fs::path>& inputs, const std::string& format,
               const fs::path& out) {
    std::vector<EvalReport> reports;
    for (const auto& p : inputs) reports.push_back(eval_report_from_json(read_text_file(p)));
    std::string table = render_report_table(reports);
    if (format == "table") {
        std::cout << table;
    } else {
        json combined = json::array();
        for (size_t i = 0; i < reports.size(); ++i)
            combined.push_back(json::parse(eval_report_json(reports[i])));
        std::cout << combined.dump(2) << "\n";
    }
    if (!out.empty()) {
        fs::create_directories(out);
        write_text_file(out / "combined_report.txt", table);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multimodal waste-sorting pipeline: synthetic rig, preprocessing, "
                 "PCA reduction, cross-modal label transfer and evaluation"};
    app.require_subcommand(1);

    // Config file values become the flag defaults, so explicit flags override.
    FileConfig file_cfg;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                load_file_config(argv[i + 1], file_cfg);
            } catch (const std::exception& e) {
                std::cerr << json{{"error", e.what()}}.dump() << "\n";
                return 1;
            }
        }
    }
    std::string config_path;
    app.add_option("--config", config_path, "versioned config file (slt-config/1)");

    int threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = library default)");
    app.fallthrough();  // --config/--threads may follow the subcommand name

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dual-camera dataset");
    fs::path synth_out;
    int scenes = 10;
    uint64_t seed = 1;
    SceneConfig scfg = file_cfg.synth;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--scenes", scenes, "number of scenes");
    synth->add_option("--seed", seed, "base seed");
    synth->add_option("--bands", scfg.bands, "spectral bands");
    synth->add_option("--rgb-width", scfg.rgb_w, "rgb frame width");
    synth->add_option("--rgb-height", scfg.rgb_h, "rgb frame height");
    synth->add_option("--hsi-width", scfg.hsi_w, "hsi frame width");
    synth->add_option("--hsi-height", scfg.hsi_h, "hsi frame height");
    synth->add_option("--ensure-ribbon-prob", scfg.ensure_ribbon_prob,
                      "chance to add a ribbon when none was drawn");
    synth->add_option("--image-noise", scfg.image_noise, "rgb noise sigma (u8)");
    synth->add_option("--spectral-noise", scfg.spectral_noise, "cube noise sigma (u16)");
    synth->add_option("--projective-eps", scfg.projective_eps,
                      "projective hard-mode strength (0 = affine rig)");
    synth->add_option("--min-objects", scfg.min_objects, "objects per scene, lower bound");
    synth->add_option("--max-objects", scfg.max_objects, "objects per scene, upper bound");

    // preprocess
    auto* prep = app.add_subcommand("preprocess", "crop, resize and normalize samples");
    fs::path prep_manifest, prep_out;
    PreprocessConfig pcfg = file_cfg.preprocess;
    std::vector<int> rgb_crop, cube_crop;
    prep->add_option("--manifest", prep_manifest, "dataset manifest")->required();
    prep->add_option("--out", prep_out, "output directory")->required();
    prep->add_option("--target-width", pcfg.target_w, "target width");
    prep->add_option("--target-height", pcfg.target_h, "target height");
    prep->add_option("--rgb-crop", rgb_crop, "rgb crop rectangle x y w h")->expected(4);
    prep->add_option("--cube-crop", cube_crop, "cube crop rectangle x y w h")->expected(4);

    // pca-fit
    auto* fit = app.add_subcommand("pca-fit", "fit the spectral PCA model");
    fs::path fit_manifest, fit_out;
    std::string fit_split = "train";
    int fit_k = file_cfg.pca_k;
    size_t fit_pixels = file_cfg.pca_max_pixels;
    uint64_t fit_seed = file_cfg.pca_seed;
    fit->add_option("--manifest", fit_manifest, "dataset manifest")->required();
    fit->add_option("--out", fit_out, "output directory")->required();
    fit->add_option("--split", fit_split, "split to fit on (train|val|test|all)");
    fit->add_option("--k", fit_k, "number of components");
    fit->add_option("--max-pixels", fit_pixels, "pixel sample cap");
    fit->add_option("--seed", fit_seed, "subsample seed");

    // pca-apply
    auto* apply = app.add_subcommand("pca-apply", "project cubes through a PCA model");
    fs::path apply_manifest, apply_out, apply_model;
    bool apply_fc = false;
    apply->add_option("--manifest", apply_manifest, "dataset manifest")->required();
    apply->add_option("--out", apply_out, "output directory")->required();
    apply->add_option("--model", apply_model, "PCA model JSON")->required();
    apply->add_flag("--false-color", apply_fc, "also write stretched PNG previews");

    // transfer
    auto* xfer = app.add_subcommand("transfer", "transfer rgb annotations to the hsi frame");
    fs::path xfer_manifest, xfer_out;
    TransferCliOptions xopt;
    xopt.matcher_cfg = file_cfg.matcher;
    xopt.transfer_cfg = file_cfg.transfer;
    std::string fallback =
        file_cfg.transfer.fallback == FallbackPolicy::drop_component ? "drop" : "keep";
    xfer->add_option("--manifest", xfer_manifest, "dataset manifest")->required();
    xfer->add_option("--out", xfer_out, "output directory")->required();
    xfer->add_option("--matcher", xopt.matcher, "ncc | file | oracle | ma");
    xfer->add_option("--matches", xopt.matches_file, "correspondence file for --matcher file");
    xfer->add_option("--hsi-projection", xopt.hsi_projection,
                     "single-channel hsi rendering: mean | pca");
    xfer->add_option("--pca-model", xopt.pca_model, "model for --hsi-projection pca");
    xfer->add_option("--points", xopt.transfer_cfg.points_per_contour,
                     "control points per contour");
    xfer->add_option("--min-matches", xopt.transfer_cfg.min_matches,
                     "matches required before fitting");
    xfer->add_option("--fallback", fallback, "keep | drop");
    xfer->add_option("--window-radius", xopt.matcher_cfg.window_radius, "ncc window radius");
    xfer->add_option("--search-radius", xopt.matcher_cfg.search_radius, "ncc search radius");
    xfer->add_option("--min-confidence", xopt.matcher_cfg.min_confidence,
                     "confidence gate for matches");
    xfer->add_option("--target-width", xopt.target_w, "override target frame width");
    xfer->add_option("--target-height", xopt.target_h, "override target frame height");
    bool use_ransac = file_cfg.transfer.fit.use_ransac;
    xfer->add_flag("--ransac", use_ransac, "robust-fit the per-component affines");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "score predicted masks against ground truth");
    fs::path ev_manifest, ev_pred, ev_gt, ev_out;
    std::string ev_method = "LT", ev_format = "table";
    ev->add_option("--manifest", ev_manifest, "dataset manifest")->required();
    ev->add_option("--pred", ev_pred, "directory of predicted masks")->required();
    ev->add_option("--gt,--gt-dir", ev_gt, "ground-truth mask directory (default: manifest)");
    ev->add_option("--method", ev_method, "method label for the report row");
    ev->add_option("--format", ev_format, "table | json");
    ev->add_option("--out", ev_out, "directory for report artifacts");

    // report
    auto* rep = app.add_subcommand("report", "combine stored evaluation reports");
    std::vector<fs::path> rep_inputs;
    std::string rep_format = "table";
    fs::path rep_out;
    rep->add_option("--inputs", rep_inputs, "eval report JSON files")->required();
    rep->add_option("--format", rep_format, "table | json");
    rep->add_option("--out", rep_out, "directory for the combined table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage errors exit 2, --help exits 0
    }

    if (threads > 0) omp_set_num_threads(threads);

    try {
        if (*synth) return cmd_synth(resolve_out(synth_out), scenes, seed, scfg);
        if (*prep) {
            if (rgb_crop.size() == 4)
                pcfg.rgb_crop = Rect{rgb_crop[0], rgb_crop[1], rgb_crop[2], rgb_crop[3]};
            if (cube_crop.size() == 4)
                pcfg.cube_crop = Rect{cube_crop[0], cube_crop[1], cube_crop[2], cube_crop[3]};
            return cmd_preprocess(prep_manifest, resolve_out(prep_out), pcfg);
        }
        if (*fit)
            return cmd_pca_fit(fit_manifest, resolve_out(fit_out), fit_split, fit_k,
                               fit_pixels, fit_seed);
        if (*apply)
            return cmd_pca_apply(apply_manifest, resolve_out(apply_out), apply_model,
                                 apply_fc);
        if (*xfer) {
            xopt.transfer_cfg.fallback = fallback == "drop"
                                             ? FallbackPolicy::drop_component
                                             : FallbackPolicy::keep_resized_original;
            xopt.transfer_cfg.fit.use_ransac = use_ransac;
            if (xopt.target_w > 0 && xopt.target_h == 0) xopt.target_h = xopt.target_w;
            return cmd_transfer(xfer_manifest, resolve_out(xfer_out), xopt);
        }
        if (*ev)
            return cmd_evaluate(ev_manifest, ev_pred, ev_gt, ev_method, ev_format,
                                resolve_out(ev_out));
        if (*rep) return cmd_report(rep_inputs, rep_format, resolve_out(rep_out));
    } catch (const std::exception& e) {
        json err{{"error", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
