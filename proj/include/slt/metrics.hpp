#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slt/types.hpp"

namespace slt {

// Per-class intersection over union. Classes whose union is empty in both
// masks come back absent (excluded from means, not scored zero).
std::map<int, std::optional<double>> iou_per_class(const LabelMask& pred,
                                                   const LabelMask& gt,
                                                   const std::vector<int>& classes);

// Unweighted mean over present classes; throws DegenerateData when none are.
double miou(const std::map<int, std::optional<double>>& per_class);

struct PerSampleScore {
    std::string id;
    std::map<int, std::optional<double>> iou;
    double miou = 0.0;
};

struct EvalReport {
    std::string method_label;
    std::vector<int> class_ids;                    // reporting order
    std::map<int, std::optional<double>> per_class;  // dataset-level IoU
    double miou = 0.0;
    std::map<int, uint64_t> gt_pixels;
    std::vector<PerSampleScore> samples;
    std::vector<std::string> skipped;  // sample ids without predictions
};

// Streaming evaluator: dataset-level IoU comes from intersection/union sums
// aggregated over all samples, not from averaging per-image scores.
class DatasetEvaluator {
public:
    explicit DatasetEvaluator(std::vector<int> class_ids);
    void add(const std::string& sample_id, const LabelMask& pred, const LabelMask& gt);
    void add_skipped(const std::string& sample_id);
    EvalReport report(const std::string& method_label) const;

private:
    std::vector<int> class_ids_;
    std::map<int, uint64_t> intersection_;
    std::map<int, uint64_t> union_;
    std::map<int, uint64_t> gt_pixels_;
    std::vector<PerSampleScore> samples_;
    std::vector<std::string> skipped_;
};

struct ClassWeight {
    double frequency = 0.0;  // pixels of c / pixels of images containing c
    double weight = 0.0;     // median(freq) / freq
};

struct MedianFreqResult {
    std::map<int, ClassWeight> weights;
    std::vector<int> excluded;  // classes with zero pixels in the split
};

// Median pixel-level frequency balancing over a set of ground-truth masks.
MedianFreqResult median_freq_weights(const std::vector<const LabelMask*>& masks,
                                     const std::vector<int>& classes);
MedianFreqResult median_freq_weights_from_freqs(const std::map<int, double>& freqs);

// Rendering: aligned text table in the reporting column order, and JSON
// ("eval-report/1"). Multiple reports render as one table, one row per method.
std::string render_report_table(const std::vector<EvalReport>& reports,
                                const std::vector<ClassInfo>& taxonomy = default_taxonomy());
std::string eval_report_json(const EvalReport& report,
                             const std::vector<ClassInfo>& taxonomy = default_taxonomy());
EvalReport eval_report_from_json(const std::string& text);

}  // namespace slt
