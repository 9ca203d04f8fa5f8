#include "slt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "slt/errors.hpp"

namespace slt {

std::map<int, std::optional<double>> iou_per_class(const LabelMask& pred,
                                                   const LabelMask& gt,
                                                   const std::vector<int>& classes) {
    if (!pred.same_shape(gt)) throw ShapeMismatch("iou_per_class: mask shapes differ");

    std::map<int, uint64_t> inter, uni;
    for (int c : classes) inter[c] = uni[c] = 0;

    const auto& p = pred.class_ids();
    const auto& g = gt.class_ids();
    for (size_t i = 0; i < p.size(); ++i) {
        if (p[i] == g[i]) {
            auto it = inter.find(p[i]);
            if (it != inter.end()) {
                ++it->second;
                ++uni[p[i]];
            }
        } else {
            auto ip = uni.find(p[i]);
            if (ip != uni.end()) ++ip->second;
            auto ig = uni.find(g[i]);
            if (ig != uni.end()) ++ig->second;
        }
    }

    std::map<int, std::optional<double>> out;
    for (int c : classes) {
        if (uni[c] == 0)
            out[c] = std::nullopt;
        else
            out[c] = static_cast<double>(inter[c]) / static_cast<double>(uni[c]);
    }
    return out;
}

double miou(const std::map<int, std::optional<double>>& per_class) {
    double sum = 0.0;
    int n = 0;
    for (const auto& [cls, iou] : per_class) {
        if (!iou) continue;
        sum += *iou;
        ++n;
    }
    if (n == 0) throw DegenerateData("miou: no present classes");
    return sum / n;
}

DatasetEvaluator::DatasetEvaluator(std::vector<int> class_ids)
    : class_ids_(std::move(class_ids)) {
    for (int c : class_ids_) intersection_[c] = union_[c] = gt_pixels_[c] = 0;
}

void DatasetEvaluator::add(const std::string& sample_id, const LabelMask& pred,
                           const LabelMask& gt) {
    if (!pred.same_shape(gt)) throw ShapeMismatch("evaluate: mask shapes differ");
    const auto& p = pred.class_ids();
    const auto& g = gt.class_ids();
    std::map<int, uint64_t> inter, uni;
    for (int c : class_ids_) inter[c] = uni[c] = 0;
    for (size_t i = 0; i < p.size(); ++i) {
        if (g[i] != 0) {
            auto it = gt_pixels_.find(g[i]);
            if (it != gt_pixels_.end()) ++it->second;
        }
        if (p[i] == g[i]) {
            auto it = inter.find(p[i]);
            if (it != inter.end()) {
                ++it->second;
                ++uni[p[i]];
            }
        } else {
            auto ip = uni.find(p[i]);
            if (ip != uni.end()) ++ip->second;
            auto ig = uni.find(g[i]);
            if (ig != uni.end()) ++ig->second;
        }
    }

    PerSampleScore score;
    score.id = sample_id;
    double sum = 0.0;
    int n = 0;
    for (int c : class_ids_) {
        intersection_[c] += inter[c];
        union_[c] += uni[c];
        if (uni[c] == 0) {
            score.iou[c] = std::nullopt;
        } else {
            double v = static_cast<double>(inter[c]) / static_cast<double>(uni[c]);
            score.iou[c] = v;
            sum += v;
            ++n;
        }
    }
    score.miou = n > 0 ? sum / n : 0.0;
    samples_.push_back(std::move(score));
}

void DatasetEvaluator::add_skipped(const std::string& sample_id) {
    skipped_.push_back(sample_id);
}

EvalReport DatasetEvaluator::report(const std::string& method_label) const {
    EvalReport rep;
    rep.method_label = method_label;
    rep.class_ids = class_ids_;
    rep.gt_pixels = gt_pixels_;
    rep.samples = samples_;
    rep.skipped = skipped_;
    double sum = 0.0;
    int n = 0;
    for (int c : class_ids_) {
        uint64_t u = union_.at(c);
        if (u == 0) {
            rep.per_class[c] = std::nullopt;
        } else {
            double v = static_cast<double>(intersection_.at(c)) / static_cast<double>(u);
            rep.per_class[c] = v;
            sum += v;
            ++n;
        }
    }
    rep.miou = n > 0 ? sum / n : 0.0;
    return rep;
}

MedianFreqResult median_freq_weights_from_freqs(const std::map<int, double>& freqs) {
    MedianFreqResult res;
    std::vector<double> present;
    for (const auto& [cls, f] : freqs) {
        if (f > 0.0)
            present.push_back(f);
        else
            res.excluded.push_back(cls);
    }
    if (present.empty()) throw DegenerateData("median_freq_weights: no labeled pixels");

    std::sort(present.begin(), present.end());
    double median;
    size_t m = present.size();
    if (m % 2 == 1)
        median = present[m / 2];
    else
        median = 0.5 * (present[m / 2 - 1] + present[m / 2]);

    for (const auto& [cls, f] : freqs) {
        if (f <= 0.0) continue;
        res.weights[cls] = ClassWeight{f, median / f};
    }
    return res;
}

MedianFreqResult median_freq_weights(const std::vector<const LabelMask*>& masks,
                                     const std::vector<int>& classes) {
    // freq_c = (pixels of c) / (total pixels of images containing c).
    std::map<int, uint64_t> class_pixels;
    std::map<int, uint64_t> containing_pixels;
    for (int c : classes) class_pixels[c] = containing_pixels[c] = 0;

    for (const LabelMask* mask : masks) {
        std::map<int, uint64_t> counts;
        for (uint8_t v : mask->class_ids())
            if (v != 0) ++counts[v];
        for (const auto& [cls, cnt] : counts) {
            auto it = class_pixels.find(cls);
            if (it == class_pixels.end()) continue;
            it->second += cnt;
            containing_pixels[cls] += mask->pixel_count();
        }
    }

    std::map<int, double> freqs;
    for (int c : classes)
        freqs[c] = containing_pixels[c] > 0
                       ? static_cast<double>(class_pixels[c]) /
                             static_cast<double>(containing_pixels[c])
                       : 0.0;
    return median_freq_weights_from_freqs(freqs);
}

std::string render_report_table(const std::vector<EvalReport>& reports,
                                const std::vector<ClassInfo>& taxonomy) {
    std::vector<int> class_ids;
    if (!reports.empty())
        class_ids = reports.front().class_ids;
    else
        for (const auto& c : taxonomy) class_ids.push_back(c.id);

    std::vector<std::string> headers{"Method"};
    for (int c : class_ids) headers.push_back(class_name_by_id(taxonomy, c));
    headers.push_back("mIoU");

    auto fmt = [](std::optional<double> v) -> std::string {
        if (!v) return "-";
        std::ostringstream os;
        os << std::fixed << std::setprecision(1) << (*v * 100.0);
        return os.str();
    };

    std::vector<std::vector<std::string>> rows;
    for (const auto& rep : reports) {
        std::vector<std::string> row{rep.method_label};
        for (int c : class_ids) row.push_back(fmt(rep.per_class.at(c)));
        row.push_back(fmt(rep.miou));
        rows.push_back(std::move(row));
    }

    std::vector<size_t> width(headers.size());
    for (size_t i = 0; i < headers.size(); ++i) width[i] = headers[i].size();
    for (const auto& row : rows)
        for (size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());

    std::ostringstream out;
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << "  ";
            if (i == 0)
                out << std::left << std::setw(static_cast<int>(width[i])) << row[i];
            else
                out << std::right << std::setw(static_cast<int>(width[i])) << row[i];
        }
        out << "\n";
    };
    emit_row(headers);
    size_t total = 0;
    for (size_t i = 0; i < width.size(); ++i) total += width[i] + (i ? 2 : 0);
    out << std::string(total, '-') << "\n";
    for (const auto& row : rows) emit_row(row);
    return out.str();
}

std::string eval_report_json(const EvalReport& report,
                             const std::vector<ClassInfo>& taxonomy) {
    nlohmann::json per_class = nlohmann::json::object();
    for (int c : report.class_ids) {
        const auto& v = report.per_class.at(c);
        nlohmann::json entry{{"class_id", c},
                             {"gt_pixels", report.gt_pixels.count(c) ? report.gt_pixels.at(c) : 0}};
        if (v)
            entry["iou"] = *v;
        else
            entry["iou"] = nullptr;
        per_class[class_name_by_id(taxonomy, c)] = std::move(entry);
    }
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : report.samples) {
        nlohmann::json iou = nlohmann::json::object();
        for (const auto& [cls, v] : s.iou) {
            if (v)
                iou[class_name_by_id(taxonomy, cls)] = *v;
            else
                iou[class_name_by_id(taxonomy, cls)] = nullptr;
        }
        samples.push_back({{"id", s.id}, {"iou", iou}, {"miou", s.miou}});
    }
    nlohmann::json doc{{"schema", "eval-report/1"},
                       {"method", report.method_label},
                       {"class_order", report.class_ids},
                       {"per_class", per_class},
                       {"miou", report.miou},
                       {"samples", samples},
                       {"skipped", report.skipped}};
    return doc.dump(2) + "\n";
}

EvalReport eval_report_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad eval report: ") + e.what());
    }
    EvalReport rep;
    try {
        if (doc.at("schema").get<std::string>() != "eval-report/1")
            throw ParseError("unsupported eval report schema");
        rep.method_label = doc.at("method").get<std::string>();
        rep.class_ids = doc.at("class_order").get<std::vector<int>>();
        rep.miou = doc.at("miou").get<double>();
        for (const auto& [name, entry] : doc.at("per_class").items()) {
            int cls = entry.at("class_id").get<int>();
            if (entry.at("iou").is_null())
                rep.per_class[cls] = std::nullopt;
            else
                rep.per_class[cls] = entry.at("iou").get<double>();
            rep.gt_pixels[cls] = entry.value("gt_pixels", 0ull);
        }
        if (doc.contains("skipped"))
            rep.skipped = doc.at("skipped").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad eval report: ") + e.what());
    }
    return rep;
}

}  // namespace slt
