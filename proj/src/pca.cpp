#include "slt/pca.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "slt/errors.hpp"
#include "slt/io.hpp"
#include "slt/rng.hpp"

namespace slt {

namespace {

constexpr size_t kCovBlock = 16384;  // pixels per reduction block

}  // namespace

double PcaModel::evr_sum() const {
    return std::accumulate(explained_variance_ratio.begin(), explained_variance_ratio.end(),
                           0.0);
}

CovarianceResult sample_covariance(const float* pixels, size_t n, int c) {
    if (n == 0 || c <= 0) throw DegenerateData("sample_covariance: empty sample");

    const size_t blocks = (n + kCovBlock - 1) / kCovBlock;
    const int64_t nb = static_cast<int64_t>(blocks);

    // Pass 1: mean. Block partials are merged in index order so the result is
    // independent of the number of threads.
    std::vector<std::vector<double>> mean_parts(blocks, std::vector<double>(c, 0.0));
#pragma omp parallel for schedule(static)
    for (int64_t bi = 0; bi < nb; ++bi) {
        size_t lo = bi * kCovBlock, hi = std::min(n, lo + kCovBlock);
        double* acc = mean_parts[bi].data();
        for (size_t i = lo; i < hi; ++i) {
            const float* row = pixels + i * c;
            for (int j = 0; j < c; ++j) acc[j] += row[j];
        }
    }
    std::vector<double> mean(c, 0.0);
    for (size_t bi = 0; bi < blocks; ++bi)
        for (int j = 0; j < c; ++j) mean[j] += mean_parts[bi][j];
    for (int j = 0; j < c; ++j) mean[j] /= static_cast<double>(n);

    // Pass 2: centered scatter, upper triangle per block.
    const size_t tri = static_cast<size_t>(c) * (c + 1) / 2;
    std::vector<std::vector<double>> cov_parts(blocks);
#pragma omp parallel
    {
        std::vector<double> centered(c);
#pragma omp for schedule(static)
        for (int64_t bi = 0; bi < nb; ++bi) {
            cov_parts[bi].assign(tri, 0.0);
            double* acc = cov_parts[bi].data();
            size_t lo = bi * kCovBlock, hi = std::min(n, lo + kCovBlock);
            for (size_t i = lo; i < hi; ++i) {
                const float* row = pixels + i * c;
                for (int j = 0; j < c; ++j) centered[j] = row[j] - mean[j];
                size_t t = 0;
                for (int j = 0; j < c; ++j) {
                    const double vj = centered[j];
                    for (int l = j; l < c; ++l) acc[t++] += vj * centered[l];
                }
            }
        }
    }

    std::vector<double> scatter(tri, 0.0);
    for (size_t bi = 0; bi < blocks; ++bi)
        for (size_t t = 0; t < tri; ++t) scatter[t] += cov_parts[bi][t];

    CovarianceResult res;
    res.mean = std::move(mean);
    res.count = n;
    res.covariance.assign(static_cast<size_t>(c) * c, 0.0);
    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    size_t t = 0;
    for (int j = 0; j < c; ++j) {
        for (int l = j; l < c; ++l) {
            double v = scatter[t++] / denom;
            res.covariance[static_cast<size_t>(j) * c + l] = v;
            res.covariance[static_cast<size_t>(l) * c + j] = v;
        }
    }
    return res;
}

PcaModel pca_fit(const float* pixels, size_t n, int c, int k) {
    if (k < 1 || k > c)
        throw BadRank("pca_fit: k must be in [1, band count], got k=" + std::to_string(k) +
                      " with " + std::to_string(c) + " bands");
    if (n <= static_cast<size_t>(k))
        throw DegenerateData("pca_fit: need more samples than components");

    CovarianceResult cov = sample_covariance(pixels, n, c);

    Eigen::Map<const Eigen::MatrixXd> covm(cov.covariance.data(), c, c);
    double trace = covm.trace();
    if (!(trace > 0.0))
        throw DegenerateData("pca_fit: zero covariance (all pixels identical)");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covm);
    if (solver.info() != Eigen::Success)
        throw DegenerateData("pca_fit: eigendecomposition failed");

    // Eigen returns ascending eigenvalues; take the top k, descending.
    PcaModel model;
    model.source_band_count = c;
    model.k = k;
    model.mean = cov.mean;
    model.components.resize(static_cast<size_t>(k) * c);
    model.explained_variance_ratio.resize(k);

    const auto& evals = solver.eigenvalues();
    const auto& evecs = solver.eigenvectors();
    double total = 0.0;
    for (int i = 0; i < c; ++i) total += std::max(0.0, evals[i]);
    for (int r = 0; r < k; ++r) {
        int src = c - 1 - r;
        Eigen::VectorXd v = evecs.col(src);
        // Sign convention: largest-magnitude entry positive.
        int arg = 0;
        for (int i = 1; i < c; ++i)
            if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
        if (v[arg] < 0.0) v = -v;
        for (int i = 0; i < c; ++i)
            model.components[static_cast<size_t>(r) * c + i] = v[i];
        model.explained_variance_ratio[r] =
            total > 0.0 ? std::max(0.0, evals[src]) / total : 0.0;
    }
    return model;
}

PcaModel pca_fit(const std::vector<float>& pixels, int c, int k) {
    if (c <= 0 || pixels.size() % c != 0)
        throw ShapeMismatch("pca_fit: pixel buffer is not a multiple of the band count");
    return pca_fit(pixels.data(), pixels.size() / c, c, k);
}

PcaModel pca_fit_cube(const RasterImage& cube, int k, size_t max_pixels, uint64_t seed) {
    const size_t n = cube.pixel_count();
    const int c = cube.channels();
    if (n == 0) throw DegenerateData("pca_fit_cube: empty cube");
    if (n <= max_pixels) return pca_fit(cube.data().data(), n, c, k);

    // Uniform stride subsample with a seeded phase.
    const size_t stride = n / max_pixels + (n % max_pixels ? 1 : 0);
    Rng rng(seed);
    const size_t phase = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(stride) - 1));
    std::vector<float> sample;
    sample.reserve((n / stride + 1) * c);
    for (size_t i = phase; i < n; i += stride) {
        const float* row = cube.data().data() + i * c;
        sample.insert(sample.end(), row, row + c);
    }
    return pca_fit(sample.data(), sample.size() / c, c, k);
}

RasterImage pca_apply(const RasterImage& cube, const PcaModel& model) {
    if (cube.channels() != model.source_band_count)
        throw ShapeMismatch("pca_apply: cube has " + std::to_string(cube.channels()) +
                            " bands, model expects " +
                            std::to_string(model.source_band_count));
    const int c = model.source_band_count, k = model.k;
    RasterImage out(cube.width(), cube.height(), k, ValueRange::unit_float);
    const int64_t npix = static_cast<int64_t>(cube.pixel_count());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < npix; ++i) {
        const float* px = cube.data().data() + i * c;
        float* dst = out.data().data() + i * k;
        for (int r = 0; r < k; ++r) {
            const double* comp = model.components.data() + static_cast<size_t>(r) * c;
            double acc = 0.0;
            for (int j = 0; j < c; ++j) acc += (px[j] - model.mean[j]) * comp[j];
            dst[r] = static_cast<float>(acc);
        }
    }
    return out;
}

RasterImage pca_apply(const HyperCube& cube, const PcaModel& model, double divisor) {
    if (cube.bands() != model.source_band_count)
        throw ShapeMismatch("pca_apply: cube has " + std::to_string(cube.bands()) +
                            " bands, model expects " +
                            std::to_string(model.source_band_count));
    const int c = model.source_band_count, k = model.k;
    const int w = cube.width(), h = cube.height();
    const double inv = 1.0 / divisor;
    RasterImage out(w, h, k, ValueRange::unit_float);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float* dst = out.pixel(x, y);
            for (int r = 0; r < k; ++r) {
                const double* comp = model.components.data() + static_cast<size_t>(r) * c;
                double acc = 0.0;
                for (int j = 0; j < c; ++j)
                    acc += (cube.at(x, y, j) * inv - model.mean[j]) * comp[j];
                dst[r] = static_cast<float>(acc);
            }
        }
    }
    return out;
}

RasterImage pca_reconstruct(const RasterImage& projected, const PcaModel& model) {
    if (projected.channels() != model.k)
        throw ShapeMismatch("pca_reconstruct: channel count does not match model rank");
    const int c = model.source_band_count, k = model.k;
    RasterImage out(projected.width(), projected.height(), c, ValueRange::unit_float);
    const int64_t npix = static_cast<int64_t>(projected.pixel_count());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < npix; ++i) {
        const float* y = projected.data().data() + i * k;
        float* dst = out.data().data() + i * c;
        for (int j = 0; j < c; ++j) {
            double acc = model.mean[j];
            for (int r = 0; r < k; ++r)
                acc += y[r] * model.components[static_cast<size_t>(r) * c + j];
            dst[j] = static_cast<float>(acc);
        }
    }
    return out;
}

namespace {

template <typename GetBand>
RasterImage false_color_impl(int w, int h, int nbands, GetBand get, int br, int bg, int bb) {
    for (int b : {br, bg, bb})
        if (b < 0 || b >= nbands)
            throw BadQuery("false_color: band index " + std::to_string(b) + " out of range");

    RasterImage out(w, h, 3, ValueRange::unit_float);
    const int bands[3] = {br, bg, bb};
    for (int ci = 0; ci < 3; ++ci) {
        const int b = bands[ci];
        double lo = std::numeric_limits<double>::max();
        double hi = std::numeric_limits<double>::lowest();
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double v = get(x, y, b);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        const double span = hi - lo;
#pragma omp parallel for schedule(static)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out.at(x, y, ci) =
                    span > 0.0 ? static_cast<float>((get(x, y, b) - lo) / span) : 0.0f;
    }
    return out;
}

}  // namespace

RasterImage false_color(const HyperCube& cube, int br, int bg, int bb) {
    return false_color_impl(
        cube.width(), cube.height(), cube.bands(),
        [&](int x, int y, int b) { return static_cast<double>(cube.at(x, y, b)); }, br, bg,
        bb);
}

RasterImage false_color(const RasterImage& cube, int br, int bg, int bb) {
    return false_color_impl(
        cube.width(), cube.height(), cube.channels(),
        [&](int x, int y, int b) { return static_cast<double>(cube.at(x, y, b)); }, br, bg,
        bb);
}

void save_pca_model(const std::filesystem::path& path, const PcaModel& model) {
    nlohmann::json comps = nlohmann::json::array();
    for (int r = 0; r < model.k; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < model.source_band_count; ++j) row.push_back(model.component(r, j));
        comps.push_back(std::move(row));
    }
    nlohmann::json doc{{"schema", "pca-model/1"},
                       {"bands", model.source_band_count},
                       {"k", model.k},
                       {"mean", model.mean},
                       {"components", comps},
                       {"explained_variance_ratio", model.explained_variance_ratio}};
    write_text_file(path, doc.dump(2) + "\n");
}

PcaModel load_pca_model(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("bad PCA model " + path.string() + ": " + e.what());
    }
    PcaModel model;
    try {
        if (doc.at("schema").get<std::string>() != "pca-model/1")
            throw ParseError("unsupported PCA model schema in " + path.string());
        model.source_band_count = doc.at("bands").get<int>();
        model.k = doc.at("k").get<int>();
        model.mean = doc.at("mean").get<std::vector<double>>();
        model.explained_variance_ratio =
            doc.at("explained_variance_ratio").get<std::vector<double>>();
        for (const auto& row : doc.at("components"))
            for (const auto& v : row) model.components.push_back(v.get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("bad PCA model " + path.string() + ": " + e.what());
    }
    if (model.components.size() !=
        static_cast<size_t>(model.k) * model.source_band_count)
        throw ParseError("PCA model component matrix has wrong shape: " + path.string());
    return model;
}

}  // namespace slt
