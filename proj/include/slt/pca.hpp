#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "slt/types.hpp"

namespace slt {

// Rank-k linear spectral reduction. Component rows are orthonormal; the sign
// convention (largest-magnitude entry positive) makes models reproducible.
struct PcaModel {
    int source_band_count = 0;
    int k = 0;
    std::vector<double> mean;                      // C
    std::vector<double> components;                // k x C, row-major
    std::vector<double> explained_variance_ratio;  // k, non-increasing

    double component(int row, int band) const {
        return components[static_cast<size_t>(row) * source_band_count + band];
    }
    double evr_sum() const;
};

// Column mean and covariance of an N x C sample matrix (row-major floats).
// Accumulated in fixed-size blocks so results do not depend on thread count.
struct CovarianceResult {
    std::vector<double> mean;        // C
    std::vector<double> covariance;  // C x C, row-major
    size_t count = 0;
};
CovarianceResult sample_covariance(const float* pixels, size_t n, int c);

// Eigendecomposition of the sample covariance; throws DegenerateData when the
// covariance is zero (all-identical pixels) and BadRank when k is out of range.
PcaModel pca_fit(const float* pixels, size_t n, int c, int k);
PcaModel pca_fit(const std::vector<float>& pixels, int c, int k);

// Fits on a uniformly subsampled pixel set from an interleaved float cube
// (seeded stride offset, at most max_pixels spectra).
PcaModel pca_fit_cube(const RasterImage& cube, int k, size_t max_pixels = 1000000,
                      uint64_t seed = 0);

// Per-pixel projection (spectrum - mean) . components^T.
RasterImage pca_apply(const RasterImage& cube, const PcaModel& model);
RasterImage pca_apply(const HyperCube& cube, const PcaModel& model,
                      double divisor = 65535.0);

// Inverse projection: components^T . y + mean. Exact reconstruction when k = C.
RasterImage pca_reconstruct(const RasterImage& projected, const PcaModel& model);

// Three raw bands, each min-max stretched to [0,1]; constant bands map to 0.
RasterImage false_color(const HyperCube& cube, int band_r, int band_g, int band_b);
RasterImage false_color(const RasterImage& cube, int band_r, int band_g, int band_b);

// Versioned JSON serialization ("pca-model/1").
void save_pca_model(const std::filesystem::path& path, const PcaModel& model);
PcaModel load_pca_model(const std::filesystem::path& path);

}  // namespace slt
