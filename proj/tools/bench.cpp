// Times the OpenMP kernels against their serial reference twins.
// Usage: slt_bench [threads]

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "slt/geometry.hpp"
#include "slt/image_ops.hpp"
#include "slt/matching.hpp"
#include "slt/pca.hpp"
#include "slt/reference.hpp"
#include "slt/rng.hpp"

using namespace slt;

namespace {

double time_ms(const std::function<void()>& fn, int reps = 3) {
    double best = 1e30;
    for (int i = 0; i < reps; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void row(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-28s %10.2f ms %10.2f ms %8.2fx\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms);
}

RasterImage random_image(int w, int h, int ch, uint64_t seed) {
    Rng rng(seed);
    RasterImage img(w, h, ch, ValueRange::unit_float);
    for (auto& v : img.data()) v = static_cast<float>(rng.uniform());
    return img;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) omp_set_num_threads(std::stoi(argv[1]));
    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

    {
        RasterImage img = random_image(1200, 1184, 3, 1);
        double s = time_ms([&] { ref::resize_bilinear(img, 256, 256); });
        double p = time_ms([&] { resize_bilinear(img, 256, 256); });
        row("resize_bilinear 1200x1184x3", s, p);
    }
    {
        RasterImage cube = random_image(600, 640, 224, 2);
        double s = time_ms([&] { ref::resize_bilinear(cube, 256, 256); }, 1);
        double p = time_ms([&] { resize_bilinear(cube, 256, 256); }, 1);
        row("resize_bilinear 600x640x224", s, p);
    }
    {
        RasterImage cube = random_image(512, 512, 224, 3);
        double s = time_ms([&] { ref::sample_covariance(cube.data().data(),
                                                        cube.pixel_count(), 224); }, 1);
        double p = time_ms([&] { sample_covariance(cube.data().data(),
                                                   cube.pixel_count(), 224); }, 1);
        row("covariance 262k x 224", s, p);

        PcaModel model = pca_fit_cube(cube, 3, 50000, 0);
        double sa = time_ms([&] { ref::pca_apply(cube, model); });
        double pa = time_ms([&] { pca_apply(cube, model); });
        row("pca_apply 512x512 k=3", sa, pa);
    }
    {
        RasterImage src = random_image(256, 256, 1, 4);
        RasterImage tgt = src;
        MatcherConfig cfg;
        std::vector<Vec2> queries;
        Rng rng(5);
        for (int i = 0; i < 64; ++i)
            queries.push_back({rng.uniform(40, 216), rng.uniform(40, 216)});
        NccMatcher matcher(cfg);
        double s = time_ms(
            [&] {
                for (const auto& q : queries) ref::ncc_match_brute(src, tgt, q, cfg);
            },
            1);
        double p = time_ms([&] { matcher.match_points(src, tgt, queries); }, 1);
        row("ncc 64 queries 256x256", s, p);
    }
    {
        LabelMask mask(512, 512);
        for (int y = 0; y < 512; ++y)
            for (int x = 0; x < 512; ++x)
                if (std::hypot(x - 256, y - 256) <= 180) mask.cls(x, y) = 1;
        auto comps = connected_components(mask);
        AffineTransform t{1.1, 0.08, 20.0, -0.06, 0.93, -11.0};
        double s = time_ms([&] { ref::warp_component(comps[0], t, 512, 512); });
        double p = time_ms([&] { warp_component(comps[0], t, 512, 512); });
        row("warp_component r=180", s, p);
    }
    return 0;
}
