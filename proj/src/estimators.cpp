#include "jp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace jp {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

double pairwise_sum_rec(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_rec(v, half) + pairwise_sum_rec(v + half, n - half);
}

/**
 * Median-of-means driver: `blocks` block means of `batch` samples each, then
 * the median block. Sample values come from `draw`, one value per call.
 */
ScalarEstimate median_of_means(const std::function<double(GaussianSampler&)>& draw,
                               const EstimatorConfig& cfg, double range,
                               GaussianSampler& sampler) {
    const std::size_t blocks = cfg.resolved_blocks();
    const std::size_t batch = cfg.resolved_batch(range);
    std::vector<double> block_means(blocks);
    std::vector<double> buf(batch);
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t i = 0; i < batch; ++i) {
            buf[i] = draw(sampler);
            if (cfg.trace) cfg.trace->push_back(buf[i]);
        }
        block_means[b] = pairwise_sum(buf) / static_cast<double>(batch);
    }
    std::nth_element(block_means.begin(), block_means.begin() + blocks / 2, block_means.end());
    ScalarEstimate est;
    est.value = block_means[blocks / 2];
    est.samples_used = static_cast<std::uint64_t>(blocks) * batch;
    est.config = cfg;
    return est;
}

}  // namespace

void EstimatorConfig::validate() const {
    require(epsilon > 0.0, "EstimatorConfig: epsilon must be positive");
    require(delta > 0.0 && delta < 1.0, "EstimatorConfig: delta must be in (0,1)");
    require(t > 0.0, "EstimatorConfig: t must be positive");
    require(blocks == 0 || blocks % 2 == 1, "EstimatorConfig: blocks must be odd");
}

std::size_t EstimatorConfig::resolved_blocks() const {
    if (blocks != 0) return blocks;
    return 2 * static_cast<std::size_t>(std::ceil(18.0 * std::log(1.0 / delta))) + 1;
}

std::size_t EstimatorConfig::resolved_batch(double range) const {
    if (batch != 0) return batch;
    const double derived = std::ceil(2.0 * range * range / (epsilon * epsilon));
    // Saturate instead of hitting undefined double->integer overflow: derived
    // sizes beyond any feasible budget must still compare as "huge".
    constexpr double kMax = 9.0e18;
    if (!(derived < kMax)) return static_cast<std::size_t>(kMax);
    return static_cast<std::size_t>(derived);
}

double pairwise_sum(std::span<const double> v) { return pairwise_sum_rec(v.data(), v.size()); }

ScalarEstimate estimate_mean(const FunctionOracle& f, const EstimatorConfig& cfg,
                             GaussianSampler& sampler) {
    cfg.validate();
    const std::size_t n = f.dimension();
    std::vector<double> x(n);
    auto draw = [&](GaussianSampler& s) {
        s.point_into(x.data(), n);
        return f.evaluate(std::span<const double>(x));
    };
    return median_of_means(draw, cfg, 2.0, sampler);
}

ScalarEstimate estimate_pt(const FunctionOracle& f, double t, std::span<const double> x,
                           const EstimatorConfig& cfg, GaussianSampler& sampler) {
    cfg.validate();
    require(t > 0.0, "estimate_pt: t must be positive");
    const std::size_t n = f.dimension();
    const double rho = std::exp(-t);
    const double sig = std::sqrt(1.0 - rho * rho);
    std::vector<double> w(n);
    auto draw = [&](GaussianSampler& s) {
        for (std::size_t i = 0; i < n; ++i) w[i] = rho * x[i] + sig * s.normal();
        return f.evaluate(std::span<const double>(w));
    };
    return median_of_means(draw, cfg, 2.0, sampler);
}

ScalarEstimate estimate_degree1_eval(const FunctionOracle& f, double eta,
                                     std::span<const double> x, const EstimatorConfig& cfg,
                                     GaussianSampler& sampler) {
    cfg.validate();
    require(eta > 0.0 && eta < 1.0, "estimate_degree1_eval: eta must be in (0,1)");
    const std::size_t n = f.dimension();
    const double sig = std::sqrt(1.0 - eta * eta);
    std::vector<double> z(n), w(n);
    auto draw = [&](GaussianSampler& s) {
        s.point_into(z.data(), n);
        for (std::size_t i = 0; i < n; ++i) w[i] = eta * x[i] + sig * z[i];
        return (f.evaluate(std::span<const double>(w)) - f.evaluate(std::span<const double>(z))) /
               eta;
    };
    return median_of_means(draw, cfg, 2.0 / eta, sampler);
}

ScalarEstimate estimate_grad_inner(const FunctionOracle& f, double t,
                                   std::span<const double> y1, std::span<const double> y2,
                                   const EstimatorConfig& cfg, GaussianSampler& sampler) {
    cfg.validate();
    require(t > 0.0, "estimate_grad_inner: t must be positive");
    const std::size_t n = f.dimension();
    require(y1.size() == n && y2.size() == n, "estimate_grad_inner: anchor dimension mismatch");

    const double scale = std::exp(2.0 * t) - 1.0;  // e^{2t} - 1
    // Inner noise: e^{-t'} = epsilon (e^{2t}-1)/2, capped so t' stays positive.
    const double etap = std::min(0.5, cfg.epsilon * scale / 2.0);
    const double sigp = std::sqrt(1.0 - etap * etap);
    const double boost = 1.0 / (etap * etap);  // e^{2t'}

    const double rho = std::exp(-t);
    const double sig = std::sqrt(1.0 - rho * rho);
    // Shifted-function evaluation Fi(w) = f(e^{-t} y_i + sqrt(1-e^{-2t}) w).
    std::vector<double> arg(n);
    auto shifted = [&](std::span<const double> anchor, const std::vector<double>& w) {
        for (std::size_t i = 0; i < n; ++i) arg[i] = rho * anchor[i] + sig * w[i];
        return f.evaluate(std::span<const double>(arg));
    };

    // Each sample is symmetrized over the assignment of the two inner noise
    // draws to the two anchors, so swapping (y1, y2) with a shared seed
    // reproduces the exact same value.
    std::vector<double> x(n), y(n), z(n), mixed_y(n), mixed_z(n);
    auto draw = [&](GaussianSampler& s) {
        s.point_into(x.data(), n);
        s.point_into(y.data(), n);
        s.point_into(z.data(), n);
        for (std::size_t i = 0; i < n; ++i) {
            mixed_y[i] = etap * x[i] + sigp * y[i];
            mixed_z[i] = etap * x[i] + sigp * z[i];
        }
        const double j12 = (shifted(y1, mixed_y) - shifted(y1, y)) *
                           (shifted(y2, mixed_z) - shifted(y2, z));
        const double j21 = (shifted(y2, mixed_y) - shifted(y2, y)) *
                           (shifted(y1, mixed_z) - shifted(y1, z));
        return boost * 0.5 * (j12 + j21) / scale;
    };
    return median_of_means(draw, cfg, 4.0 * boost / scale, sampler);
}

ScalarEstimate estimate_directional_eval(const FunctionOracle& f, double t,
                                         std::span<const double> y, std::span<const double> x,
                                         double xi, const EstimatorConfig& cfg,
                                         GaussianSampler& sampler) {
    cfg.validate();
    require(t > 0.0, "estimate_directional_eval: t must be positive");
    require(xi > 0.0 && xi < 1.0, "estimate_directional_eval: xi must be in (0,1)");
    const std::size_t n = f.dimension();
    require(y.size() == n && x.size() == n, "estimate_directional_eval: dimension mismatch");

    const double rho = std::exp(-t);
    const double sig = std::sqrt(1.0 - rho * rho);
    const double rescale = 1.0 / std::sqrt(std::exp(2.0 * t) - 1.0);
    const double sxi = std::sqrt(1.0 - xi * xi);

    std::vector<double> z(n), w(n), arg(n);
    auto shifted = [&](const std::vector<double>& p) {
        for (std::size_t i = 0; i < n; ++i) arg[i] = rho * y[i] + sig * p[i];
        return f.evaluate(std::span<const double>(arg));
    };
    auto draw = [&](GaussianSampler& s) {
        s.point_into(z.data(), n);
        for (std::size_t i = 0; i < n; ++i) w[i] = xi * x[i] + sxi * z[i];
        return rescale * (shifted(w) - shifted(z)) / xi;
    };
    return median_of_means(draw, cfg, 2.0 * rescale / xi, sampler);
}

ScalarEstimate estimate_noise_sensitivity(const FunctionOracle& f, double t,
                                          const EstimatorConfig& cfg, GaussianSampler& sampler) {
    cfg.validate();
    require(t > 0.0, "estimate_noise_sensitivity: t must be positive");
    const std::size_t n = f.dimension();
    const double rho = std::exp(-t);
    const double sig = std::sqrt(1.0 - rho * rho);
    std::vector<double> x(n), w(n);
    auto draw = [&](GaussianSampler& s) {
        s.point_into(x.data(), n);
        for (std::size_t i = 0; i < n; ++i) w[i] = rho * x[i] + sig * s.normal();
        return f.evaluate(std::span<const double>(x)) != f.evaluate(std::span<const double>(w))
                   ? 1.0
                   : 0.0;
    };
    return median_of_means(draw, cfg, 1.0, sampler);
}

GradVectorEstimate estimate_grad_vector(const FunctionOracle& f, double t,
                                        std::span<const double> y, std::size_t samples,
                                        GaussianSampler& sampler) {
    require(t > 0.0, "estimate_grad_vector: t must be positive");
    require(samples >= 2, "estimate_grad_vector: need at least 2 samples");
    const std::size_t n = f.dimension();
    require(y.size() == n, "estimate_grad_vector: anchor dimension mismatch");

    const double rho = std::exp(-t);
    const double sig = std::sqrt(1.0 - rho * rho);
    const double ct = rho / sig;

    GradVectorEstimate est;
    est.half1.assign(n, 0.0);
    est.half2.assign(n, 0.0);
    std::vector<double> x(n), w(n);
    std::size_t count1 = 0, count2 = 0;
    for (std::size_t m = 0; m < samples; ++m) {
        sampler.point_into(x.data(), n);
        for (std::size_t i = 0; i < n; ++i) w[i] = rho * y[i] + sig * x[i];
        const double q = f.evaluate(std::span<const double>(w));
        std::vector<double>& acc = (m % 2 == 0) ? est.half1 : est.half2;
        for (std::size_t i = 0; i < n; ++i) acc[i] += q * x[i];
        (m % 2 == 0 ? count1 : count2) += 1;
    }
    est.mean.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        est.mean[i] = ct * (est.half1[i] + est.half2[i]) / static_cast<double>(samples);
        est.half1[i] *= ct / static_cast<double>(count1);
        est.half2[i] *= ct / static_cast<double>(count2);
    }
    est.samples_used = samples;
    return est;
}

}  // namespace jp
