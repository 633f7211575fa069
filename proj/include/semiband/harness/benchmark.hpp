#pragma once

// Resampling cost of GR and CGR over a grid of (d, m) at a fixed, spread
// out cumulative loss: lambda_j = spread * (d/m)^(1/alpha) * j/(d-1), so the
// expensive arms are selected rarely but not never.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "semiband/harness/experiment.hpp"
#include "semiband/perturbation.hpp"
#include "semiband/random.hpp"
#include "semiband/resampling.hpp"
#include "semiband/selection.hpp"

namespace semiband {

struct BenchmarkSettings {
    std::vector<std::size_t> ds{64, 256, 1024, 4096};
    std::vector<std::size_t> ms{1, 8, 64};
    std::size_t rounds = 1000;
    PerturbationSpec spec = PerturbationSpec::pareto(2.0);
    double spread = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t cap = ResamplingBudget{}.cap;
    std::vector<EstimatorKind> estimators{EstimatorKind::GR, EstimatorKind::CGR};
};

struct BenchmarkRow {
    std::size_t d = 0;
    std::size_t m = 0;
    EstimatorKind estimator = EstimatorKind::GR;
    std::size_t rounds = 0;
    double mean_resamples = 0.0; ///< mean total_rounds (M_t)
    double stderr_resamples = 0.0;
    double bound = 0.0;          ///< d for GR, m + m ln(d/m) for CGR
    double mean_iterations = 0.0;
    double micros_per_round = 0.0;
    std::uint64_t capped = 0;
};

inline std::vector<double> spread_losses(std::size_t d, std::size_t m, double alpha, double spread)
{
    std::vector<double> out(d, 0.0);
    if (d == 1)
        return out;
    const double top = spread * std::pow(static_cast<double>(d) / static_cast<double>(m), 1.0 / alpha);
    for (std::size_t j = 0; j < d; ++j)
        out[j] = top * static_cast<double>(j) / static_cast<double>(d - 1);
    return out;
}

inline double resampling_bound(EstimatorKind e, std::size_t d, std::size_t m)
{
    const auto dd = static_cast<double>(d);
    const auto md = static_cast<double>(m);
    return e == EstimatorKind::GR ? dd : md + md * std::log(dd / md);
}

/// One benchmark cell. Each round draws a fresh FTPL action at the fixed
/// losses (eta = 1) and runs the estimator on it.
inline BenchmarkRow benchmark_cell(std::size_t d, std::size_t m, EstimatorKind est, const BenchmarkSettings& s,
                                   std::uint64_t stream)
{
    if (m < 1 || m > d)
        throw std::invalid_argument("benchmark: need 1 <= m <= d");
    if (s.rounds < 1)
        throw std::invalid_argument("benchmark: rounds must be >= 1");
    const std::vector<double> loss = spread_losses(d, m, s.spec.alpha(), s.spread);
    const RankProfile sigma = ascending_ranks(loss);
    const ResamplingBudget budget(s.cap);
    Rng rng = make_rng(s.seed, stream);
    ResamplingWorkspace ws;
    std::vector<double> score(d);

    BenchmarkRow row;
    row.d = d;
    row.m = m;
    row.estimator = est;
    row.rounds = s.rounds;
    row.bound = resampling_bound(est, d, m);
    double sum = 0.0;
    double sum_sq = 0.0;
    double iters = 0.0;
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t k = 0; k < s.rounds; ++k) {
        sample_into(s.spec, std::span<double>(score), rng);
        for (std::size_t j = 0; j < d; ++j)
            score[j] -= loss[j];
        const Action a = select_top_m(score, m);
        const EstimatorReport rep = est == EstimatorKind::GR
                                        ? geometric_resample(loss, 1.0, a, s.spec, rng, budget, &ws)
                                        : conditional_geometric_resample(loss, 1.0, a, sigma, s.spec, rng, budget, &ws);
        const auto x = static_cast<double>(rep.total_rounds);
        sum += x;
        sum_sq += x * x;
        iters += static_cast<double>(rep.iterations);
        row.capped += rep.capped ? 1 : 0;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto n = static_cast<double>(s.rounds);
    row.mean_resamples = sum / n;
    const double var = s.rounds > 1 ? (sum_sq - n * row.mean_resamples * row.mean_resamples) / (n - 1.0) : 0.0;
    row.stderr_resamples = std::sqrt(std::max(var, 0.0) / n);
    row.mean_iterations = iters / n;
    row.micros_per_round = secs * 1e6 / n;
    return row;
}

/// Every (d, m) with m <= d, each estimator; `progress` sees each finished row.
inline std::vector<BenchmarkRow> benchmark_resampling(const BenchmarkSettings& s,
                                                      const std::function<void(const BenchmarkRow&)>& progress = {})
{
    std::vector<BenchmarkRow> out;
    std::uint64_t stream = 0;
    for (auto d : s.ds)
        for (auto m : s.ms) {
            if (m > d)
                continue;
            for (auto est : s.estimators) {
                out.push_back(benchmark_cell(d, m, est, s, stream++));
                if (progress)
                    progress(out.back());
            }
        }
    return out;
}

inline void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows)
{
    out << "d,m,estimator,rounds,mean_resamples,stderr_resamples,bound,mean_iterations,micros_per_round,capped\n";
    for (const auto& r : rows)
        out << r.d << ',' << r.m << ',' << to_string(r.estimator) << ',' << r.rounds << ','
            << format_double(r.mean_resamples) << ',' << format_double(r.stderr_resamples) << ','
            << format_double(r.bound) << ',' << format_double(r.mean_iterations) << ','
            << format_double(r.micros_per_round) << ',' << r.capped << '\n';
}

} // namespace semiband
