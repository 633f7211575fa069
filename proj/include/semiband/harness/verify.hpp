#pragma once

// Verification sweeps behind `semiband verify <suite>`. Each suite returns
// report rows (check,instance_id,i,lhs,rhs,ok,err_estimate); a suite passes
// iff every row is ok.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "semiband/analytics.hpp"
#include "semiband/harness/parallel.hpp"
#include "semiband/perturbation.hpp"
#include "semiband/random.hpp"
#include "semiband/resampling.hpp"

namespace semiband {

struct VerifySettings {
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    double slack = 1e-6;
    // lemmas
    std::size_t sigma_instances = 200;
    std::size_t flattening_instances = 100;
    double max_lambda = 2.0;
    // estimators
    std::size_t estimator_instances = 6;
    std::size_t estimator_calls = 200'000;
    double estimator_z = 4.0;
    std::uint64_t cap = ResamplingBudget{}.cap;
    // counterexample
    double scan_lo = 0.0;
    double scan_hi = 5.0;
    double scan_step = 0.05;
    // penalty
    std::size_t penalty_trials = 1'000'000;
    double order_stat_rel_tol = 0.01;
};

struct VerifyReport {
    std::vector<CheckRow> rows;

    bool passed() const
    {
        return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.ok; });
    }
    std::size_t failures() const
    {
        return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const CheckRow& r) { return !r.ok; }));
    }
};

inline const std::vector<std::string>& verify_suites()
{
    static const std::vector<std::string> names{"lemmas", "estimators", "counterexample", "penalty"};
    return names;
}

// ---------------------------------------------------------------------------
// Random instances

struct RandomInstance {
    std::vector<double> lambda;
    std::size_t m = 1;
    PerturbationSpec spec = PerturbationSpec::frechet(2.0);
};

/// Instance k of a sweep: d in [d_lo, d_hi], m in [1, d], alpha cycling
/// through {1.5, 2, 3}, family alternating, lambda_j uniform on [0, max_lambda].
inline RandomInstance random_instance(std::uint64_t seed, std::uint64_t stream, std::size_t k, std::size_t d_lo,
                                      std::size_t d_hi, double max_lambda, bool sorted)
{
    Rng rng = make_rng(seed, stream * 1'000'003ULL + k);
    static constexpr double alphas[] = {1.5, 2.0, 3.0};
    RandomInstance inst;
    const std::size_t d = d_lo + uniform_index(rng, d_hi - d_lo + 1);
    inst.m = 1 + uniform_index(rng, d);
    inst.spec = PerturbationSpec(k % 2 == 0 ? Family::Frechet : Family::Pareto, alphas[(k / 2) % 3]);
    inst.lambda.resize(d);
    for (auto& x : inst.lambda)
        x = max_lambda * uniform_open01(rng);
    if (sorted)
        std::sort(inst.lambda.begin(), inst.lambda.end());
    return inst;
}

// ---------------------------------------------------------------------------
// Suites

/// Rank-based ratio bound on every arm, and the flattening inequality on
/// every arm of sorted profiles.
inline VerifyReport verify_lemmas(const VerifySettings& s)
{
    std::vector<std::vector<CheckRow>> a(s.sigma_instances);
    parallel_for(s.sigma_instances, s.jobs, [&](std::size_t k) {
        const auto inst = random_instance(s.seed, 1, k, 3, 8, s.max_lambda, false);
        const LambdaProfile prof(inst.lambda, inst.m);
        for (const auto& c : check_sigma_ratio_bound(prof, inst.spec, s.slack))
            a[k].push_back({"sigma_ratio_bound", k, c.i, c.lhs, c.rhs, c.ok, c.err_estimate});
    });
    std::vector<std::vector<CheckRow>> b(s.flattening_instances);
    parallel_for(s.flattening_instances, s.jobs, [&](std::size_t k) {
        const auto inst = random_instance(s.seed, 2, k, 2, 8, s.max_lambda, true);
        const LambdaProfile prof(inst.lambda, inst.m);
        for (std::size_t i = 0; i < inst.lambda.size(); ++i) {
            const auto c = check_lambda_star_bound(prof, i, inst.spec, s.slack);
            b[k].push_back({"lambda_star_bound", k, c.i, c.lhs, c.rhs, c.ok, c.err_estimate});
        }
    });
    VerifyReport rep;
    for (auto* part : {&a, &b})
        for (auto& rows : *part)
            rep.rows.insert(rep.rows.end(), rows.begin(), rows.end());
    return rep;
}

/// Monte Carlo mean of each estimator against 1/phi from quadrature. A
/// capped call counts as a failure.
inline VerifyReport verify_estimators(const VerifySettings& s)
{
    std::vector<std::vector<CheckRow>> parts(s.estimator_instances);
    parallel_for(s.estimator_instances, s.jobs, [&](std::size_t k) {
        const auto inst = random_instance(s.seed, 3, k, 3, 6, 1.5, false);
        const std::size_t d = inst.lambda.size();
        const std::size_t m = std::min(inst.m, d - 1);
        Rng pick = make_rng(s.seed, 4'000'000ULL + k);
        std::vector<std::size_t> arms(d);
        std::iota(arms.begin(), arms.end(), std::size_t{0});
        for (std::size_t j = d; j > 1; --j)
            std::swap(arms[j - 1], arms[uniform_index(pick, j)]);
        arms.resize(m);
        const Action chosen(arms, d);
        const RankProfile sigma = ascending_ranks(inst.lambda);
        const LambdaProfile prof(inst.lambda, m);
        const ResamplingBudget budget(s.cap);

        for (auto est : {EstimatorKind::GR, EstimatorKind::CGR}) {
            Rng rng = make_rng(s.seed, 5'000'000ULL + 2 * k + (est == EstimatorKind::CGR ? 1 : 0));
            ResamplingWorkspace ws;
            std::vector<double> sum(m, 0.0), sum_sq(m, 0.0);
            std::uint64_t capped = 0;
            for (std::size_t n = 0; n < s.estimator_calls; ++n) {
                const auto rep = est == EstimatorKind::GR
                                     ? geometric_resample(inst.lambda, 1.0, chosen, inst.spec, rng, budget, &ws)
                                     : conditional_geometric_resample(inst.lambda, 1.0, chosen, sigma, inst.spec, rng,
                                                                      budget, &ws);
                capped += rep.capped ? 1 : 0;
                for (std::size_t p = 0; p < m; ++p) {
                    sum[p] += rep.inv_prob[p];
                    sum_sq[p] += rep.inv_prob[p] * rep.inv_prob[p];
                }
            }
            const auto N = static_cast<double>(s.estimator_calls);
            const std::string name = std::string(to_string(est)) + "_unbiased";
            for (std::size_t p = 0; p < m; ++p) {
                const double mean = sum[p] / N;
                const double se = std::sqrt(std::max(sum_sq[p] / N - mean * mean, 0.0) / N);
                const double target = 1.0 / phi_i(prof, chosen.indices()[p], inst.spec).value;
                parts[k].push_back({name, k, chosen.indices()[p], mean, target,
                                    capped == 0 && std::abs(mean - target) <= s.estimator_z * se, se});
            }
            if (capped > 0)
                parts[k].push_back({std::string(to_string(est)) + "_capped", k, 0, static_cast<double>(capped), 0.0,
                                    false, 0.0});
        }
    });
    VerifyReport rep;
    for (auto& rows : parts)
        rep.rows.insert(rep.rows.end(), rows.begin(), rows.end());
    return rep;
}

/// Scan of the counterexample ratio: every point respects the trivial
/// bound 1/lambda_i = 2, the scan both rises and falls, and some point right
/// of lambda_i = 0.5 beats the value at 0.5.
inline VerifyReport verify_counterexample(const VerifySettings& s, std::vector<ScanPoint>* scan_out = nullptr)
{
    const auto scan = counterexample_scan(s.scan_lo, s.scan_hi, s.scan_step);
    VerifyReport rep;
    for (std::size_t k = 0; k < scan.size(); ++k)
        rep.rows.push_back({"ratio_upper_bound", k, 0, scan[k].ratio, 2.0, scan[k].ratio <= 2.0,
                            scan[k].err_estimate});
    const auto v = assess_scan(scan);
    double max_err = 0.0;
    for (const auto& p : scan)
        max_err = std::max(max_err, p.err_estimate);
    double best_right = 0.0;
    for (const auto& p : scan)
        if (p.lambda_q0 > 0.5)
            best_right = std::max(best_right, p.ratio);
    rep.rows.push_back({"strict_rise", 0, 0, v.strict_rise ? 1.0 : 0.0, 1.0, v.strict_rise, max_err});
    rep.rows.push_back({"strict_fall", 0, 0, v.strict_fall ? 1.0 : 0.0, 1.0, v.strict_fall, max_err});
    rep.rows.push_back({"exceeds_baseline", 0, 0, best_right, v.baseline, v.exceeds_baseline, max_err});
    if (scan_out)
        *scan_out = scan;
    return rep;
}

/// Order statistics of n i.i.d. draws, largest first, summarized over trials.
struct OrderStatMoments {
    std::vector<double> mean;    ///< mean of the k-th largest, k = 1..n
    std::vector<double> se;      ///< standard error of that mean
    std::vector<double> top_sum; ///< mean of the sum of the k largest
};

template <class Engine>
OrderStatMoments order_stat_moments(const PerturbationSpec& spec, std::size_t n, std::size_t trials, Engine& rng)
{
    std::vector<double> x(n), s1(n, 0.0), s2(n, 0.0), ps(n, 0.0);
    for (std::size_t t = 0; t < trials; ++t) {
        sample_into(spec, std::span<double>(x), rng);
        std::sort(x.begin(), x.end(), std::greater<>());
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            s1[k] += x[k];
            s2[k] += x[k] * x[k];
            acc += x[k];
            ps[k] += acc;
        }
    }
    OrderStatMoments out;
    const auto N = static_cast<double>(trials);
    for (std::size_t k = 0; k < n; ++k) {
        const double mu = s1[k] / N;
        out.mean.push_back(mu);
        out.se.push_back(std::sqrt(std::max(s2[k] / N - mu * mu, 0.0) / N));
        out.top_sum.push_back(ps[k] / N);
    }
    return out;
}

/// Top-m sums against the closed-form penalty bound, the Pareto
/// order-statistic formula, Frechet-vs-Pareto dominance, and Gautschi's
/// inequality for the gamma function in use.
inline VerifyReport verify_penalty(const VerifySettings& s)
{
    VerifyReport rep;
    std::uint64_t stream = 100;
    std::size_t id = 0;

    for (auto fam : {Family::Pareto, Family::Frechet})
        for (double alpha : {1.5, 2.0, 3.0})
            for (std::size_t d : {2, 4, 8, 16}) {
                const PerturbationSpec spec(fam, alpha);
                Rng rng = make_rng(s.seed, stream++);
                const auto mo = order_stat_moments(spec, d, s.penalty_trials / 4, rng);
                for (std::size_t m : {std::size_t{1}, d / 2, d}) {
                    const double bound = penalty_bound(spec, d, m);
                    rep.rows.push_back({"penalty_bound", id++, m, mo.top_sum[m - 1], bound,
                                        mo.top_sum[m - 1] <= bound, 0.0});
                }
            }

    id = 0;
    for (double alpha : {2.0, 3.0})
        for (std::size_t n : {1, 3, 5, 8}) {
            Rng rng = make_rng(s.seed, stream++);
            const auto mo = order_stat_moments(PerturbationSpec::pareto(alpha), n, s.penalty_trials, rng);
            for (std::size_t k = 1; k <= n; ++k) {
                const double exact = pareto_order_statistic_mean(alpha, k, n);
                const double rel = std::abs(mo.mean[k - 1] - exact) / exact;
                rep.rows.push_back({"pareto_order_statistic", id++, k, mo.mean[k - 1], exact,
                                    rel <= s.order_stat_rel_tol, mo.se[k - 1]});
            }
        }

    id = 0;
    for (double alpha : {1.5, 2.0, 3.0})
        for (std::size_t n : {1, 3, 5, 8}) {
            Rng rf = make_rng(s.seed, stream++);
            Rng rp = make_rng(s.seed, stream++);
            const auto fr = order_stat_moments(PerturbationSpec::frechet(alpha), n, s.penalty_trials / 4, rf);
            const auto pa = order_stat_moments(PerturbationSpec::pareto(alpha), n, s.penalty_trials / 4, rp);
            for (std::size_t k = 1; k <= n; ++k) {
                const double se = std::hypot(fr.se[k - 1], pa.se[k - 1]);
                const double rhs = pa.mean[k - 1] + 1.0 + 3.0 * se;
                rep.rows.push_back({"frechet_dominance", id++, k, fr.mean[k - 1], rhs, fr.mean[k - 1] <= rhs, se});
            }
        }

    id = 0;
    for (int si = 1; si <= 9; ++si) {
        const double sv = 0.1 * si;
        double worst_lo = INFINITY;
        double worst_hi = INFINITY;
        for (int xi = 1; xi <= 80; ++xi) {
            const double x = 0.5 * xi;
            const double ratio = gamma_ratio(x + 1.0, x + sv);
            worst_lo = std::min(worst_lo, ratio / std::pow(x, 1.0 - sv) - 1.0);
            worst_hi = std::min(worst_hi, std::pow(x + 1.0, 1.0 - sv) / ratio - 1.0);
        }
        rep.rows.push_back({"gautschi_lower", id, 0, worst_lo, 0.0, worst_lo > 0.0, 0.0});
        rep.rows.push_back({"gautschi_upper", id++, 0, worst_hi, 0.0, worst_hi > 0.0, 0.0});
    }
    return rep;
}

inline VerifyReport run_verify_suite(const std::string& suite, const VerifySettings& s)
{
    if (suite == "lemmas")
        return verify_lemmas(s);
    if (suite == "estimators")
        return verify_estimators(s);
    if (suite == "counterexample")
        return verify_counterexample(s);
    if (suite == "penalty")
        return verify_penalty(s);
    throw std::invalid_argument("unknown verify suite '" + suite + "' (lemmas, estimators, counterexample, penalty)");
}

} // namespace semiband
