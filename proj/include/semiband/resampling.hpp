#pragma once

// Geometric Resampling (GR) and Conditional Geometric Resampling (CGR):
// unbiased estimates of 1/w_i for the arms of the chosen action, where w_i
// is the probability that FTPL selects arm i given the cumulative losses.
//
// RNG discipline, per resampling iteration: d uniforms for the fresh
// perturbation r' (index order), then for CGR one draw for theta. Nothing
// else touches the engine, so equal seeds replay bit-identically.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "semiband/perturbation.hpp"
#include "semiband/random.hpp"
#include "semiband/selection.hpp"

namespace semiband {

enum class EstimatorKind { GR, CGR };

inline std::string_view to_string(EstimatorKind e) { return e == EstimatorKind::GR ? "gr" : "cgr"; }

inline EstimatorKind estimator_from_string(std::string_view s)
{
    if (s == "gr" || s == "GR")
        return EstimatorKind::GR;
    if (s == "cgr" || s == "CGR")
        return EstimatorKind::CGR;
    throw std::invalid_argument("unknown estimator '" + std::string(s) + "' (expected gr or cgr)");
}

/// Safety cap on global resampling iterations per call.
struct ResamplingBudget {
    std::uint64_t cap = 10'000'000;

    ResamplingBudget() = default;
    explicit ResamplingBudget(std::uint64_t c) : cap(c)
    {
        if (c < 1)
            throw std::invalid_argument("ResamplingBudget: cap must be >= 1");
    }
};

struct EstimatorReport {
    std::vector<std::size_t> arms;        ///< selected arms, ascending
    std::vector<double> inv_prob;         ///< estimate of 1/w_i, aligned with arms
    std::vector<std::uint64_t> counts;    ///< M_{t,i}: iterations until arm i terminated
    std::vector<double> scale;            ///< C_i (sigma_i/m for conditioned arms, else 1)
    std::uint64_t total_rounds = 0;       ///< max over plain arms + sum over conditioned arms
    std::uint64_t iterations = 0;         ///< global loop iterations actually run
    bool capped = false;

    /// Estimate for `arm`; throws if the arm was not selected.
    double inv_prob_estimate(std::size_t arm) const
    {
        const auto it = std::lower_bound(arms.begin(), arms.end(), arm);
        if (it == arms.end() || *it != arm)
            throw std::invalid_argument("EstimatorReport: arm " + std::to_string(arm) + " not selected");
        return inv_prob[static_cast<std::size_t>(it - arms.begin())];
    }
};

/// Scratch buffers reused across calls in hot loops.
struct ResamplingWorkspace {
    std::vector<double> lambda;
    std::vector<double> perturbation;
    std::vector<double> score;
    std::vector<std::size_t> top;
    std::vector<std::uint64_t> stamp;
    std::vector<std::size_t> heap;
};

namespace detail {

inline void validate_resampling_inputs(std::span<const double> cum_loss, double eta, const Action& chosen)
{
    if (!std::isfinite(eta) || !(eta > 0.0))
        throw std::invalid_argument("resampling: eta must be finite and > 0");
    if (chosen.dimension() != cum_loss.size())
        throw std::invalid_argument("resampling: action dimension " + std::to_string(chosen.dimension()) +
                                    " != cumulative loss length " + std::to_string(cum_loss.size()));
    require_finite(cum_loss, "resampling");
}

inline void prepare_workspace(ResamplingWorkspace& ws, std::span<const double> cum_loss, double eta)
{
    const std::size_t d = cum_loss.size();
    ws.lambda.resize(d);
    for (std::size_t j = 0; j < d; ++j)
        ws.lambda[j] = eta * cum_loss[j];
    ws.perturbation.resize(d);
    ws.score.resize(d);
    ws.stamp.assign(d, 0);
}

template <class Engine>
void draw_scores(const PerturbationSpec& spec, ResamplingWorkspace& ws, Engine& rng)
{
    const std::size_t d = ws.lambda.size();
    sample_into(spec, std::span<double>(ws.perturbation), rng);
    for (std::size_t j = 0; j < d; ++j)
        ws.score[j] = ws.perturbation[j] - ws.lambda[j];
}

} // namespace detail

/// Geometric Resampling: repeat fresh perturbed selections until every arm of
/// `chosen` has been re-selected once; K_i counts the draws arm i needed.
template <class Engine>
EstimatorReport geometric_resample(std::span<const double> cum_loss, double eta, const Action& chosen,
                                   const PerturbationSpec& spec, Engine& rng,
                                   ResamplingBudget budget = {}, ResamplingWorkspace* workspace = nullptr)
{
    detail::validate_resampling_inputs(cum_loss, eta, chosen);
    ResamplingWorkspace local;
    ResamplingWorkspace& ws = workspace ? *workspace : local;
    detail::prepare_workspace(ws, cum_loss, eta);

    const std::size_t m = chosen.size();
    EstimatorReport rep;
    rep.arms = chosen.indices();
    rep.counts.assign(m, 0);
    rep.scale.assign(m, 1.0);

    std::vector<std::size_t> active(m);
    for (std::size_t p = 0; p < m; ++p)
        active[p] = p;

    std::uint64_t it = 0;
    while (!active.empty()) {
        if (it == budget.cap) {
            rep.capped = true;
            break;
        }
        ++it;
        for (auto p : active)
            ++rep.counts[p];
        detail::draw_scores(spec, ws, rng);
        detail::top_k_heap(ws.score, m, ws.top);
        for (auto j : ws.top)
            ws.stamp[j] = it;
        std::erase_if(active, [&](std::size_t p) { return ws.stamp[rep.arms[p]] == it; });
    }

    rep.iterations = it;
    rep.total_rounds = it;
    rep.inv_prob.assign(rep.counts.begin(), rep.counts.end());
    return rep;
}

/// Swaps r'_i with the theta-th largest r'_j over {j : sigma_j <= sigma_i}.
/// With theta uniform on [m], the result is distributed as the perturbation
/// conditioned on arm i ranking within the top m of that prefix.
inline std::vector<double> swap_conditioned_draw(std::span<const double> r_prime, std::size_t i,
                                                 const RankProfile& sigma, std::size_t theta, std::size_t m)
{
    if (sigma.size() != r_prime.size())
        throw std::invalid_argument("swap_conditioned_draw: rank profile size mismatch");
    if (i >= r_prime.size())
        throw std::invalid_argument("swap_conditioned_draw: arm index out of range");
    if (sigma[i] <= m)
        throw std::invalid_argument("swap_conditioned_draw: requires sigma_i > m");
    if (theta < 1 || theta > m)
        throw std::invalid_argument("swap_conditioned_draw: theta must lie in [1, m]");
    const auto eligible = sigma.prefix(i);
    const std::size_t partner = theta_th_largest_in_prefix(r_prime, eligible, theta);
    std::vector<double> out(r_prime.begin(), r_prime.end());
    std::swap(out[i], out[partner]);
    return out;
}

/// Conditional Geometric Resampling. Arms with sigma_i <= m terminate on the
/// plain global draw exactly as in GR. Arms with sigma_i > m terminate on a
/// swapped copy of the same draw and their counts are rescaled by sigma_i/m.
template <class Engine>
EstimatorReport conditional_geometric_resample(std::span<const double> cum_loss, double eta,
                                               const Action& chosen, const RankProfile& sigma,
                                               const PerturbationSpec& spec, Engine& rng,
                                               ResamplingBudget budget = {},
                                               ResamplingWorkspace* workspace = nullptr)
{
    detail::validate_resampling_inputs(cum_loss, eta, chosen);
    const std::size_t d = cum_loss.size();
    if (sigma.size() != d)
        throw std::invalid_argument("conditional_geometric_resample: rank profile size mismatch");
    for (std::size_t r = 1; r < d; ++r)
        if (cum_loss[sigma.arm_at_rank(r)] > cum_loss[sigma.arm_at_rank(r + 1)])
            throw std::invalid_argument("conditional_geometric_resample: sigma does not rank cum_loss ascending");

    ResamplingWorkspace local;
    ResamplingWorkspace& ws = workspace ? *workspace : local;
    detail::prepare_workspace(ws, cum_loss, eta);

    const std::size_t m = chosen.size();
    EstimatorReport rep;
    rep.arms = chosen.indices();
    rep.counts.assign(m, 0);
    rep.scale.assign(m, 1.0);

    std::vector<std::size_t> plain_active;
    std::vector<std::size_t> cond_active; // positions into rep.arms, kept sorted by sigma
    for (std::size_t p = 0; p < m; ++p) {
        const std::size_t s = sigma[rep.arms[p]];
        if (s > m) {
            rep.scale[p] = static_cast<double>(s) / static_cast<double>(m);
            cond_active.push_back(p);
        } else {
            plain_active.push_back(p);
        }
    }
    std::sort(cond_active.begin(), cond_active.end(),
              [&](std::size_t a, std::size_t b) { return sigma[rep.arms[a]] < sigma[rep.arms[b]]; });
    const std::vector<std::size_t> conditioned = cond_active;

    const std::size_t k_top = std::min(m + 2, d);
    const auto& r = ws.perturbation;
    auto value_beats = [&r](std::size_t a, std::size_t b) { return r[a] > r[b] || (r[a] == r[b] && a < b); };

    std::uint64_t it = 0;
    while (!plain_active.empty() || !cond_active.empty()) {
        if (it == budget.cap) {
            rep.capped = true;
            break;
        }
        ++it;
        for (auto p : plain_active)
            ++rep.counts[p];
        for (auto p : cond_active)
            ++rep.counts[p];

        detail::draw_scores(spec, ws, rng);
        const std::size_t theta = 1 + static_cast<std::size_t>(uniform_index(rng, m));

        detail::top_k_sorted(ws.score, k_top, ws.top);
        for (std::size_t q = 0; q < m; ++q)
            ws.stamp[ws.top[q]] = it;
        std::erase_if(plain_active, [&](std::size_t p) { return ws.stamp[rep.arms[p]] == it; });

        if (cond_active.empty())
            continue;

        // Walk arms in rank order keeping the theta largest perturbation
        // values seen so far; at each conditioned arm's rank the weakest kept
        // entry is the theta-th largest of its prefix.
        ws.heap.clear();
        std::size_t next = 0;
        const std::size_t last_rank = sigma[rep.arms[cond_active.back()]];
        std::vector<std::size_t> done;
        for (std::size_t rank = 1; rank <= last_rank && next < cond_active.size(); ++rank) {
            const std::size_t j = sigma.arm_at_rank(rank);
            if (ws.heap.size() < theta) {
                ws.heap.push_back(j);
                std::push_heap(ws.heap.begin(), ws.heap.end(), value_beats);
            } else if (value_beats(j, ws.heap.front())) {
                std::pop_heap(ws.heap.begin(), ws.heap.end(), value_beats);
                ws.heap.back() = j;
                std::push_heap(ws.heap.begin(), ws.heap.end(), value_beats);
            }
            const std::size_t p = cond_active[next];
            const std::size_t i = rep.arms[p];
            if (sigma[i] != rank)
                continue;
            ++next;

            const std::size_t partner = ws.heap.front();
            // Score of i after the swap, and of the partner.
            const double x = r[partner] - ws.lambda[i];
            std::size_t ahead = 0;
            for (std::size_t q = 0; q < k_top && ahead < m; ++q) {
                const std::size_t j2 = ws.top[q];
                if (j2 == i || j2 == partner)
                    continue;
                if (ws.score[j2] > x || (ws.score[j2] == x && j2 < i))
                    ++ahead;
                else
                    break;
            }
            if (partner != i) {
                const double y = r[i] - ws.lambda[partner];
                if (y > x || (y == x && partner < i))
                    ++ahead;
            }
            if (ahead < m)
                done.push_back(p);
        }
        if (!done.empty())
            std::erase_if(cond_active, [&](std::size_t p) {
                return std::find(done.begin(), done.end(), p) != done.end();
            });
    }

    rep.iterations = it;
    std::uint64_t plain_max = 0;
    std::uint64_t cond_sum = 0;
    for (std::size_t p = 0; p < m; ++p) {
        if (std::find(conditioned.begin(), conditioned.end(), p) != conditioned.end())
            cond_sum += rep.counts[p];
        else
            plain_max = std::max(plain_max, rep.counts[p]);
    }
    rep.total_rounds = plain_max + cond_sum;
    rep.inv_prob.resize(m);
    for (std::size_t p = 0; p < m; ++p)
        rep.inv_prob[p] = rep.scale[p] * static_cast<double>(rep.counts[p]);
    return rep;
}

} // namespace semiband
