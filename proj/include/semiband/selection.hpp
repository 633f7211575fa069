#pragma once

// Combinatorial argmin over the size-invariant action set {a : |a|_1 = m}
// and the rank bookkeeping used by the resampling estimators.
//
// Ordering convention everywhere: a higher score wins and equal scores are
// won by the lower index.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace semiband {

/// An m-subset of base arms {0, ..., d-1}, stored sorted.
class Action {
public:
    Action() = default;

    Action(std::vector<std::size_t> indices, std::size_t d) : indices_(std::move(indices)), d_(d)
    {
        std::sort(indices_.begin(), indices_.end());
        if (indices_.empty())
            throw std::invalid_argument("Action: must select at least one arm");
        if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
            throw std::invalid_argument("Action: duplicate arm index");
        if (indices_.back() >= d_)
            throw std::invalid_argument("Action: arm index " + std::to_string(indices_.back()) +
                                        " out of range for d = " + std::to_string(d_));
    }

    const std::vector<std::size_t>& indices() const noexcept { return indices_; }
    std::size_t size() const noexcept { return indices_.size(); }
    std::size_t dimension() const noexcept { return d_; }

    bool contains(std::size_t i) const
    {
        return std::binary_search(indices_.begin(), indices_.end(), i);
    }

    std::vector<bool> mask() const
    {
        std::vector<bool> out(d_, false);
        for (auto i : indices_)
            out[i] = true;
        return out;
    }

    friend bool operator==(const Action&, const Action&) = default;

private:
    std::vector<std::size_t> indices_;
    std::size_t d_ = 0;
};

/// Ascending ranks of cumulative losses: sigma[i] = 1 for the cheapest arm.
/// Always a permutation of {1, ..., d}.
class RankProfile {
public:
    RankProfile() = default;

    explicit RankProfile(std::vector<std::size_t> sigma) : sigma_(std::move(sigma)), order_(sigma_.size())
    {
        const std::size_t d = sigma_.size();
        std::vector<bool> seen(d, false);
        for (std::size_t i = 0; i < d; ++i) {
            const std::size_t s = sigma_[i];
            if (s < 1 || s > d || seen[s - 1])
                throw std::invalid_argument("RankProfile: sigma is not a permutation of 1..d");
            seen[s - 1] = true;
            order_[s - 1] = i;
        }
    }

    std::size_t size() const noexcept { return sigma_.size(); }
    std::size_t operator[](std::size_t i) const { return sigma_[i]; }
    const std::vector<std::size_t>& sigma() const noexcept { return sigma_; }

    /// Arm holding rank r (1-based).
    std::size_t arm_at_rank(std::size_t r) const { return order_.at(r - 1); }

    /// Arms ordered from rank 1 to rank d.
    const std::vector<std::size_t>& order() const noexcept { return order_; }

    /// {j : sigma_j <= sigma_i}, in rank order.
    std::vector<std::size_t> prefix(std::size_t i) const
    {
        return {order_.begin(), order_.begin() + static_cast<std::ptrdiff_t>(sigma_.at(i))};
    }

    friend bool operator==(const RankProfile& a, const RankProfile& b) { return a.sigma_ == b.sigma_; }

private:
    std::vector<std::size_t> sigma_;
    std::vector<std::size_t> order_;
};

namespace detail {

inline void require_finite(std::span<const double> v, const char* what)
{
    for (std::size_t j = 0; j < v.size(); ++j)
        if (!std::isfinite(v[j]))
            throw std::invalid_argument(std::string(what) + ": non-finite entry at index " +
                                        std::to_string(j));
}

/// True when arm a outranks arm b under `score`.
inline bool beats(std::span<const double> score, std::size_t a, std::size_t b)
{
    return score[a] > score[b] || (score[a] == score[b] && a < b);
}

/// Selects the k best indices of `score` into `out` with a bounded heap;
/// `out` is left in heap order (front = weakest kept). O(d log k) worst case,
/// O(d + k log k log(d/k)) for exchangeable input.
inline void top_k_heap(std::span<const double> score, std::size_t k, std::vector<std::size_t>& out)
{
    out.clear();
    const std::size_t d = score.size();
    auto weaker_on_top = [score](std::size_t a, std::size_t b) { return beats(score, a, b); };
    for (std::size_t j = 0; j < d; ++j) {
        if (out.size() < k) {
            out.push_back(j);
            std::push_heap(out.begin(), out.end(), weaker_on_top);
        } else if (score[j] > score[out.front()]) {
            // j is scanned in increasing order, so a tie never favours it.
            std::pop_heap(out.begin(), out.end(), weaker_on_top);
            out.back() = j;
            std::push_heap(out.begin(), out.end(), weaker_on_top);
        }
    }
}

/// The k best indices, strongest first.
inline void top_k_sorted(std::span<const double> score, std::size_t k, std::vector<std::size_t>& out)
{
    top_k_heap(score, k, out);
    std::sort(out.begin(), out.end(), [score](std::size_t a, std::size_t b) { return beats(score, a, b); });
}

} // namespace detail

/// Indices of the m largest scores; equivalently argmin over |a|_1 = m of
/// a^T(-score). Ties go to the lowest index.
inline Action select_top_m(std::span<const double> score, std::size_t m)
{
    const std::size_t d = score.size();
    if (m < 1 || m > d)
        throw std::invalid_argument("select_top_m: need 1 <= m <= d (m = " + std::to_string(m) +
                                    ", d = " + std::to_string(d) + ")");
    detail::require_finite(score, "select_top_m");
    std::vector<std::size_t> idx;
    idx.reserve(m);
    detail::top_k_heap(score, m, idx);
    return Action(std::move(idx), d);
}

/// 1-based descending rank of arm i under `score` (1 = best).
inline std::size_t descending_rank(std::span<const double> score, std::size_t i)
{
    std::size_t r = 1;
    for (std::size_t j = 0; j < score.size(); ++j)
        if (j != i && detail::beats(score, j, i))
            ++r;
    return r;
}

/// sigma_i = |{j : L_j < L_i}| + |{j <= i : L_j = L_i}|.
inline RankProfile ascending_ranks(std::span<const double> losses)
{
    detail::require_finite(losses, "ascending_ranks");
    const std::size_t d = losses.size();
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [losses](std::size_t a, std::size_t b) { return losses[a] < losses[b]; });
    std::vector<std::size_t> sigma(d);
    for (std::size_t r = 0; r < d; ++r)
        sigma[order[r]] = r + 1;
    return RankProfile(std::move(sigma));
}

/// Index of the theta-th largest of values[j] over j in `eligible`.
inline std::size_t theta_th_largest_in_prefix(std::span<const double> values,
                                              std::span<const std::size_t> eligible, std::size_t theta)
{
    if (theta < 1 || theta > eligible.size())
        throw std::invalid_argument("theta_th_largest_in_prefix: theta = " + std::to_string(theta) +
                                    " outside [1, " + std::to_string(eligible.size()) + "]");
    std::vector<std::size_t> pool(eligible.begin(), eligible.end());
    for (auto j : pool)
        if (j >= values.size())
            throw std::invalid_argument("theta_th_largest_in_prefix: eligible index out of range");
    auto nth = pool.begin() + static_cast<std::ptrdiff_t>(theta - 1);
    std::nth_element(pool.begin(), nth, pool.end(),
                     [values](std::size_t a, std::size_t b) { return detail::beats(values, a, b); });
    return *nth;
}

} // namespace semiband
