#pragma once

// Distribution of the number of successes among independent Bernoulli
// events with unequal probabilities, by the standard O(n k) recurrence.

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace semiband {

/// Writes P(K = k) for k = 0..out.size()-1 into `out`, where K counts the
/// successes among events with probabilities `p`. Truncating `out` below
/// p.size()+1 entries still gives exact values for the kept counts.
inline void poisson_binomial_pmf_into(std::span<const double> p, std::span<double> out)
{
    if (out.empty())
        return;
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = 1.0;
    std::size_t top = 0; // highest count reachable so far, clipped to the buffer
    for (double q : p) {
        if (!(q >= 0.0 && q <= 1.0))
            throw std::invalid_argument("poisson_binomial: probability outside [0,1]");
        top = std::min(top + 1, out.size() - 1);
        for (std::size_t k = top; k > 0; --k)
            out[k] = out[k] * (1.0 - q) + out[k - 1] * q;
        out[0] *= 1.0 - q;
    }
}

/// Full pmf, P(K = k) for k = 0..p.size().
inline std::vector<double> poisson_binomial_pmf(std::span<const double> p)
{
    std::vector<double> out(p.size() + 1);
    poisson_binomial_pmf_into(p, out);
    return out;
}

/// P(K <= k).
inline double poisson_binomial_cdf(std::span<const double> p, std::size_t k)
{
    std::vector<double> pmf(std::min(k, p.size()) + 1);
    poisson_binomial_pmf_into(p, pmf);
    double s = 0.0;
    for (double v : pmf)
        s += v;
    return std::min(s, 1.0);
}

} // namespace semiband
