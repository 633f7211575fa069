#pragma once

// Closed-form stability constants. Both are stated without the learning-rate
// factor eta.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "semiband/perturbation.hpp"

namespace semiband {

/// Per-arm bound on E[lhat_i (phi_i(eta L) - phi_i(eta (L + lhat)))] / eta for
/// an arm whose cumulative loss ranks sigma_i-th cheapest.
///   Frechet: 2(a+1) ((sigma^m + 1/a) / ((sigma-m+1) v 1))^(1/a)
///   Pareto:  4a     ((sigma^m + 1/a) / sigma)^(1/a)
inline double per_arm_stability_bound(const PerturbationSpec& spec, std::size_t m, std::size_t sigma_i)
{
    if (m < 1 || sigma_i < 1)
        throw std::invalid_argument("per_arm_stability_bound: need m >= 1 and sigma_i >= 1");
    const double a = spec.alpha();
    const auto s = static_cast<double>(sigma_i);
    const auto md = static_cast<double>(m);
    const double top = std::min(s, md) + 1.0 / a;
    if (spec.family() == Family::Frechet) {
        const double below = std::max(s - md + 1.0, 1.0);
        return 2.0 * (a + 1.0) * std::pow(top / below, 1.0 / a);
    }
    return 4.0 * a * std::pow(top / s, 1.0 / a);
}

/// Per-round stability constant summed over all d arms.
///   Frechet: 2(a+1)(m+1/a)^(1/a) (m + a/(a-1) (d-m+1)^(1-1/a))
///   Pareto:  4a^2/(a-1) (m+1/a)^(1/a) d^(1-1/a)
inline double stability_constant(const PerturbationSpec& spec, std::size_t m, std::size_t d)
{
    if (m < 1 || m > d)
        throw std::invalid_argument("stability_constant: need 1 <= m <= d");
    const double a = spec.alpha();
    const auto md = static_cast<double>(m);
    const auto dd = static_cast<double>(d);
    const double head = std::pow(md + 1.0 / a, 1.0 / a);
    if (spec.family() == Family::Frechet)
        return 2.0 * (a + 1.0) * head * (md + a / (a - 1.0) * std::pow(dd - md + 1.0, 1.0 - 1.0 / a));
    return 4.0 * a * a / (a - 1.0) * head * std::pow(dd, 1.0 - 1.0 / a);
}

} // namespace semiband
