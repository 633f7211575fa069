#pragma once

// Frechet(alpha) and Pareto(alpha) perturbations: distribution functions,
// inverse-CDF sampling, order-statistic means and the penalty bound on the
// expected sum of the m largest of d draws.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "semiband/random.hpp"

namespace semiband {

enum class Family { Frechet, Pareto };

inline std::string_view to_string(Family f)
{
    return f == Family::Frechet ? "frechet" : "pareto";
}

inline Family family_from_string(std::string_view s)
{
    if (s == "frechet" || s == "Frechet")
        return Family::Frechet;
    if (s == "pareto" || s == "Pareto")
        return Family::Pareto;
    throw std::invalid_argument("unknown perturbation family '" + std::string(s) + "'");
}

class PerturbationSpec {
public:
    PerturbationSpec(Family family, double alpha) : family_(family), alpha_(alpha)
    {
        if (!std::isfinite(alpha) || !(alpha > 1.0))
            throw std::invalid_argument("perturbation shape alpha must be finite and > 1, got " +
                                        std::to_string(alpha));
    }

    static PerturbationSpec frechet(double alpha) { return {Family::Frechet, alpha}; }
    static PerturbationSpec pareto(double alpha) { return {Family::Pareto, alpha}; }

    Family family() const noexcept { return family_; }
    double alpha() const noexcept { return alpha_; }

    /// Left end of the support: 0 for Frechet, 1 for Pareto.
    double left_endpoint() const noexcept { return family_ == Family::Frechet ? 0.0 : 1.0; }

    friend bool operator==(const PerturbationSpec&, const PerturbationSpec&) = default;

private:
    Family family_;
    double alpha_;
};

// ---------------------------------------------------------------------------
// Special functions

/// log Gamma(x) for x > 0, reentrant (std::lgamma writes the global signgam).
inline double log_gamma(double x)
{
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

inline double gamma_fn(double x) { return std::tgamma(x); }

/// Gamma(a) / Gamma(b) for a, b > 0 without overflow.
inline double gamma_ratio(double a, double b) { return std::exp(log_gamma(a) - log_gamma(b)); }

inline double beta_fn(double a, double b)
{
    return std::exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b));
}

// ---------------------------------------------------------------------------
// Distribution functions

inline double cdf(const PerturbationSpec& spec, double x)
{
    const double a = spec.alpha();
    if (spec.family() == Family::Frechet)
        return x <= 0.0 ? 0.0 : std::exp(-std::pow(x, -a));
    return x <= 1.0 ? 0.0 : 1.0 - std::pow(x, -a);
}

/// 1 - cdf, computed without cancellation in the upper tail.
inline double survival(const PerturbationSpec& spec, double x)
{
    const double a = spec.alpha();
    if (spec.family() == Family::Frechet)
        return x <= 0.0 ? 1.0 : -std::expm1(-std::pow(x, -a));
    return x <= 1.0 ? 1.0 : std::pow(x, -a);
}

inline double pdf(const PerturbationSpec& spec, double x)
{
    const double a = spec.alpha();
    if (spec.family() == Family::Frechet) {
        if (x <= 0.0)
            return 0.0;
        const double t = std::pow(x, -a);
        const double e = std::exp(-t);
        return e == 0.0 ? 0.0 : a * t / x * e;
    }
    return x < 1.0 ? 0.0 : a * std::pow(x, -a - 1.0);
}

/// Quantile function on (0,1). Frechet: (-ln u)^(-1/alpha); Pareto: (1-u)^(-1/alpha).
inline double inverse_cdf(const PerturbationSpec& spec, double u)
{
    if (!(u > 0.0 && u < 1.0))
        throw std::invalid_argument("inverse_cdf: u must lie in the open interval (0,1)");
    const double a = spec.alpha();
    if (spec.family() == Family::Frechet) {
        const double e = -std::log(u);
        return a == 2.0 ? 1.0 / std::sqrt(e) : std::pow(e, -1.0 / a);
    }
    const double tail = 1.0 - u;
    return a == 2.0 ? 1.0 / std::sqrt(tail) : std::pow(tail, -1.0 / a);
}

inline double mean(const PerturbationSpec& spec)
{
    const double a = spec.alpha();
    return spec.family() == Family::Frechet ? gamma_fn(1.0 - 1.0 / a) : a / (a - 1.0);
}

// ---------------------------------------------------------------------------
// Sampling

/// Maps uniforms in (0,1) to quantiles in place. Same values as calling
/// inverse_cdf entry by entry; the branches are hoisted so the loops vectorize.
inline void inverse_cdf_in_place(const PerturbationSpec& spec, std::span<double> u)
{
    const double a = spec.alpha();
    const double e = -1.0 / a;
    if (spec.family() == Family::Frechet) {
        if (a == 2.0)
            for (double& x : u)
                x = 1.0 / std::sqrt(-std::log(x));
        else
            for (double& x : u)
                x = std::pow(-std::log(x), e);
    } else {
        if (a == 2.0)
            for (double& x : u)
                x = 1.0 / std::sqrt(1.0 - x);
        else
            for (double& x : u)
                x = std::pow(1.0 - x, e);
    }
}

/// Fills `out` with i.i.d. draws, one uniform per entry in index order.
template <class Engine>
void sample_into(const PerturbationSpec& spec, std::span<double> out, Engine& rng)
{
    for (double& r : out)
        r = uniform_open01(rng);
    inverse_cdf_in_place(spec, out);
}

template <class Engine>
std::vector<double> sample(const PerturbationSpec& spec, std::size_t n, Engine& rng)
{
    if (n == 0)
        throw std::invalid_argument("sample: n must be >= 1");
    std::vector<double> out(n);
    sample_into(spec, std::span<double>(out), rng);
    return out;
}

// ---------------------------------------------------------------------------
// Order statistics and penalty bound

/// Mean of the k-th largest of n i.i.d. Pareto(alpha) draws (k = 1 is the
/// maximum):  Gamma(n+1) Gamma(k - 1/alpha) / (Gamma(k) Gamma(n + 1 - 1/alpha)).
inline double pareto_order_statistic_mean(double alpha, std::size_t k, std::size_t n)
{
    if (!(alpha > 1.0))
        throw std::invalid_argument("pareto_order_statistic_mean: alpha must be > 1");
    if (k < 1 || k > n)
        throw std::invalid_argument("pareto_order_statistic_mean: need 1 <= k <= n");
    const double inv = 1.0 / alpha;
    const auto nd = static_cast<double>(n);
    const auto kd = static_cast<double>(k);
    return std::exp(log_gamma(nd + 1.0) + log_gamma(kd - inv) - log_gamma(kd) -
                    log_gamma(nd + 1.0 - inv));
}

/// Upper bound on E[sum of the m largest of d draws]:
/// (alpha/(alpha-1) m^(1-1/alpha) + Gamma(1-1/alpha)) (d+1)^(1/alpha), plus m for Frechet.
inline double penalty_bound(const PerturbationSpec& spec, std::size_t d, std::size_t m)
{
    if (m < 1 || m > d)
        throw std::invalid_argument("penalty_bound: need 1 <= m <= d");
    const double a = spec.alpha();
    const auto md = static_cast<double>(m);
    const double pareto_part = (a / (a - 1.0) * std::pow(md, 1.0 - 1.0 / a) + gamma_fn(1.0 - 1.0 / a)) *
                               std::pow(static_cast<double>(d) + 1.0, 1.0 / a);
    return spec.family() == Family::Frechet ? pareto_part + md : pareto_part;
}

} // namespace semiband
