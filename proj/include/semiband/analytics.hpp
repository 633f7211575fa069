#pragma once

// Selection probabilities phi and the 1/r-weighted integrals J by
// quadrature, the ratio bounds that drive the stability analysis, and the
// counterexample ratio. Everything here is exact up to quadrature error and
// serves as the oracle for the Monte Carlo estimators.
//
// With z the perturbed score of arm i and u = F(z + lambda_i), every
// integral becomes one over (0,1):
//   phi_{i,theta} = int_0^1 P(exactly theta-1 rivals beat z) du
//   J_{i,theta}   = int_0^1 P(...) / F^{-1}(u) du
// where rival j beats z with probability 1 - F(F^{-1}(u) - lambda_i + lambda_j).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "semiband/perturbation.hpp"
#include "semiband/poisson_binomial.hpp"
#include "semiband/quadrature.hpp"
#include "semiband/random.hpp"
#include "semiband/selection.hpp"
#include "semiband/stability.hpp"

namespace semiband {

/// lambda = eta * Lhat together with the competing subset B and its budget.
class LambdaProfile {
public:
    /// `subset` empty means every arm.
    LambdaProfile(std::vector<double> lambda, std::size_t budget, std::vector<std::size_t> subset = {})
        : lambda_(std::move(lambda)), members_(std::move(subset)), budget_(budget)
    {
        if (lambda_.empty())
            throw std::invalid_argument("LambdaProfile: lambda must be non-empty");
        for (std::size_t j = 0; j < lambda_.size(); ++j)
            if (!std::isfinite(lambda_[j]) || lambda_[j] < 0.0)
                throw std::invalid_argument("LambdaProfile: lambda[" + std::to_string(j) +
                                            "] must be finite and >= 0");
        if (members_.empty()) {
            members_.resize(lambda_.size());
            std::iota(members_.begin(), members_.end(), std::size_t{0});
        }
        std::sort(members_.begin(), members_.end());
        if (std::adjacent_find(members_.begin(), members_.end()) != members_.end())
            throw std::invalid_argument("LambdaProfile: duplicate subset member");
        if (members_.back() >= lambda_.size())
            throw std::invalid_argument("LambdaProfile: subset member out of range");
        if (budget_ < 1 || budget_ > members_.size())
            throw std::invalid_argument("LambdaProfile: budget must lie in [1, |B|]");
    }

    const std::vector<double>& lambda() const noexcept { return lambda_; }
    const std::vector<std::size_t>& members() const noexcept { return members_; }
    std::size_t budget() const noexcept { return budget_; }
    std::size_t dimension() const noexcept { return lambda_.size(); }

    bool contains(std::size_t i) const { return std::binary_search(members_.begin(), members_.end(), i); }

private:
    std::vector<double> lambda_;
    std::vector<std::size_t> members_;
    std::size_t budget_;
};

namespace detail {

/// int_0^1 w(u) * P(lo <= #rivals beating z <= hi) du, w = 1 or 1/F^{-1}(u).
inline QuadratureResult rank_integral(const LambdaProfile& prof, std::size_t i, std::size_t lo, std::size_t hi,
                                      const PerturbationSpec& spec, bool inverse_weight,
                                      const QuadratureSettings& settings)
{
    if (!prof.contains(i))
        throw std::invalid_argument("arm " + std::to_string(i) + " is not in the competing subset");
    const auto& lam = prof.lambda();
    std::vector<double> shift; // lambda_j - lambda_i over rivals
    for (auto j : prof.members())
        if (j != i)
            shift.push_back(lam[j] - lam[i]);

    std::vector<double> breaks;
    for (double s : shift)
        if (s < 0.0) {
            // Below 1e-12 the panel to its left carries no measurable mass and
            // the tiny subinterval only trips the roundoff detector.
            const double u = cdf(spec, spec.left_endpoint() - s);
            if (u > 1e-12 && u < 1.0)
                breaks.push_back(u);
        }

    std::vector<double> p(shift.size());
    std::vector<double> pmf(hi + 1);
    auto integrand = [&](double u) {
        const double y = inverse_cdf(spec, u);
        for (std::size_t k = 0; k < shift.size(); ++k)
            p[k] = survival(spec, y + shift[k]);
        poisson_binomial_pmf_into(p, pmf);
        double s = 0.0;
        for (std::size_t c = lo; c <= hi; ++c)
            s += pmf[c];
        return inverse_weight ? s / y : s;
    };
    return integrate(integrand, 0.0, 1.0, breaks, settings);
}

inline void check_theta(const LambdaProfile& prof, std::size_t theta)
{
    if (theta < 1 || theta > prof.members().size())
        throw std::invalid_argument("theta = " + std::to_string(theta) + " outside [1, |B|]");
}

} // namespace detail

/// P(arm i ranks theta-th within B under r - lambda).
inline QuadratureResult phi_i_theta(const LambdaProfile& prof, std::size_t i, std::size_t theta,
                                    const PerturbationSpec& spec, const QuadratureSettings& settings = {})
{
    detail::check_theta(prof, theta);
    return detail::rank_integral(prof, i, theta - 1, theta - 1, spec, false, settings);
}

/// P(arm i ranks within the top budget of B).
inline QuadratureResult phi_i(const LambdaProfile& prof, std::size_t i, const PerturbationSpec& spec,
                              const QuadratureSettings& settings = {})
{
    return detail::rank_integral(prof, i, 0, prof.budget() - 1, spec, false, settings);
}

/// E[1/r_i ; arm i ranks theta-th within B].
inline QuadratureResult j_i_theta(const LambdaProfile& prof, std::size_t i, std::size_t theta,
                                  const PerturbationSpec& spec, const QuadratureSettings& settings = {})
{
    detail::check_theta(prof, theta);
    return detail::rank_integral(prof, i, theta - 1, theta - 1, spec, true, settings);
}

/// E[1/r_i ; arm i ranks within the top budget of B].
inline QuadratureResult j_i(const LambdaProfile& prof, std::size_t i, const PerturbationSpec& spec,
                            const QuadratureSettings& settings = {})
{
    return detail::rank_integral(prof, i, 0, prof.budget() - 1, spec, true, settings);
}

/// a/b with first-order error propagation.
inline QuadratureResult quotient(const QuadratureResult& a, const QuadratureResult& b)
{
    if (!(b.value > 0.0))
        throw std::invalid_argument("quotient: denominator is not positive");
    const double r = a.value / b.value;
    return {r, std::abs(r) * (a.error / std::abs(a.value == 0.0 ? 1.0 : a.value) + b.error / b.value)};
}

/// J_{i,theta}/phi_{i,theta} when all of B shares one lambda and |B| = n,
/// Pareto only: B(theta + 1/alpha, n - theta + 1) / B(theta, n - theta + 1).
inline double pareto_equal_lambda_ratio(double alpha, std::size_t n, std::size_t theta)
{
    if (!(alpha > 1.0))
        throw std::invalid_argument("pareto_equal_lambda_ratio: alpha must be > 1");
    if (theta < 1 || theta > n)
        throw std::invalid_argument("pareto_equal_lambda_ratio: need 1 <= theta <= n");
    const double t = static_cast<double>(theta);
    const double rest = static_cast<double>(n - theta + 1);
    return std::exp(log_gamma(t + 1.0 / alpha) - log_gamma(t + 1.0 / alpha + rest) - log_gamma(t) +
                    log_gamma(t + rest));
}

// ---------------------------------------------------------------------------
// Ratio bound checks

struct RatioCheck {
    std::size_t i = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = false;
    double err_estimate = 0.0;
};

/// Closed-form bound on J_i/phi_i for an arm of ascending rank sigma_i.
///   Frechet: ((sigma^m + 1/a) / ((sigma-m+1) v 1))^(1/a)
///   Pareto:  (2a/(a+1)) ((sigma^m + 1/a) / sigma)^(1/a)
inline double sigma_ratio_bound(const PerturbationSpec& spec, std::size_t m, std::size_t sigma_i)
{
    if (m < 1 || sigma_i < 1)
        throw std::invalid_argument("sigma_ratio_bound: need m >= 1 and sigma_i >= 1");
    const double a = spec.alpha();
    const auto s = static_cast<double>(sigma_i);
    const auto md = static_cast<double>(m);
    const double top = std::min(s, md) + 1.0 / a;
    if (spec.family() == Family::Frechet)
        return std::pow(top / std::max(s - md + 1.0, 1.0), 1.0 / a);
    return 2.0 * a / (a + 1.0) * std::pow(top / s, 1.0 / a);
}

/// For every arm: lhs = J_i/phi_i on the full arm set with budget m, rhs the
/// rank-based closed form.
inline std::vector<RatioCheck> check_sigma_ratio_bound(const LambdaProfile& prof, const PerturbationSpec& spec,
                                                       double slack = 1e-6,
                                                       const QuadratureSettings& settings = {})
{
    const std::size_t d = prof.dimension();
    if (prof.members().size() != d)
        throw std::invalid_argument("check_sigma_ratio_bound: profile must cover every arm");
    if (d > 10)
        throw std::invalid_argument("check_sigma_ratio_bound: d must be <= 10");
    const RankProfile sigma = ascending_ranks(prof.lambda());
    std::vector<RatioCheck> out;
    out.reserve(d);
    for (std::size_t i = 0; i < d; ++i) {
        const auto q = quotient(j_i(prof, i, spec, settings), phi_i(prof, i, spec, settings));
        RatioCheck c;
        c.i = i;
        c.lhs = q.value;
        c.rhs = sigma_ratio_bound(spec, prof.budget(), sigma[i]);
        c.ok = c.lhs <= c.rhs + slack;
        c.err_estimate = q.error;
        out.push_back(c);
    }
    return out;
}

struct FlatteningCheck : RatioCheck {
    std::size_t best_w = 0;     ///< arms below the block B_{i,w}
    std::size_t best_theta = 0; ///< rank inside the block attaining rhs
};

/// Compares J_i/phi_i at lambda (sorted ascending, arm i 0-based) with the
/// largest J_{i,theta}/phi_{i,theta} over the flattened profiles: every
/// lambda_k with k <= i raised to lambda_i and the competition restricted to
/// the block {w, ..., i}, for w in {0, ..., (m ^ (i+1)) - 1} and theta in
/// [1, (m ^ (i+1)) - w].
inline FlatteningCheck check_lambda_star_bound(const LambdaProfile& prof, std::size_t i,
                                               const PerturbationSpec& spec, double slack = 1e-6,
                                               const QuadratureSettings& settings = {})
{
    const std::size_t d = prof.dimension();
    const auto& lam = prof.lambda();
    if (prof.members().size() != d)
        throw std::invalid_argument("check_lambda_star_bound: profile must cover every arm");
    if (d > 8)
        throw std::invalid_argument("check_lambda_star_bound: d must be <= 8");
    if (!std::is_sorted(lam.begin(), lam.end()))
        throw std::invalid_argument("check_lambda_star_bound: lambda must be sorted ascending");
    if (i >= d)
        throw std::invalid_argument("check_lambda_star_bound: arm index out of range");

    const std::size_t m = prof.budget();
    const auto q = quotient(j_i(prof, i, spec, settings), phi_i(prof, i, spec, settings));
    FlatteningCheck c;
    c.i = i;
    c.lhs = q.value;
    c.err_estimate = q.error;
    c.rhs = -1.0;

    std::vector<double> flat(lam);
    std::fill_n(flat.begin(), i + 1, lam[i]);
    const std::size_t cap = std::min(m, i + 1);
    for (std::size_t w = 0; w < cap; ++w) {
        std::vector<std::size_t> block(i + 1 - w);
        std::iota(block.begin(), block.end(), w);
        const LambdaProfile star(flat, 1, block);
        for (std::size_t theta = 1; theta + w <= cap; ++theta) {
            const auto r = quotient(j_i_theta(star, i, theta, spec, settings),
                                    phi_i_theta(star, i, theta, spec, settings));
            if (r.value > c.rhs) {
                c.rhs = r.value;
                c.best_w = w;
                c.best_theta = theta;
            }
            c.err_estimate = std::max(c.err_estimate, r.error);
        }
    }
    c.ok = c.lhs <= c.rhs + slack;
    return c;
}

// ---------------------------------------------------------------------------
// Counterexample

/// J_{N+k}/J_N for the configuration with Frechet(2) perturbations,
/// lambda_i = 0.5, one rival q0 at lambda_q0 and four more at lambda_i
/// inside the index set, and two arms outside it at lambda_i, where
///   J_N = int_0^inf (x+lambda_i)^-N (1-F(x+lambda_q0)) (1-F(x+lambda_i))^4 F(x+lambda_i)^2 dx.
inline QuadratureResult counterexample_ratio(double lambda_q0, std::size_t N = 3, std::size_t k = 1,
                                             const QuadratureSettings& settings = {})
{
    if (!std::isfinite(lambda_q0) || lambda_q0 < 0.0)
        throw std::invalid_argument("counterexample_ratio: lambda_q0 must be finite and >= 0");
    if (N < 1 || k < 1)
        throw std::invalid_argument("counterexample_ratio: need N >= 1 and k >= 1");
    const PerturbationSpec spec = PerturbationSpec::frechet(2.0);
    constexpr double lambda_i = 0.5;
    auto integral = [&](std::size_t power) {
        auto f = [&](double x) {
            const double y = x + lambda_i;
            const double Fi = cdf(spec, y);
            const double Si = survival(spec, y);
            return std::pow(y, -static_cast<double>(power)) * survival(spec, x + lambda_q0) * Si * Si * Si * Si *
                   Fi * Fi;
        };
        return integrate_to_infinity(f, 0.0, settings);
    };
    return quotient(integral(N + k), integral(N));
}

struct ScanPoint {
    double lambda_q0 = 0.0;
    double ratio = 0.0;
    double err_estimate = 0.0;
};

inline std::vector<ScanPoint> counterexample_scan(double lo, double hi, double step, std::size_t N = 3,
                                                  std::size_t k = 1, const QuadratureSettings& settings = {})
{
    if (!(step > 0.0) || !(hi >= lo))
        throw std::invalid_argument("counterexample_scan: need step > 0 and hi >= lo");
    std::vector<ScanPoint> out;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t s = 0; s <= n; ++s) {
        const double x = lo + static_cast<double>(s) * step;
        const auto r = counterexample_ratio(x, N, k, settings);
        out.push_back({x, r.value, r.error});
    }
    return out;
}

struct MonotonicityVerdict {
    bool strict_rise = false; ///< some step rises by more than margin x the combined error
    bool strict_fall = false;
    bool exceeds_baseline = false; ///< some point right of the baseline beats the baseline value
    double baseline = 0.0;

    bool non_monotone() const noexcept { return strict_rise && strict_fall; }
};

inline MonotonicityVerdict assess_scan(const std::vector<ScanPoint>& scan, double baseline_at = 0.5,
                                       double margin = 10.0)
{
    MonotonicityVerdict v;
    const ScanPoint* base = nullptr;
    for (const auto& p : scan)
        if (std::abs(p.lambda_q0 - baseline_at) < 1e-9)
            base = &p;
    for (std::size_t s = 1; s < scan.size(); ++s) {
        const double diff = scan[s].ratio - scan[s - 1].ratio;
        const double tol = margin * (scan[s].err_estimate + scan[s - 1].err_estimate);
        if (diff > tol)
            v.strict_rise = true;
        if (-diff > tol)
            v.strict_fall = true;
    }
    if (base) {
        v.baseline = base->ratio;
        for (const auto& p : scan)
            if (p.lambda_q0 > baseline_at &&
                p.ratio - base->ratio > margin * (p.err_estimate + base->err_estimate))
                v.exceeds_baseline = true;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Monte Carlo cross-check

/// Fraction of draws in which each arm ranks within the top budget of B
/// under r - lambda (zero outside B). One uniform per member per draw.
template <class Engine>
std::vector<double> mc_selection_prob(const LambdaProfile& prof, const PerturbationSpec& spec, std::size_t n_draws,
                                      Engine& rng)
{
    if (n_draws < 1)
        throw std::invalid_argument("mc_selection_prob: n_draws must be >= 1");
    const auto& members = prof.members();
    const std::size_t n = members.size();
    std::vector<double> score(n);
    std::vector<std::size_t> top;
    std::vector<std::size_t> hits(prof.dimension(), 0);
    for (std::size_t s = 0; s < n_draws; ++s) {
        for (std::size_t k = 0; k < n; ++k)
            score[k] = inverse_cdf(spec, uniform_open01(rng)) - prof.lambda()[members[k]];
        detail::top_k_heap(score, prof.budget(), top);
        for (auto k : top)
            ++hits[members[k]];
    }
    std::vector<double> out(prof.dimension());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = static_cast<double>(hits[j]) / static_cast<double>(n_draws);
    return out;
}

// ---------------------------------------------------------------------------
// Report CSV

struct CheckRow {
    std::string check;
    std::size_t instance_id = 0;
    std::size_t i = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = false;
    double err_estimate = 0.0;
};

inline void write_check_csv(std::ostream& out, const std::vector<CheckRow>& rows)
{
    const auto old = out.precision(17);
    out << "check,instance_id,i,lhs,rhs,ok,err_estimate\n";
    for (const auto& r : rows)
        out << r.check << ',' << r.instance_id << ',' << r.i << ',' << r.lhs << ',' << r.rhs << ','
            << (r.ok ? 1 : 0) << ',' << r.err_estimate << '\n';
    out.precision(old);
}

} // namespace semiband
