#pragma once

// Follow-the-Perturbed-Leader over the size-invariant action set with a
// resampling estimator, plus the tuned learning rate and regret bound.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "semiband/perturbation.hpp"
#include "semiband/resampling.hpp"
#include "semiband/selection.hpp"
#include "semiband/stability.hpp"

namespace semiband {

namespace detail {

inline void validate_horizon(std::size_t m, std::size_t d, std::size_t T)
{
    if (m < 1 || m > d)
        throw std::invalid_argument("need 1 <= m <= d (m = " + std::to_string(m) + ", d = " +
                                    std::to_string(d) + ")");
    if (T < 1)
        throw std::invalid_argument("horizon T must be >= 1");
}

} // namespace detail

/// Learning rate that balances penalty and stability for a known horizon T.
inline double theoretical_learning_rate(const PerturbationSpec& spec, std::size_t m, std::size_t d,
                                        std::size_t T)
{
    detail::validate_horizon(m, d, T);
    const double a = spec.alpha();
    const auto md = static_cast<double>(m);
    const auto dd = static_cast<double>(d);
    const auto Td = static_cast<double>(T);
    const double g = gamma_fn(1.0 - 1.0 / a);
    const double head = std::pow(md + 1.0 / a, 1.0 / a);
    if (spec.family() == Family::Frechet) {
        const double num = (a / (a - 1.0) * std::pow(md, 1.0 - 1.0 / a) + g) * std::pow(dd + 1.0, 1.0 / a) + md;
        const double den = 2.0 * (a + 1.0) * head * (md + a / (a - 1.0) * std::pow(dd - md + 1.0, 1.0 - 1.0 / a)) * Td;
        return std::sqrt(num / den);
    }
    const double num = (a * std::pow(md, 1.0 - 1.0 / a) + (a - 1.0) * g) * std::pow(dd + 1.0, 1.0 / a);
    const double den = 4.0 * a * a * head * std::pow(dd, 1.0 - 1.0 / a) * Td;
    return std::sqrt(num / den);
}

struct RegretBound {
    double total = 0.0;           ///< the pseudo-regret bound at the tuned learning rate
    double penalty_const = 0.0;   ///< P: penalty term is P / eta
    double stability_const = 0.0; ///< S: stability term is S * eta * T
};

inline RegretBound theoretical_regret_bound(const PerturbationSpec& spec, std::size_t m, std::size_t d,
                                            std::size_t T)
{
    detail::validate_horizon(m, d, T);
    const double a = spec.alpha();
    const auto md = static_cast<double>(m);
    const auto dd = static_cast<double>(d);
    const auto Td = static_cast<double>(T);
    const double g = gamma_fn(1.0 - 1.0 / a);
    const double head = std::pow(md + 1.0 / a, 1.0 / a);
    const double inner = a / (a - 1.0) * std::pow(md, 1.0 - 1.0 / a) + g;

    RegretBound out;
    out.penalty_const = penalty_bound(spec, d, m);
    out.stability_const = stability_constant(spec, m, d);
    if (spec.family() == Family::Frechet) {
        const double s = 2.0 * (a + 1.0) * head * (md + a / (a - 1.0) * std::pow(dd - md + 1.0, 1.0 - 1.0 / a));
        const double p = inner * std::pow(dd + 1.0, 1.0 / a) + md;
        out.total = 2.0 * std::sqrt(s * p * Td);
    } else {
        out.total = 4.0 * a / std::sqrt(a - 1.0) *
                    std::sqrt(head * inner * std::pow(dd, 1.0 - 1.0 / a) * std::pow(dd + 1.0, 1.0 / a) * Td);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Policy loop

struct RoundOutcome {
    Action action;
    std::vector<double> observed_losses; ///< aligned with action.indices()
    EstimatorReport estimate;
    std::vector<double> est_losses;      ///< l_i * (1/w_i estimate), aligned with action.indices()
    std::optional<std::string> warning;
};

class PolicyState {
public:
    PolicyState(std::size_t d, std::size_t m, double eta, PerturbationSpec spec, EstimatorKind estimator,
                ResamplingBudget budget = {})
        : cum_est_loss_(d, 0.0), m_(m), eta_(eta), spec_(spec), estimator_(estimator), budget_(budget)
    {
        if (m < 1 || m > d)
            throw std::invalid_argument("PolicyState: need 1 <= m <= d");
        if (!std::isfinite(eta) || !(eta > 0.0))
            throw std::invalid_argument("PolicyState: eta must be finite and > 0");
    }

    std::size_t dimension() const noexcept { return cum_est_loss_.size(); }
    std::size_t m() const noexcept { return m_; }
    double eta() const noexcept { return eta_; }
    const PerturbationSpec& spec() const noexcept { return spec_; }
    EstimatorKind estimator() const noexcept { return estimator_; }
    const ResamplingBudget& budget() const noexcept { return budget_; }
    std::size_t round() const noexcept { return round_; }
    std::span<const double> cum_est_loss() const noexcept { return cum_est_loss_; }

    /// Replaces the cumulative estimated losses, e.g. to resume a run.
    void set_cum_est_loss(std::vector<double> L)
    {
        if (L.size() != cum_est_loss_.size())
            throw std::invalid_argument("PolicyState: cumulative loss has the wrong dimension");
        for (double x : L)
            if (!std::isfinite(x) || x < 0.0)
                throw std::invalid_argument("PolicyState: cumulative losses must be finite and >= 0");
        cum_est_loss_ = std::move(L);
    }

    /// One FTPL round: perturb, select the m best of r - eta*Lhat, observe
    /// only the selected arms through `loss_oracle(arm)`, estimate 1/w for
    /// them and accumulate the importance-weighted losses.
    template <class Oracle, class Engine>
    RoundOutcome play(Oracle&& loss_oracle, Engine& rng, ResamplingWorkspace* ws = nullptr)
    {
        const std::size_t d = dimension();
        std::vector<double> score = sample(spec_, d, rng);
        for (std::size_t j = 0; j < d; ++j)
            score[j] -= eta_ * cum_est_loss_[j];

        RoundOutcome out;
        out.action = select_top_m(score, m_);

        out.observed_losses.reserve(m_);
        for (auto i : out.action.indices()) {
            const double loss = loss_oracle(i);
            if (!(loss >= 0.0 && loss <= 1.0))
                throw std::invalid_argument("loss for arm " + std::to_string(i) + " outside [0,1]: " +
                                        std::to_string(loss));
            out.observed_losses.push_back(loss);
        }

        if (estimator_ == EstimatorKind::GR) {
            out.estimate = geometric_resample(cum_est_loss_, eta_, out.action, spec_, rng, budget_, ws);
        } else {
            const RankProfile sigma = ascending_ranks(cum_est_loss_);
            out.estimate =
                conditional_geometric_resample(cum_est_loss_, eta_, out.action, sigma, spec_, rng, budget_, ws);
        }
        if (out.estimate.capped)
            out.warning = "resampling budget of " + std::to_string(budget_.cap) +
                          " iterations exhausted in round " + std::to_string(round_ + 1);

        out.est_losses.resize(m_);
        for (std::size_t p = 0; p < m_; ++p) {
            out.est_losses[p] = out.observed_losses[p] * out.estimate.inv_prob[p];
            cum_est_loss_[out.action.indices()[p]] += out.est_losses[p];
        }
        ++round_;
        return out;
    }

private:
    std::vector<double> cum_est_loss_;
    std::size_t m_;
    double eta_;
    PerturbationSpec spec_;
    EstimatorKind estimator_;
    ResamplingBudget budget_;
    std::size_t round_ = 0;
};

template <class Oracle, class Engine>
RoundOutcome play_round(PolicyState& state, Oracle&& loss_oracle, Engine& rng, ResamplingWorkspace* ws = nullptr)
{
    return state.play(std::forward<Oracle>(loss_oracle), rng, ws);
}

} // namespace semiband
