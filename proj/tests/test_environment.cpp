#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "semiband/environment.hpp"
#include "semiband/harness/experiment.hpp"

using namespace semiband;

namespace {

LossTable random_table(Rng& rng, std::size_t T, std::size_t d)
{
    LossTable t(T, std::vector<double>(d));
    for (auto& row : t)
        for (auto& x : row)
            x = uniform_open01(rng);
    return t;
}

RegretTrace trace_of(const std::vector<Action>& actions, const LossTable& table)
{
    RegretTrace tr;
    for (std::size_t t = 0; t < actions.size(); ++t) {
        TraceRecord r;
        r.t = t + 1;
        r.action = actions[t];
        for (auto i : actions[t].indices())
            r.round_loss += table[t][i];
        tr.records.push_back(r);
    }
    return tr;
}

} // namespace

TEST(Environment, RejectsBadConstruction)
{
    EXPECT_THROW(EnvironmentSpec(StochasticBernoulli{{0.5, 0.5}}, 3, 10), std::invalid_argument);
    EXPECT_THROW(EnvironmentSpec(StochasticBernoulli{{0.5, 1.5}}, 2, 10), std::invalid_argument);
    EXPECT_THROW(EnvironmentSpec(StochasticBernoulli{{0.5, NAN}}, 2, 10), std::invalid_argument);
    EXPECT_THROW(EnvironmentSpec(StochasticBernoulli{{0.5}}, 1, 0), std::invalid_argument);
    EXPECT_THROW(EnvironmentSpec(FixedSchedule{{{0.1, 0.2}}}, 2, 2), std::invalid_argument);
    EXPECT_THROW(EnvironmentSpec(FixedSchedule{{{0.1, 0.2, 0.3}}}, 2, 1), std::invalid_argument);
    EXPECT_THROW(EnvironmentSpec(FixedSchedule{{{0.1, -0.2}}}, 2, 1), std::invalid_argument);
    EXPECT_THROW(EnvironmentSpec(AdaptiveHook{}, 2, 1), std::invalid_argument);
}

TEST(Environment, ZeroMeanBernoulliIsAlwaysZero)
{
    const EnvironmentSpec env(StochasticBernoulli{std::vector<double>(4, 0.0)}, 4, 1000);
    Rng rng = make_rng(1);
    for (std::size_t t = 1; t <= 1000; ++t)
        EXPECT_EQ(env.next_loss(t, {}, rng), std::vector<double>(4, 0.0));
    const EnvironmentSpec ones(StochasticBernoulli{std::vector<double>(2, 1.0)}, 2, 10);
    EXPECT_EQ(ones.next_loss(3, {}, rng), std::vector<double>(2, 1.0));
}

TEST(Environment, BernoulliMeansConcentrate)
{
    const std::size_t d = 3, n = 100000;
    const EnvironmentSpec env(StochasticBernoulli{std::vector<double>(d, 0.5)}, d, n);
    Rng rng = make_rng(2);
    std::vector<double> sum(d, 0.0);
    for (std::size_t t = 1; t <= n; ++t) {
        const auto l = env.next_loss(t, {}, rng);
        for (std::size_t i = 0; i < d; ++i)
            sum[i] += l[i];
    }
    const double sd = std::sqrt(0.25 / n);
    for (double s : sum)
        EXPECT_NEAR(s / n, 0.5, 3 * sd);
    EXPECT_EQ(env.expected_loss(7), std::vector<double>(d, 0.5));
}

TEST(Environment, FixedScheduleReturnsRowsVerbatim)
{
    Rng rng = make_rng(3);
    const LossTable table = random_table(rng, 20, 5);
    const EnvironmentSpec env(FixedSchedule{table}, 5, 20);
    for (std::size_t t = 1; t <= 20; ++t) {
        EXPECT_EQ(env.next_loss(t, {}, rng), table[t - 1]);
        EXPECT_EQ(env.expected_loss(t), table[t - 1]);
    }
    EXPECT_THROW(env.next_loss(0, {}, rng), std::invalid_argument);
    EXPECT_THROW(env.next_loss(21, {}, rng), std::invalid_argument);
}

TEST(Environment, HookSeesHistoryAndIsChecked)
{
    std::vector<std::size_t> seen;
    const EnvironmentSpec env(AdaptiveHook{[&](std::size_t t, const History& h) {
                                  seen.push_back(h.size());
                                  EXPECT_EQ(h.size(), t - 1);
                                  std::vector<double> l(3, 0.2);
                                  if (!h.empty())
                                      for (auto i : h.back().action.indices())
                                          l[i] = 0.9; // punish what was just played
                                  return l;
                              }},
                              3, 5);
    Rng rng = make_rng(4);
    History hist;
    for (std::size_t t = 1; t <= 5; ++t) {
        const auto l = env.next_loss(t, hist, rng);
        const Action a({t % 3}, 3);
        if (t > 1) {
            EXPECT_EQ(l[(t - 1) % 3], 0.9);
        }
        hist.push_back({l, a});
    }
    EXPECT_EQ(seen, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
    EXPECT_FALSE(env.expected_loss(1).has_value());

    const EnvironmentSpec bad(AdaptiveHook{[](std::size_t, const History&) { return std::vector<double>{0.5, 1.2}; }},
                              2, 3);
    EXPECT_THROW(bad.next_loss(1, {}, rng), std::invalid_argument);
    const EnvironmentSpec short_row(AdaptiveHook{[](std::size_t, const History&) { return std::vector<double>{0.5}; }},
                                    2, 3);
    EXPECT_THROW(short_row.next_loss(1, {}, rng), std::invalid_argument);
}

TEST(Schedules, ConstantGap)
{
    const auto t = constant_gap_schedule(5, 2, 4, 0.2);
    ASSERT_EQ(t.size(), 4u);
    for (const auto& row : t)
        EXPECT_EQ(row, (std::vector<double>{0.4, 0.4, 0.6, 0.6, 0.6}));
    EXPECT_THROW(constant_gap_schedule(3, 4, 2, 0.1), std::invalid_argument);
}

TEST(Schedules, SwitchingFlipsEveryTenth)
{
    const auto t = switching_schedule(4, 1, 100, 0.4);
    for (std::size_t r = 0; r < 100; ++r) {
        const bool flipped = (r / 10) % 2 == 1;
        EXPECT_EQ(t[r][0], flipped ? 0.7 : 0.3);
        EXPECT_EQ(t[r][3], flipped ? 0.3 : 0.7);
    }
    EXPECT_EQ(switching_schedule(2, 1, 5, 0.2).size(), 5u); // epoch floor of 1
}

TEST(Schedules, SinusoidalStaysInRange)
{
    const auto t = sinusoidal_schedule(6, 300, 50.0, 0.5);
    for (const auto& row : t)
        for (double x : row) {
            EXPECT_GE(x, 0.0);
            EXPECT_LE(x, 1.0);
        }
    EXPECT_NEAR(t[49][0], 0.5, 1e-12); // a full period after t = 0
    EXPECT_THROW(sinusoidal_schedule(2, 10, 0.0), std::invalid_argument);
    EXPECT_THROW(sinusoidal_schedule(2, 10, 5.0, 0.6), std::invalid_argument);
}

TEST(Schedules, BernoulliGapMeans)
{
    EXPECT_EQ(bernoulli_gap_means(4, 1, 0.2), (std::vector<double>{0.4, 0.6, 0.6, 0.6}));
}

TEST(ScheduleCsv, RoundTrip)
{
    Rng rng = make_rng(5);
    const LossTable table = random_table(rng, 7, 3);
    std::stringstream ss;
    write_schedule_csv(ss, table);
    EXPECT_EQ(read_schedule_csv(ss), table);
}

TEST(ScheduleCsv, ErrorsNameTheLine)
{
    auto err = [](const std::string& text) {
        std::istringstream in(text);
        try {
            read_schedule_csv(in, "s.csv");
        } catch (const std::invalid_argument& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(err("").find("s.csv:1"), std::string::npos);
    EXPECT_NE(err("x,loss_0\n").find("s.csv:1"), std::string::npos);
    EXPECT_NE(err("t,loss_0\n1,0.5\n2,1.5\n").find("s.csv:3"), std::string::npos);
    EXPECT_NE(err("t,loss_0\n1,0.5\n3,0.5\n").find("s.csv:3"), std::string::npos);
    EXPECT_NE(err("t,loss_0,loss_1\n1,0.5\n").find("s.csv:2"), std::string::npos);
    EXPECT_NE(err("t,loss_0\n1,abc\n").find("s.csv:2"), std::string::npos);
    EXPECT_NE(err("t,loss_0\n").find("no rounds"), std::string::npos);
    EXPECT_THROW(load_schedule_csv("/nonexistent/file.csv"), std::runtime_error);
}

TEST(PseudoRegret, ZeroWhenPlayingTheBestAction)
{
    Rng rng = make_rng(6);
    const LossTable table = random_table(rng, 50, 6);
    const Action best = best_fixed_action(table, 2);
    const auto tr = trace_of(std::vector<Action>(50, best), table);
    EXPECT_NEAR(pseudo_regret(tr, table), 0.0, 1e-12);
}

TEST(PseudoRegret, WorstArmEveryRound)
{
    const std::size_t T = 40;
    const LossTable table(T, std::vector<double>{0.0, 1.0});
    const auto tr = trace_of(std::vector<Action>(T, Action({1}, 2)), table);
    EXPECT_DOUBLE_EQ(pseudo_regret(tr, table), static_cast<double>(T));
    EXPECT_DOUBLE_EQ(tr.cumulative_loss().back(), static_cast<double>(T));
}

TEST(PseudoRegret, RejectsMismatch)
{
    const LossTable table(3, std::vector<double>{0.0, 1.0});
    EXPECT_THROW(pseudo_regret(trace_of(std::vector<Action>(2, Action({1}, 2)), LossTable(2, {0.0, 1.0})), table),
                 std::invalid_argument);
    EXPECT_THROW(pseudo_regret(trace_of(std::vector<Action>(3, Action({1}, 3)), LossTable(3, {0.0, 1.0, 0.0})),
                               table),
                 std::invalid_argument);
    EXPECT_THROW(pseudo_regret(RegretTrace{}, table), std::invalid_argument);
}

TEST(PseudoRegret, HindsightOptimumMatchesExhaustiveSearch)
{
    Rng rng = make_rng(7);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t d = 1 + uniform_index(rng, 10);
        const std::size_t m = 1 + uniform_index(rng, d);
        const std::size_t T = 1 + uniform_index(rng, 12);
        LossTable table = random_table(rng, T, d);
        if (rep % 4 == 0)
            for (auto& row : table)
                for (auto& x : row)
                    x = std::round(x); // ties
        const Action best = best_fixed_action(table, m);
        double v = 0.0;
        for (const auto& row : table)
            for (auto i : best.indices())
                v += row[i];
        EXPECT_NEAR(v, oracle::brute_best_total(table, m), 1e-12);
    }
}

TEST(PseudoRegret, AveragedRegretIsNonNegative)
{
    ExperimentConfig c;
    c.d = 4;
    c.m = 2;
    c.T = 300;
    c.spec = PerturbationSpec::pareto(2);
    c.environment.kind = "bernoulli";
    c.environment.gap = 0.3;
    c.replications = 100;
    c.base_seed = 11;
    c.output_path.clear();
    c.regret_reference = RegretReference::Expected;
    const RunSummary s = run_experiment(c);
    const double se = s.stddev_regret / std::sqrt(100.0);
    EXPECT_GE(s.mean_regret, -3 * se);
    bool some_negative_or_positive = false;
    for (const auto& r : s.replications)
        some_negative_or_positive = some_negative_or_positive || r.pseudo_regret != 0.0;
    EXPECT_TRUE(some_negative_or_positive);
}
