// Acceptance run: one PASS/FAIL line per criterion, detail CSVs under --out.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "semiband/semiband.hpp"

using namespace semiband;
namespace fs = std::filesystem;

namespace {

fs::path g_out;
int g_failed = 0;

void report(int id, const std::string& title, bool ok, const std::string& detail, double seconds)
{
    std::printf("%s %d %s: %s [%.1fs]\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    if (!ok)
        ++g_failed;
}

std::ofstream open_csv(const std::string& name)
{
    std::ofstream f(g_out / name, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + (g_out / name).string());
    f.precision(17);
    return f;
}

class Stopwatch {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

// ---------------------------------------------------------------------------
// Criteria 1, 3, 4 share one set of estimator runs.

struct Moments {
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    void add(double x)
    {
        const double x2 = x * x;
        s1 += x;
        s2 += x2;
        s3 += x2 * x;
        s4 += x2 * x2;
    }
};

struct ArmStats {
    double mean = 0;
    double second = 0;     ///< E[x^2]
    double second_se = 0;  ///< standard error of the E[x^2] estimate
    double var = 0;        ///< sample variance
    double var_se = 0;     ///< standard error of the sample variance
};

ArmStats finish(const Moments& mo, double n)
{
    ArmStats a;
    const double m1 = mo.s1 / n, m2 = mo.s2 / n, m3 = mo.s3 / n, m4 = mo.s4 / n;
    a.mean = m1;
    a.second = m2;
    a.second_se = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
    a.var = (m2 - m1 * m1) * n / (n - 1);
    const double mu4 = m4 - 4 * m1 * m3 + 6 * m1 * m1 * m2 - 3 * m1 * m1 * m1 * m1;
    a.var_se = std::sqrt(std::max(mu4 - a.var * a.var, 0.0) / n);
    return a;
}

struct EstimatorInstance {
    std::vector<double> lambda;
    Action chosen{{0}, 1};
    PerturbationSpec spec = PerturbationSpec::frechet(2.0);
};

struct EstimatorRow {
    std::size_t instance = 0;
    std::string family;
    double alpha = 0;
    std::size_t arm = 0;
    std::size_t sigma = 0;
    std::size_t m = 0;
    double w = 0;
    ArmStats gr, cgr;
    std::uint64_t capped = 0;
};

std::vector<EstimatorRow> run_estimators(std::size_t calls)
{
    constexpr std::size_t kInstances = 20;
    static constexpr double alphas[] = {1.5, 2.0, 3.0};
    std::vector<EstimatorRow> rows;
    for (std::size_t k = 0; k < kInstances; ++k) {
        Rng rng = make_rng(2024, k);
        const std::size_t d = 2 + uniform_index(rng, 7);
        const std::size_t m = 1 + uniform_index(rng, std::min<std::size_t>(4, d - 1));
        std::vector<double> lambda(d);
        for (auto& x : lambda)
            x = 1.5 * uniform_open01(rng);
        std::vector<std::size_t> arms(d);
        std::iota(arms.begin(), arms.end(), std::size_t{0});
        for (std::size_t j = d; j > 1; --j)
            std::swap(arms[j - 1], arms[uniform_index(rng, j)]);
        arms.resize(m);
        const Action chosen(arms, d);
        const RankProfile sigma = ascending_ranks(lambda);
        const LambdaProfile prof(lambda, m);
        const double alpha = alphas[k % 3];

        for (auto fam : {Family::Frechet, Family::Pareto}) {
            const PerturbationSpec spec(fam, alpha);
            std::vector<Moments> mg(m), mc(m);
            std::uint64_t capped = 0;
            ResamplingWorkspace ws;
            Rng rg = make_rng(77, 4 * k + (fam == Family::Pareto ? 2 : 0));
            Rng rc = make_rng(77, 4 * k + (fam == Family::Pareto ? 3 : 1));
            for (std::size_t n = 0; n < calls; ++n) {
                const auto g = geometric_resample(lambda, 1.0, chosen, spec, rg, ResamplingBudget{}, &ws);
                for (std::size_t p = 0; p < m; ++p)
                    mg[p].add(g.inv_prob[p]);
                capped += g.capped ? 1 : 0;
                const auto c =
                    conditional_geometric_resample(lambda, 1.0, chosen, sigma, spec, rc, ResamplingBudget{}, &ws);
                for (std::size_t p = 0; p < m; ++p)
                    mc[p].add(c.inv_prob[p]);
                capped += c.capped ? 1 : 0;
            }
            for (std::size_t p = 0; p < m; ++p) {
                EstimatorRow r;
                r.instance = k;
                r.family = std::string(to_string(fam));
                r.alpha = alpha;
                r.arm = chosen.indices()[p];
                r.sigma = sigma[r.arm];
                r.m = m;
                r.w = phi_i(prof, r.arm, spec).value;
                r.gr = finish(mg[p], static_cast<double>(calls));
                r.cgr = finish(mc[p], static_cast<double>(calls));
                r.capped = capped;
                rows.push_back(r);
            }
        }
    }
    auto f = open_csv("estimators.csv");
    f << "instance,family,alpha,arm,sigma,m,w,target,gr_mean,cgr_mean,gr_var,gr_var_se,cgr_var,cgr_var_se,"
         "gr_second,gr_second_se,second_target,capped\n";
    for (const auto& r : rows)
        f << r.instance << ',' << r.family << ',' << r.alpha << ',' << r.arm << ',' << r.sigma << ',' << r.m << ','
          << r.w << ',' << 1.0 / r.w << ',' << r.gr.mean << ',' << r.cgr.mean << ',' << r.gr.var << ','
          << r.gr.var_se << ',' << r.cgr.var << ',' << r.cgr.var_se << ',' << r.gr.second << ',' << r.gr.second_se
          << ',' << 2.0 / (r.w * r.w) - 1.0 / r.w << ',' << r.capped << '\n';
    return rows;
}

void criterion_1(const std::vector<EstimatorRow>& rows, double seconds)
{
    double worst = 0;
    bool ok = !rows.empty();
    for (const auto& r : rows) {
        const double target = 1.0 / r.w;
        for (double mean : {r.gr.mean, r.cgr.mean})
            worst = std::max(worst, std::abs(mean - target) / target);
        ok = ok && r.capped == 0;
    }
    ok = ok && worst <= 0.02;
    report(1, "estimator unbiasedness", ok,
           "max relative error " + fmt("%.3f%%", 100 * worst) + " over " + std::to_string(2 * rows.size()) +
               " arm/estimator pairs (limit 2%)",
           seconds);
}

void criterion_3(const std::vector<EstimatorRow>& rows)
{
    std::size_t checked = 0;
    double worst_margin = -INFINITY; // (cgr - gr) / combined se, must stay <= 3
    for (const auto& r : rows) {
        if (r.sigma <= r.m)
            continue;
        ++checked;
        const double se = std::hypot(r.gr.var_se, r.cgr.var_se);
        worst_margin = std::max(worst_margin, (r.cgr.var - r.gr.var) / se);
    }
    report(3, "variance ordering", checked > 0 && worst_margin <= 3.0,
           std::to_string(checked) + " arms with sigma_i > m, worst (var_cgr - var_gr)/se " +
               fmt("%.2f", worst_margin) + " (limit 3)",
           0.0);
}

void criterion_4(const std::vector<EstimatorRow>& rows)
{
    std::size_t checked = 0;
    double worst = 0;
    for (const auto& r : rows) {
        if (r.w < 0.05)
            continue;
        ++checked;
        const double target = 2.0 / (r.w * r.w) - 1.0 / r.w;
        worst = std::max(worst, std::abs(r.gr.second - target) / target);
    }
    report(4, "GR second moment", checked > 0 && worst <= 0.03,
           std::to_string(checked) + " arms with w >= 0.05, max relative error " + fmt("%.3f%%", 100 * worst) +
               " (limit 3%)",
           0.0);
}

// ---------------------------------------------------------------------------

void criterion_2()
{
    Stopwatch sw;
    BenchmarkSettings s;
    s.ds = {64, 256, 1024, 4096};
    s.ms = {1, 8, 64};
    s.rounds = 1000;
    s.seed = 5;
    auto rows = benchmark_resampling(s);

    BenchmarkSettings strict = s;
    strict.rounds = 100000;
    const BenchmarkRow focus = benchmark_cell(1024, 8, EstimatorKind::CGR, strict, 1000);
    rows.push_back(focus);

    auto f = open_csv("resampling_cost.csv");
    write_benchmark_csv(f, rows);

    bool ok = true;
    double worst = -INFINITY; // (mean - bound) / se over the grid
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        const auto& r = rows[k];
        const double z = (r.mean_resamples - r.bound) / std::max(r.stderr_resamples, 1e-12);
        worst = std::max(worst, z);
        ok = ok && r.mean_resamples <= r.bound + 3 * r.stderr_resamples && r.capped == 0;
    }
    ok = ok && focus.mean_resamples <= 46.8 && focus.capped == 0;
    report(2, "resampling cost", ok,
           std::to_string(rows.size() - 1) + " grid cells, worst (mean - bound)/se " + fmt("%.2f", worst) +
               "; CGR mean M_t at d=1024, m=8 is " + fmt("%.3f", focus.mean_resamples) + " (se " +
               fmt("%.3f", focus.stderr_resamples) + ", limit 46.8)",
           sw.seconds());
}

void write_rows(const std::string& name, const VerifyReport& rep)
{
    auto f = open_csv(name);
    write_check_csv(f, rep.rows);
}

std::string count_detail(const VerifyReport& rep, const std::string& check)
{
    std::size_t n = 0, bad = 0;
    for (const auto& r : rep.rows)
        if (r.check == check) {
            ++n;
            bad += r.ok ? 0 : 1;
        }
    return std::to_string(bad) + " violations in " + std::to_string(n) + " " + check + " checks";
}

bool all_ok(const VerifyReport& rep, const std::string& check)
{
    bool any = false;
    for (const auto& r : rep.rows)
        if (r.check == check) {
            any = true;
            if (!r.ok)
                return false;
        }
    return any;
}

void criteria_5_6()
{
    Stopwatch sw;
    VerifySettings s;
    s.seed = 11;
    const auto rep = verify_lemmas(s);
    write_rows("lemmas.csv", rep);
    const double t = sw.seconds();
    report(5, "rank ratio bounds", all_ok(rep, "sigma_ratio_bound"),
           "200 instances, " + count_detail(rep, "sigma_ratio_bound") + " at 1e-6 slack", t);
    report(6, "flattening inequality", all_ok(rep, "lambda_star_bound"),
           "100 instances, " + count_detail(rep, "lambda_star_bound") + " at 1e-6 slack", 0.0);
}

void criterion_7()
{
    Stopwatch sw;
    std::vector<ScanPoint> scan;
    const auto rep = verify_counterexample(VerifySettings{}, &scan);
    {
        auto f = open_csv("counterexample.csv");
        f << "lambda_q0,ratio,err_estimate\n";
        for (const auto& p : scan)
            f << p.lambda_q0 << ',' << p.ratio << ',' << p.err_estimate << '\n';
    }
    const auto v = assess_scan(scan);
    double best = 0, at = 0;
    for (const auto& p : scan)
        if (p.lambda_q0 > 0.5 && p.ratio > best) {
            best = p.ratio;
            at = p.lambda_q0;
        }
    report(7, "counterexample", v.strict_rise && v.strict_fall && v.exceeds_baseline,
           std::string("rise ") + (v.strict_rise ? "yes" : "no") + ", fall " + (v.strict_fall ? "yes" : "no") +
               ", ratio at 0.5 is " + fmt("%.5f", v.baseline) + ", max to its right " + fmt("%.5f", best) +
               " at lambda_q0 = " + fmt("%.2f", at),
           sw.seconds());
}

void criterion_8()
{
    Stopwatch sw;
    const std::size_t Ts[] = {1000, 4000, 16000};
    auto f = open_csv("regret.csv");
    f << "family,alpha,T,mean_regret,stddev_regret,bound\n";
    bool ok = true;
    std::string detail;
    for (auto fam : {Family::Frechet, Family::Pareto}) {
        std::vector<double> means;
        for (auto T : Ts) {
            ExperimentConfig c;
            c.d = 8;
            c.m = 2;
            c.T = T;
            c.spec = PerturbationSpec(fam, 2.0);
            c.environment.kind = "bernoulli";
            c.environment.gap = 0.2;
            c.replications = 100;
            c.base_seed = 8;
            c.output_path.clear();
            c.checkpoints = 1;
            c.regret_reference = RegretReference::Expected;
            const auto s = run_experiment(c);
            f << to_string(fam) << ",2," << T << ',' << s.mean_regret << ',' << s.stddev_regret << ','
              << s.bound.total << '\n';
            ok = ok && s.mean_regret <= s.bound.total;
            means.push_back(s.mean_regret);
            detail += std::string(detail.empty() ? "" : ", ") + std::string(to_string(fam)) + " T=" +
                      std::to_string(T) + " " + fmt("%.1f", s.mean_regret) + "/" + fmt("%.0f", s.bound.total);
        }
        for (std::size_t k = 1; k < means.size(); ++k) {
            const double g = means[k] / means[k - 1];
            ok = ok && g >= 1.4 && g <= 2.9;
            detail += " x" + fmt("%.2f", g);
        }
    }
    report(8, "regret vs bound", ok, "mean regret/bound: " + detail + " (growth limits [1.4, 2.9])", sw.seconds());
}

void criterion_9()
{
    Stopwatch sw;
    VerifySettings s;
    s.seed = 9;
    const auto rep = verify_penalty(s);
    write_rows("penalty.csv", rep);
    const bool ok = all_ok(rep, "penalty_bound") && all_ok(rep, "pareto_order_statistic") &&
                    all_ok(rep, "frechet_dominance") && all_ok(rep, "gautschi_lower") &&
                    all_ok(rep, "gautschi_upper");
    report(9, "penalty lemmas", ok,
           count_detail(rep, "penalty_bound") + "; " + count_detail(rep, "pareto_order_statistic") + "; " +
               count_detail(rep, "frechet_dominance"),
           sw.seconds());
}

void criterion_10()
{
    Stopwatch sw;
    Rng rng = make_rng(10, 0);
    double worst_dp = 0;
    for (std::size_t n = 0; n <= 12; ++n)
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<double> p(n);
            for (auto& x : p)
                x = rep % 5 == 0 ? std::round(uniform_open01(rng)) : uniform_open01(rng);
            const auto dp = poisson_binomial_pmf(p);
            const auto brute = oracle::brute_poisson_binomial(p);
            for (std::size_t k = 0; k <= n; ++k)
                worst_dp = std::max(worst_dp, std::abs(dp[k] - brute[k]));
        }

    // One (arm, rank) cell per instance, so the 3-sigma band is not
    // multiplied across correlated cells of the same instance.
    constexpr std::size_t kInstances = 50, kDraws = 200000;
    auto f = open_csv("oracle_equivalence.csv");
    f << "instance,family,alpha,d,arm,theta,phi,mc_freq,se,z\n";
    double worst_z = 0;
    for (std::size_t k = 0; k < kInstances; ++k) {
        const auto inst = random_instance(10, 7, k, 2, 8, 2.0, false);
        const std::size_t d = inst.lambda.size();
        Rng pick = make_rng(10, 100 + k);
        const std::size_t i = uniform_index(pick, d);
        const std::size_t theta = 1 + uniform_index(pick, d);
        std::vector<std::size_t> members(d);
        std::iota(members.begin(), members.end(), std::size_t{0});
        const LambdaProfile prof(inst.lambda, 1);
        const double phi = phi_i_theta(prof, i, theta, inst.spec).value;
        Rng mc = make_rng(10, 1000 + k);
        const auto mo = oracle::mc_rank_moments(inst.lambda, members, i, inst.spec, kDraws, mc);
        const double freq = mo.prob[theta - 1].mean;
        const double se = std::sqrt(phi * (1 - phi) / kDraws);
        const double z = se > 0 ? std::abs(freq - phi) / se : 0.0;
        worst_z = std::max(worst_z, z);
        f << k << ',' << to_string(inst.spec.family()) << ',' << inst.spec.alpha() << ',' << d << ',' << i << ','
          << theta << ',' << phi << ',' << freq << ',' << se << ',' << z << '\n';
    }
    report(10, "oracle equivalence", worst_dp <= 1e-12 && worst_z <= 3.0,
           "DP vs enumeration max error " + fmt("%.2e", worst_dp) + " for |B| <= 12; phi vs Monte Carlo worst |z| " +
               fmt("%.2f", worst_z) + " over 50 instances",
           sw.seconds());
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_11()
{
    Stopwatch sw;
    const fs::path dir = g_out / "determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream cfg(dir / "config.json");
        cfg << R"({"d": 6, "m": 2, "T": 500, "environment": {"kind": "switching"},
                   "perturbation": {"family": "pareto", "alpha": 1.5},
                   "replications": 8, "base_seed": 123, "checkpoints": 25})";
    }
    auto run = [&](const std::string& name, int jobs) {
        const std::string cmd = std::string("\"") + SEMIBAND_CLI_PATH + "\" simulate --config \"" +
                                (dir / "config.json").string() + "\" --out \"" + (dir / name).string() +
                                "\" --jobs " + std::to_string(jobs) + " > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    bool ok = run("jobs1", 1) && run("jobs4", 4) && run("jobs1_again", 1) && run("jobs3", 3);
    std::size_t files = 0;
    if (ok)
        for (const auto& e : fs::directory_iterator(dir / "jobs1")) {
            ++files;
            const std::string ref = slurp(e.path());
            for (const char* other : {"jobs4", "jobs1_again", "jobs3"})
                ok = ok && slurp(dir / other / e.path().filename()) == ref;
        }
    ok = ok && files == 8 + 3;
    report(11, "determinism", ok,
           std::to_string(files) + " output files compared across --jobs 1, 4, 3 and a repeat run", sw.seconds());
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance criteria"};
    std::string out = "acceptance_out";
    std::size_t calls = 1'000'000;
    app.add_option("--out", out, "directory for detail CSVs");
    app.add_option("--calls", calls, "estimator calls per instance")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    g_out = out;
    fs::create_directories(g_out);
    try {
        Stopwatch sw;
        const auto rows = run_estimators(calls);
        criterion_1(rows, sw.seconds());
        criterion_2();
        criterion_3(rows);
        criterion_4(rows);
        criteria_5_6();
        criterion_7();
        criterion_8();
        criterion_9();
        criterion_10();
        criterion_11();
    } catch (const std::exception& e) {
        std::printf("FAIL acceptance aborted: %s\n", e.what());
        return 2;
    }
    std::printf("%d of 11 criteria failed\n", g_failed);
    return g_failed == 0 ? 0 : 1;
}
