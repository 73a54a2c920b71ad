// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gsrcpd/gsrcpd.hpp"
#include "test_support.hpp"

using namespace gsrcpd;
using gsrcpd::testing::brute_force_mst_weight;
using gsrcpd::testing::gaussian_window;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [miss]");
    }
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

PowerReport gsr_power(Scenario sc, GraphKind graph = GraphKind::Complete) {
    DetectorConfig cfg;
    cfg.graph = graph;
    cfg.alpha = 0.025;
    return run_power(sc, cfg);
}

std::string describe(const PowerReport& r) {
    return r.method + " " + r.scenario + " n=" + std::to_string(r.n) + " d=" + std::to_string(r.d) +
           " p_mean=" + fmt(r.p_mean()) + " fpr=" + fmt(r.fpr());
}

// Gaussian mean shift 1/cbrt(d), 100 trials per cell.
void mean_shift_table(Outcome& o) {
    for (std::size_t d : {1u, 10u, 100u, 500u}) {
        Scenario sc;
        sc.kind = ScenarioKind::GaussMeanShift;
        sc.n = 35;
        sc.d = d;
        sc.trials = 100;
        sc.seed = 101 + d;
        const auto r = gsr_power(sc);
        o.require(r.p_mean() >= 0.90, describe(r) + " >= 0.90");
    }
}

// Gaussian variance doubling.
void variance_table(Outcome& o) {
    for (std::size_t d : {1u, 10u, 100u}) {
        Scenario sc;
        sc.kind = ScenarioKind::GaussVarShift;
        sc.n = 35;
        sc.d = d;
        sc.trials = 100;
        sc.scale = 2.0;
        sc.seed = 201 + d;
        const auto r = gsr_power(sc);
        const double floor = d == 1 ? 0.5 : 0.90;
        o.require(r.p_mean() >= floor, describe(r) + " >= " + fmt(floor));
    }
}

// Per-window family-wise alarm rate of the mean statistic over fresh null windows.
void null_alarm_rate(Outcome& o) {
    const std::size_t n = 16, d = 10, windows = 500;
    const double alpha = 0.025;
    Rng train_rng(3001);
    const auto train = gaussian_window(train_rng, 500, d);
    CalibrationConfig cc;
    cc.n = n;
    cc.alpha = alpha;
    cc.reps = 500;
    cc.seed = 3;
    cc.stream_length = 2 * n;
    const auto table = calibrate(train, cc);
    std::vector<char> alarm(windows, 0);
    parallel_for(windows, [&](std::size_t i) {
        Rng rng(3002, i);
        const auto w = gaussian_window(rng, 2 * n, d);
        alarm[i] = !detect_offline(w, table, StatSet{StatKind::Mean}).events.empty();
    });
    const double rate = static_cast<double>(std::count(alarm.begin(), alarm.end(), 1)) / windows;
    const double se = std::sqrt(alpha * (1.0 - alpha) / windows);
    const double lo = alpha - 2.0 * se, hi = alpha + 2.0 * se + 0.002;
    o.detail << "calibration converged=" << (table.stat_converged[index_of(StatKind::Mean)] ? "yes" : "no")
             << " alpha*=" << fmt(table.alpha_star[index_of(StatKind::Mean)]);
    o.require(rate >= lo && rate <= hi, "alarm rate " + fmt(rate) + " in [" + fmt(lo) + ", " + fmt(hi) + "]");
}

// Erdos-Renyi connectivity drop on 30 nodes.
void er_connectivity(Outcome& o) {
    auto scenario = [](double dp) {
        Scenario sc;
        sc.kind = ScenarioKind::ERConnectivityShift;
        sc.n = 30;
        sc.d = 30;
        sc.trials = 1000;
        sc.p0 = 0.5;
        sc.p1 = 0.5 - dp;
        sc.seed = 401;
        return sc;
    };
    const std::vector<GraphKind> graphs{GraphKind::Complete, GraphKind::MinimumSpanningTree,
                                        GraphKind::NearestNeighbor};
    for (auto g : graphs) {
        const auto r = gsr_power(scenario(1.0 / 6.0), g);
        o.require(r.p_mean() >= 0.95 && r.fpr() <= 0.05, describe(r) + " (dp=1/6, need p_mean>=0.95, fpr<=0.05)");
    }
    std::vector<double> small;
    for (auto g : graphs) {
        const auto r = gsr_power(scenario(1.0 / 48.0), g);
        small.push_back(r.p_mean());
        o.detail << "; " << describe(r) << " (dp=1/48)";
    }
    o.require(small[0] > small[1] && small[0] > small[2], "dp=1/48 CG above MST and NNG");
}

// Kolmogorov-Smirnov distance of a sample against a CDF.
double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double m = static_cast<double>(xs.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        worst = std::max({worst, (i + 1) / m - f, f - i / m});
    }
    return worst;
}

// Null laws of the symmetric complete-graph statistics.
void null_laws(Outcome& o) {
    const std::size_t n = 50, d = 300, windows = 100000;
    std::vector<double> mean(windows), var_up(windows);
    parallel_for(windows, [&](std::size_t i) {
        Rng rng(5001, i);
        const auto t = spanning_triplet(gaussian_window(rng, 2 * n, d), n, GraphKind::Complete);
        mean[i] = r_mu_fisher_form(t.left, t.right, t.full);
        var_up[i] = r_sigma_up(t.left, t.right, n, n);
    });
    const double D = 2.0 * static_cast<double>((n - 1) * d);
    const double want = 2.0 * (static_cast<double>(d) / D) * f_quantile(0.975, {static_cast<double>(d), D});
    const auto idx = static_cast<std::size_t>(0.975 * windows);
    std::nth_element(mean.begin(), mean.begin() + static_cast<std::ptrdiff_t>(idx), mean.end());
    const double rel = std::fabs(mean[idx] / want - 1.0);
    o.require(rel <= 0.03, "mean 97.5% quantile " + fmt(mean[idx], 6) + " vs " + fmt(want, 6) + " rel " + fmt(rel, 3) +
                               " <= 0.03");
    const double nu = static_cast<double>((n - 1) * d);
    const double ks = ks_statistic(var_up, [nu](double x) { return f_cdf(x, {nu, nu}); });
    o.require(ks < 0.02, "variance-increase KS " + fmt(ks, 3) + " < 0.02");
}

// Mean gap-spanning distance at k = n.
void gap_mean(Outcome& o) {
    const std::size_t n = 30, d = 10, windows = 10000;
    std::vector<double> gaps(windows);
    parallel_for(windows, [&](std::size_t i) {
        Rng rng(6001, i);
        gaps[i] = gap_spanning(gaussian_window(rng, 2 * n, d), n);
    });
    double mean = 0.0;
    for (double g : gaps) mean += g;
    mean /= windows;
    double ss = 0.0;
    for (double g : gaps) ss += (g - mean) * (g - mean);
    const double se = std::sqrt(ss / (windows - 1) / windows);
    const double want = gap_expectation(n, d, 1.0);
    o.require(std::fabs(mean - want) <= 3.0 * se,
              "mean " + fmt(mean, 7) + " vs " + fmt(want, 7) + " within 3 SE (" + fmt(3.0 * se, 3) + ")");
}

// Kruskal against enumeration of all labelled trees.
void mst_oracle(Outcome& o) {
    Rng rng(7001);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t m = 2 + static_cast<std::size_t>(rng.uniform() * 6.0);
        const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform() * 4.0);
        const auto w = gaussian_window(rng, m, d);
        const double brute = brute_force_mst_weight(w);
        worst = std::max(worst, std::fabs(spanning_weight(w, GraphKind::MinimumSpanningTree) - brute) / brute);
    }
    o.require(worst <= 1e-12, "worst relative difference " + fmt(worst, 3) + " <= 1e-12");
}

void special_functions(Outcome& o) {
    double worst = 0.0;
    for (double d1 : {1.0, 5.0, 50.0, 1000.0})
        for (double d2 : {1.0, 5.0, 50.0, 1000.0})
            for (double p : {0.01, 0.025, 0.5, 0.975, 0.99})
                worst = std::max(worst, std::fabs(f_cdf(f_quantile(p, {d1, d2}), {d1, d2}) - p));
    o.require(worst <= 1e-9, "quantile round trip " + fmt(worst, 3) + " <= 1e-9");
    double median = 0.0;
    for (double nu : {1.0, 2.0, 5.0, 50.0, 1000.0, 29400.0})
        median = std::max(median, std::fabs(f_quantile(0.5, {nu, nu}) - 1.0));
    o.require(median <= 1e-12, "equal-df median error " + fmt(median, 3) + " <= 1e-12");
}

void theory_series(Outcome& o) {
    const std::vector<std::size_t> ns{30, 32, 34};
    const auto pts = delta_mu_series(ns, 10, 0.05);
    const std::size_t per = pts.size() / ns.size();
    bool in_beta = true, in_n = true;
    for (std::size_t a = 0; a < ns.size(); ++a)
        for (std::size_t i = 0; i + 1 < per; ++i) in_beta &= pts[a * per + i + 1].delta_mu < pts[a * per + i].delta_mu;
    for (std::size_t a = 0; a + 1 < ns.size(); ++a)
        for (std::size_t i = 0; i < per; ++i) in_n &= pts[(a + 1) * per + i].delta_mu < pts[a * per + i].delta_mu;
    o.require(in_beta, "decreasing in beta");
    o.require(in_n, "decreasing in n");
    bool above = true;
    for (std::size_t n = 10; n <= 100; n += 10)
        for (std::size_t d : {1u, 10u, 100u})
            for (double beta : {0.05, 0.1, 0.2, 0.3, 0.4, 0.5}) {
                const PowerInputs in{n, d, 0.05, beta, 1.0, std::nullopt, std::nullopt};
                above &= delta_mu(in) >= min_radius(0.05, beta, n, d, 1.0);
            }
    o.require(above, "delta_mu >= min_radius for n in 10..100, d in {1,10,100}");
}

// Online mean-shift detection on streams of 300 rows with the change at row 200.
// Thresholds hold the family-wise rate over a null stream as long as the
// pre-change segment.
void online_delay(Outcome& o) {
    const std::size_t n = 32, d = 100, change = 200, length = 300, trials = 100;
    const double shift = 1.0 / std::cbrt(static_cast<double>(d));
    Rng pool_rng(10001);
    const auto pool = gaussian_window(pool_rng, 3000, d);
    CalibrationConfig cc;
    cc.n = n;
    cc.alpha = 0.025;
    cc.reps = 4000;
    cc.seed = 10;
    cc.stream_length = change;
    const auto table = calibrate(pool, cc);
    std::vector<std::int64_t> first(trials, -1);
    parallel_for(trials, [&](std::size_t t) {
        Rng rng(10002, t);
        OnlineDetector det(table, OnlinePolicy::stop_on_first(), StatSet{StatKind::Mean});
        Observation y(d);
        for (std::size_t i = 0; i < length && !det.terminal(); ++i) {
            rng.fill_normal(y, i < change ? 0.0 : shift);
            const auto ev = det.push(y);
            if (!ev.empty()) first[t] = ev.front().arrival;
        }
    });
    std::size_t timely = 0, quiet = 0;
    for (auto f : first) {
        if (f >= static_cast<std::int64_t>(change) && f <= static_cast<std::int64_t>(change + 2 * n)) ++timely;
        if (f < 0 || f >= static_cast<std::int64_t>(change)) ++quiet;
    }
    o.detail << "calibration converged=" << (table.stat_converged[index_of(StatKind::Mean)] ? "yes" : "no");
    o.require(timely >= 90, "first alarm in [200, 264] in " + std::to_string(timely) + "/100 >= 90");
    o.require(quiet >= 97, "no alarm before 200 in " + std::to_string(quiet) + "/100 >= 97");
}

// Uniform-data mean and variance shifts.
void uniform_checks(Outcome& o) {
    for (auto kind : {ScenarioKind::UniformMeanShift, ScenarioKind::UniformVarShift}) {
        Scenario sc;
        sc.kind = kind;
        sc.n = 50;
        sc.d = 100;
        sc.trials = 100;
        sc.seed = 1101;
        const auto r = gsr_power(sc);
        o.require(r.p_mean() >= 0.90, describe(r) + " >= 0.90");
    }
}

struct Criterion {
    int id;
    const char* name;
    void (*run)(Outcome&);
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "gaussian mean-shift power", mean_shift_table},
        {2, "gaussian variance-shift power", variance_table},
        {3, "null family-wise alarm rate", null_alarm_rate},
        {4, "ER connectivity power", er_connectivity},
        {5, "complete-graph null laws", null_laws},
        {6, "gap-spanning expectation", gap_mean},
        {7, "MST oracle equivalence", mst_oracle},
        {8, "special-function accuracy", special_functions},
        {9, "detection-radius series", theory_series},
        {10, "online detection delay", online_delay},
        {11, "uniform-data power", uniform_checks},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));
    int failed = 0;
    for (const auto& c : criteria) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << ", " << fmt(secs, 3)
                  << " s): " << o.detail.str() << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criterion(s) failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
