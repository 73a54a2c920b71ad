#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "gsrcpd/calibrate.hpp"
#include "gsrcpd/detect.hpp"
#include "gsrcpd/error.hpp"
#include "gsrcpd/graphkit.hpp"
#include "gsrcpd/gsr_stats.hpp"
#include "gsrcpd/observation.hpp"
#include "gsrcpd/parallel.hpp"
#include "gsrcpd/rng.hpp"
#include "gsrcpd/specialfn.hpp"

namespace gsrcpd {

enum class ScenarioKind {
    GaussMeanShift,
    GaussVarShift,
    UniformMeanShift,
    UniformVarShift,
    ERConnectivityShift,
    GraphTypeChange,
};

inline std::string_view to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::GaussMeanShift: return "mean_gauss";
        case ScenarioKind::GaussVarShift: return "var_gauss";
        case ScenarioKind::UniformMeanShift: return "mean_uniform";
        case ScenarioKind::UniformVarShift: return "var_uniform";
        case ScenarioKind::ERConnectivityShift: return "er_connectivity";
        case ScenarioKind::GraphTypeChange: return "graph_type";
    }
    return "?";
}

inline const std::vector<std::string>& scenario_ids() {
    static const std::vector<std::string> ids{"mean_gauss",  "var_gauss",       "mean_uniform",
                                              "var_uniform", "er_connectivity", "graph_type"};
    return ids;
}

inline ScenarioKind parse_scenario_kind(std::string_view id) {
    for (auto k : {ScenarioKind::GaussMeanShift, ScenarioKind::GaussVarShift, ScenarioKind::UniformMeanShift,
                   ScenarioKind::UniformVarShift, ScenarioKind::ERConnectivityShift, ScenarioKind::GraphTypeChange}) {
        if (to_string(k) == id) return k;
    }
    std::string known;
    for (const auto& s : scenario_ids()) known += (known.empty() ? "" : ", ") + s;
    throw DomainError("unknown scenario '" + std::string(id) + "' (registered: " + known + ")");
}

/// One simulation setting. Each trial is a 2n window whose second half
/// follows the alternative with probability change_present_prob.
///
/// For the graph scenarios d is the number of nodes and observations are
/// the d(d-1)/2 upper-triangle edge indicators.
struct Scenario {
    ScenarioKind kind = ScenarioKind::GaussMeanShift;
    std::size_t n = 35;
    std::size_t d = 10;
    std::size_t trials = 100;
    std::uint64_t seed = 1;
    double change_present_prob = 0.5;
    /// Mean shift per coordinate; 1 / cbrt(d) when unset.
    std::optional<double> shift;
    /// Full mean-shift vector for GaussMeanShift; overrides `shift`.
    std::optional<std::vector<double>> delta;
    /// Variance multiplier of the second half (2 gives Sigma = 2 I).
    double scale = 2.0;
    double p0 = 0.5;
    double p1 = 1.0 / 3.0;
    GraphKind graph_from = GraphKind::MinimumSpanningTree;
    GraphKind graph_to = GraphKind::Complete;

    [[nodiscard]] bool graph_valued() const {
        return kind == ScenarioKind::ERConnectivityShift || kind == ScenarioKind::GraphTypeChange;
    }
    [[nodiscard]] std::size_t observation_dim() const { return graph_valued() ? d * (d - 1) / 2 : d; }
    [[nodiscard]] double mean_shift() const { return shift.value_or(1.0 / std::cbrt(static_cast<double>(d))); }

    /// The statistic a GSR detector watches by default in this scenario.
    [[nodiscard]] StatKind target_stat() const {
        return kind == ScenarioKind::GaussVarShift || kind == ScenarioKind::UniformVarShift ? StatKind::VarUp
                                                                                             : StatKind::Mean;
    }

    /// Default GSR statistics. Moving an edge probability away from 1/2 also
    /// shrinks the Bernoulli variance, so connectivity shifts add VarDown.
    [[nodiscard]] StatSet target_stats() const {
        if (kind == ScenarioKind::ERConnectivityShift) return {StatKind::Mean, StatKind::VarDown};
        return {target_stat()};
    }

    void validate() const {
        if (n < 2) throw DomainError("scenario n must be >= 2");
        if (d == 0) throw DomainError("scenario d must be >= 1");
        if (graph_valued() && d < 2) throw DomainError("graph scenarios need at least 2 nodes");
        if (trials == 0) throw DomainError("scenario needs at least one trial");
        if (!(change_present_prob >= 0.0 && change_present_prob <= 1.0)) {
            throw DomainError("change_present_prob must lie in [0, 1]");
        }
        if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("scale must be positive");
        if (!(p0 >= 0.0 && p0 <= 1.0 && p1 >= 0.0 && p1 <= 1.0)) throw DomainError("edge probabilities must lie in [0, 1]");
        if (shift && !std::isfinite(*shift)) throw DomainError("shift must be finite");
        if (delta) {
            if (kind != ScenarioKind::GaussMeanShift) throw DomainError("delta vector applies to mean_gauss only");
            if (delta->size() != d) throw DimensionMismatch("delta vector length must equal d");
            require_finite(*delta, "delta");
        }
    }
};

struct LabeledWindow {
    ObservationWindow window;
    bool change = false;
};

namespace detail {

inline void fill_uniform(Rng& rng, std::span<double> y, double lo, double hi) {
    for (auto& v : y) v = rng.uniform(lo, hi);
}

inline void fill_edges_er(Rng& rng, std::span<double> y, double p) {
    for (auto& v : y) v = rng.bernoulli(p) ? 1.0 : 0.0;
}

/// Edge indicators of a graph of the given kind built on `nodes` random
/// points in the unit square.
inline void fill_edges_of_kind(Rng& rng, std::span<double> y, std::size_t nodes, GraphKind kind) {
    ObservationWindow pts(2);
    std::vector<double> p(2);
    for (std::size_t i = 0; i < nodes; ++i) {
        p[0] = rng.uniform();
        p[1] = rng.uniform();
        pts.push_back(p);
    }
    std::fill(y.begin(), y.end(), 0.0);
    const auto g = build_graph(pts, kind);
    for (const auto& e : g.edges) {
        const std::size_t i = std::min(e.i, e.j);
        const std::size_t j = std::max(e.i, e.j);
        // Row-major index of (i, j), i < j, in the strict upper triangle.
        y[i * nodes - i * (i + 1) / 2 + (j - i - 1)] = 1.0;
    }
}

inline void draw_row(const Scenario& sc, Rng& rng, bool alternative, std::span<double> y) {
    switch (sc.kind) {
        case ScenarioKind::GaussMeanShift:
            rng.fill_normal(y);
            if (alternative) {
                for (std::size_t j = 0; j < y.size(); ++j) y[j] += sc.delta ? (*sc.delta)[j] : sc.mean_shift();
            }
            return;
        case ScenarioKind::GaussVarShift:
            rng.fill_normal(y, 0.0, alternative ? std::sqrt(sc.scale) : 1.0);
            return;
        case ScenarioKind::UniformMeanShift: {
            const double s = alternative ? sc.mean_shift() : 0.0;
            fill_uniform(rng, y, s, 1.0 + s);
            return;
        }
        case ScenarioKind::UniformVarShift: {
            // s U(1/(2s) - 1/2, 1/(2s) + 1/2): mean stays 1/2, variance scales by s^2.
            const double s = alternative ? sc.scale : 1.0;
            const double c = 0.5 / s;
            fill_uniform(rng, y, c - 0.5, c + 0.5);
            for (auto& v : y) v *= s;
            return;
        }
        case ScenarioKind::ERConnectivityShift:
            fill_edges_er(rng, y, alternative ? sc.p1 : sc.p0);
            return;
        case ScenarioKind::GraphTypeChange:
            fill_edges_of_kind(rng, y, sc.d, alternative ? sc.graph_to : sc.graph_from);
            return;
    }
}

inline constexpr std::uint64_t kCalibrationStream = 1ULL << 62;
inline constexpr std::uint64_t kBaselineStream = 1ULL << 61;

}  // namespace detail

/// 2n window of trial `trial_index`; a deterministic function of
/// (scenario, seed, trial_index).
inline LabeledWindow generate(const Scenario& sc, std::size_t trial_index) {
    sc.validate();
    Rng rng(sc.seed, trial_index);
    LabeledWindow out{ObservationWindow(sc.observation_dim()), rng.bernoulli(sc.change_present_prob)};
    out.window.reserve(2 * sc.n);
    std::vector<double> y(sc.observation_dim());
    for (std::size_t i = 0; i < 2 * sc.n; ++i) {
        detail::draw_row(sc, rng, out.change && i >= sc.n, y);
        out.window.push_back(y);
    }
    return out;
}

/// `length` null observations of the scenario, e.g. a training stream.
inline ObservationWindow generate_null(const Scenario& sc, std::size_t length, Rng& rng) {
    sc.validate();
    ObservationWindow w(sc.observation_dim());
    w.reserve(length);
    std::vector<double> y(sc.observation_dim());
    for (std::size_t i = 0; i < length; ++i) {
        detail::draw_row(sc, rng, false, y);
        w.push_back(y);
    }
    return w;
}

struct TrialRecord {
    std::size_t trial = 0;
    bool change = false;
    bool alarm = false;
    bool degenerate = false;
};

/// Confusion counts and the derived detection-power metrics. Degenerate
/// trials are counted separately and excluded from every metric.
struct PowerReport {
    std::string method;
    std::string scenario;
    std::size_t n = 0;
    std::size_t d = 0;
    std::uint64_t seed = 0;
    std::size_t reps = 0;
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    std::size_t degenerate = 0;
    /// False when the method cannot run in this (n, d) cell.
    bool applicable = true;
    bool calibration_converged = true;
    double runtime_seconds = 0.0;
    std::vector<TrialRecord> log;

    [[nodiscard]] std::size_t scored() const { return tp + tn + fp + fn; }
    [[nodiscard]] std::size_t trials() const { return scored() + degenerate; }
    [[nodiscard]] double accuracy() const {
        return scored() == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(scored());
    }
    [[nodiscard]] double sensitivity() const {
        return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    }
    [[nodiscard]] double fpr() const { return fp + tn == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(fp + tn); }
    [[nodiscard]] double p_mean() const { return std::sqrt(accuracy() * sensitivity()); }

    void record(const TrialRecord& r) {
        log.push_back(r);
        if (r.degenerate) ++degenerate;
        else if (r.change) (r.alarm ? tp : fn) += 1;
        else (r.alarm ? fp : tn) += 1;
    }
};

struct HotellingResult {
    bool applicable = false;
    double t2 = 0.0;
    /// (N - d - 1) / (d (N - 2)) T^2, F(d, N - d - 1) under H0.
    double f_stat = 0.0;
    double f_threshold = 0.0;
    bool reject = false;
};

/// Two-sample Hotelling T^2 between rows [0, k) and [k, 2n) with pooled
/// covariance. Not applicable when d >= N - 1 or the pooled covariance is
/// singular.
inline HotellingResult hotelling_t2(const ObservationWindow& window, double alpha, std::optional<std::size_t> k = {}) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    const std::size_t N = window.size();
    if (N < 4 || N % 2 != 0) throw DomainError("hotelling_t2 needs an even window length >= 4");
    const std::size_t split = k.value_or(N / 2);
    if (split < 2 || split + 2 > N) throw DomainError("split point outside [2, N-2]");
    const std::size_t d = window.dim();
    HotellingResult r;
    if (d + 1 >= N) return r;
    using Mat = Eigen::MatrixXd;
    using Vec = Eigen::VectorXd;
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Y(
        window.data().data(), static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(d));
    const auto n1 = static_cast<Eigen::Index>(split);
    const auto n2 = static_cast<Eigen::Index>(N - split);
    const Vec m1 = Y.topRows(n1).colwise().mean().transpose();
    const Vec m2 = Y.bottomRows(n2).colwise().mean().transpose();
    const Mat c1 = Y.topRows(n1).rowwise() - m1.transpose();
    const Mat c2 = Y.bottomRows(n2).rowwise() - m2.transpose();
    const Mat S = (c1.transpose() * c1 + c2.transpose() * c2) / static_cast<double>(N - 2);
    const Eigen::FullPivLU<Mat> lu(S);
    if (lu.rank() < static_cast<Eigen::Index>(d)) return r;
    const Vec diff = m1 - m2;
    const double scale = static_cast<double>(n1) * static_cast<double>(n2) / static_cast<double>(N);
    r.applicable = true;
    r.t2 = scale * diff.dot(lu.solve(diff));
    const double df1 = static_cast<double>(d);
    const double df2 = static_cast<double>(N - d - 1);
    r.f_stat = df2 / (df1 * static_cast<double>(N - 2)) * r.t2;
    r.f_threshold = f_quantile(1.0 - alpha, {df1, df2});
    r.reject = r.f_stat > r.f_threshold;
    return r;
}

struct EdgeCountResult {
    std::size_t cross_edges = 0;
    /// Permutation mean and standard deviation of the cross-edge count.
    double null_mean = 0.0;
    double null_sd = 0.0;
    double z = 0.0;
    double p_value = 1.0;
    bool reject = false;
};

/// Edge-count two-sample test: edges of the pooled-window graph joining
/// rows before and after the split. Few cross edges indicate a change. The
/// null is B random relabellings of the window; ties in the count are
/// broken with an independent uniform so the test has exact size alpha.
inline EdgeCountResult edge_count_baseline(const ObservationWindow& window, double alpha, std::size_t reps, Rng& rng,
                                           GraphKind graph = GraphKind::MinimumSpanningTree,
                                           std::optional<std::size_t> k = {}) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (reps == 0) throw DomainError("edge_count_baseline needs at least one permutation");
    const std::size_t N = window.size();
    if (N < 4 || N % 2 != 0) throw DomainError("edge_count_baseline needs an even window length >= 4");
    const std::size_t split = k.value_or(N / 2);
    if (split < 2 || split + 2 > N) throw DomainError("split point outside [2, N-2]");
    const auto g = build_graph(window, graph);
    if (!(g.weight > 0.0)) throw DegenerateWindow("all observations of the window coincide");
    auto count = [&](const std::vector<std::size_t>& side) {
        std::size_t c = 0;
        for (const auto& e : g.edges) c += side[e.i] != side[e.j];
        return c;
    };
    std::vector<std::size_t> side(N);
    for (std::size_t i = 0; i < N; ++i) side[i] = i >= split;
    EdgeCountResult r;
    r.cross_edges = count(side);
    double sum = 0.0, sum_sq = 0.0;
    std::size_t below = 0, ties = 0;
    for (std::size_t b = 0; b < reps; ++b) {
        for (std::size_t i = N - 1; i > 0; --i) std::swap(side[i], side[rng.index(i + 1)]);
        const auto c = count(side);
        sum += static_cast<double>(c);
        sum_sq += static_cast<double>(c) * static_cast<double>(c);
        below += c < r.cross_edges;
        ties += c == r.cross_edges;
    }
    const double B = static_cast<double>(reps);
    r.null_mean = sum / B;
    r.null_sd = std::sqrt(std::max(0.0, sum_sq / B - r.null_mean * r.null_mean));
    r.z = r.null_sd > 0.0 ? (static_cast<double>(r.cross_edges) - r.null_mean) / r.null_sd : 0.0;
    r.p_value = (static_cast<double>(below) + rng.uniform() * static_cast<double>(ties + 1)) / (B + 1.0);
    r.reject = r.p_value <= alpha;
    return r;
}

enum class PowerMethod { Gsr, Hotelling, EdgeCount };

struct DetectorConfig {
    PowerMethod method = PowerMethod::Gsr;
    /// Graph of the GSR statistics or of the edge-count test.
    GraphKind graph = GraphKind::Complete;
    double alpha = 0.025;
    /// GSR at k = n only; otherwise the full reference-point sweep.
    bool symmetric = true;
    /// Statistics a GSR detector watches; the scenario's targets when unset.
    /// alpha is split evenly across them.
    std::optional<StatSet> monitored;
    /// Ready thresholds; otherwise calibrated on a null sample of length 2n.
    std::optional<ThresholdTable> thresholds;
    ResampleMethod resample = ResampleMethod::Permutation;
    std::size_t reps = 500;
    /// Null training pool of pool_windows * 2n rows; each replicate resamples
    /// one 2n window from it.
    std::size_t pool_windows = 10;
    std::optional<std::uint64_t> calibration_seed;

    [[nodiscard]] std::string label() const {
        switch (method) {
            case PowerMethod::Gsr: {
                std::string g(to_string(graph));
                for (auto& c : g) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
                return "GSR_" + g;
            }
            case PowerMethod::Hotelling: return "T2";
            case PowerMethod::EdgeCount: return "GEC";
        }
        return "?";
    }
};

/// Thresholds for a GSR power run: the configured table, or a resampling
/// calibration of single 2n windows drawn from a null training pool.
inline ThresholdTable power_thresholds(const Scenario& sc, const DetectorConfig& cfg) {
    if (cfg.thresholds) return *cfg.thresholds;
    if (cfg.pool_windows == 0) throw DomainError("pool_windows must be positive");
    if (cfg.monitored && cfg.monitored->empty()) throw DomainError("no statistic monitored");
    Rng rng(cfg.calibration_seed.value_or(sc.seed), detail::kCalibrationStream);
    const auto train = generate_null(sc, cfg.pool_windows * 2 * sc.n, rng);
    CalibrationConfig cc;
    cc.n = sc.n;
    cc.alpha = cfg.alpha / static_cast<double>(cfg.monitored.value_or(sc.target_stats()).size());
    cc.reps = cfg.reps;
    cc.method = cfg.resample;
    cc.graph = cfg.graph;
    cc.seed = cfg.calibration_seed.value_or(sc.seed);
    cc.symmetric_only = cfg.symmetric;
    cc.stream_length = 2 * sc.n;
    return calibrate(train, cc);
}

/// Scores one detector over every trial of a scenario.
inline PowerReport run_power(const Scenario& sc, const DetectorConfig& cfg) {
    sc.validate();
    const auto start = std::chrono::steady_clock::now();
    PowerReport rep;
    rep.method = cfg.label();
    rep.scenario = std::string(to_string(sc.kind));
    rep.n = sc.n;
    rep.d = sc.d;
    rep.seed = sc.seed;
    rep.reps = cfg.method == PowerMethod::Hotelling || cfg.thresholds ? 0 : cfg.reps;
    if (cfg.method == PowerMethod::Hotelling && sc.observation_dim() + 1 >= 2 * sc.n) {
        rep.applicable = false;
        return rep;
    }
    std::optional<ThresholdTable> table;
    const StatSet monitored = cfg.monitored.value_or(sc.target_stats());
    if (cfg.method == PowerMethod::Gsr) {
        table = power_thresholds(sc, cfg);
        rep.calibration_converged = table->converged;
    }
    std::vector<TrialRecord> records(sc.trials);
    parallel_for(sc.trials, [&](std::size_t t) {
        const auto sample = generate(sc, t);
        TrialRecord r{t, sample.change, false, false};
        switch (cfg.method) {
            case PowerMethod::Gsr:
                try {
                    r.alarm = !detect_offline(sample.window, *table, cfg.graph, monitored).events.empty();
                } catch (const DegenerateWindow&) {
                    r.degenerate = true;
                }
                break;
            case PowerMethod::Hotelling: {
                const auto h = hotelling_t2(sample.window, cfg.alpha);
                if (h.applicable) r.alarm = h.reject;
                else r.degenerate = true;
                break;
            }
            case PowerMethod::EdgeCount: {
                Rng rng(sc.seed, detail::kBaselineStream + t);
                try {
                    r.alarm = edge_count_baseline(sample.window, cfg.alpha, cfg.reps, rng, cfg.graph).reject;
                } catch (const DegenerateWindow&) {
                    r.degenerate = true;
                }
                break;
            }
        }
        records[t] = r;
    });
    for (const auto& r : records) rep.record(r);
    rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

inline const std::vector<std::string>& experiment_ids() {
    static const std::vector<std::string> ids{"mean_gauss", "var_gauss", "mean_uniform", "var_uniform",
                                              "er_connectivity"};
    return ids;
}

/// Throws DomainError listing the registered ids when `id` is unknown.
inline void require_experiment(std::string_view id) {
    if (std::find(experiment_ids().begin(), experiment_ids().end(), id) != experiment_ids().end()) return;
    std::string known;
    for (const auto& s : experiment_ids()) known += (known.empty() ? "" : ", ") + s;
    throw DomainError("unknown experiment '" + std::string(id) + "' (registered: " + known + ")");
}

struct TableOptions {
    /// Removes the desk-scale caps: every GSR graph and 2000 resamples.
    bool full = false;
    std::uint64_t seed = 1;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> reps;
    /// Restrict the (n, d) grid; empty keeps the default grid.
    std::vector<std::size_t> ns;
    std::vector<std::size_t> ds;
};

/// One table row; `report` is empty for baselines that are not implemented
/// (their cells stay blank).
struct TableRow {
    std::string method;
    std::string scenario;
    std::size_t n = 0;
    std::size_t d = 0;
    std::optional<PowerReport> report;
};

struct PowerTable {
    std::string experiment;
    std::vector<TableRow> rows;
    std::vector<std::string> notes;
};

/// Runs a registered experiment over its (n, d) grid with paired seeds:
/// every method of a cell sees the same trial windows.
inline PowerTable run_table(std::string_view experiment, const TableOptions& opt = {}) {
    require_experiment(experiment);
    PowerTable table;
    table.experiment = std::string(experiment);
    const std::size_t reps = opt.reps.value_or(opt.full ? 2000 : 500);
    const auto graphs = opt.full ? std::vector<GraphKind>{GraphKind::Complete, GraphKind::MinimumSpanningTree,
                                                          GraphKind::NearestNeighbor}
                                 : std::vector<GraphKind>{GraphKind::Complete};
    if (experiment == "er_connectivity") {
        const std::vector<std::pair<std::string, double>> gaps{
            {"1/6", 1.0 / 6}, {"1/12", 1.0 / 12}, {"1/24", 1.0 / 24}, {"1/48", 1.0 / 48}};
        const auto ns = opt.ns.empty() ? std::vector<std::size_t>{30} : opt.ns;
        const auto ds = opt.ds.empty() ? std::vector<std::size_t>{30} : opt.ds;
        for (auto n : ns)
            for (auto d : ds)
                for (std::size_t g = 0; g < gaps.size(); ++g) {
                    Scenario sc;
                    sc.kind = ScenarioKind::ERConnectivityShift;
                    sc.n = n;
                    sc.d = d;
                    sc.trials = opt.trials.value_or(1000);
                    sc.seed = opt.seed + g;
                    sc.p0 = 0.5;
                    sc.p1 = 0.5 - gaps[g].second;
                    for (auto graph : {GraphKind::Complete, GraphKind::MinimumSpanningTree, GraphKind::NearestNeighbor}) {
                        DetectorConfig cfg;
                        cfg.graph = graph;
                        cfg.reps = reps;
                        auto rep = run_power(sc, cfg);
                        rep.scenario = "er_connectivity:dp=" + gaps[g].first;
                        table.rows.push_back({rep.method, rep.scenario, n, d, rep});
                    }
                }
        table.notes.push_back("d is the number of nodes; observations are d(d-1)/2 edge indicators");
        return table;
    }
    Scenario base;
    base.kind = parse_scenario_kind(experiment);
    const auto ns = opt.ns.empty() ? std::vector<std::size_t>{35, 50} : opt.ns;
    const auto ds = opt.ds.empty() ? std::vector<std::size_t>{1, 10, 50, 100, 500} : opt.ds;
    for (auto n : ns)
        for (auto d : ds) {
            Scenario sc = base;
            sc.n = n;
            sc.d = d;
            sc.trials = opt.trials.value_or(100);
            sc.seed = opt.seed;
            for (const char* absent : {"GLR", "Kernel"}) table.rows.push_back({absent, table.experiment, n, d, {}});
            DetectorConfig t2;
            t2.method = PowerMethod::Hotelling;
            auto rep = run_power(sc, t2);
            table.rows.push_back({rep.method, table.experiment, n, d, rep});
            DetectorConfig gec;
            gec.method = PowerMethod::EdgeCount;
            gec.graph = GraphKind::MinimumSpanningTree;
            gec.reps = reps;
            rep = run_power(sc, gec);
            table.rows.push_back({rep.method, table.experiment, n, d, rep});
            for (auto graph : graphs) {
                DetectorConfig cfg;
                cfg.graph = graph;
                cfg.reps = reps;
                rep = run_power(sc, cfg);
                table.rows.push_back({rep.method, table.experiment, n, d, rep});
            }
        }
    table.notes.push_back("GLR and Kernel baselines are not implemented; their cells are blank");
    table.notes.push_back("T2 cells are blank where d >= 2n - 1");
    if (base.kind == ScenarioKind::UniformMeanShift || base.kind == ScenarioKind::UniformVarShift) {
        table.notes.push_back("p_mean is reported, not its square");
    }
    return table;
}

inline void write_power_csv_header(std::ostream& os) {
    os << "method,n,d,scenario,p_mean,fpr,accuracy,sensitivity,trials,seed\n";
}

/// One CSV line; metric cells are blank for missing or inapplicable methods.
inline void write_power_csv_row(std::ostream& os, const TableRow& row) {
    const auto old = os.precision(17);
    os << row.method << ',' << row.n << ',' << row.d << ',' << row.scenario << ',';
    if (row.report && row.report->applicable) {
        const auto& r = *row.report;
        os << r.p_mean() << ',' << r.fpr() << ',' << r.accuracy() << ',' << r.sensitivity() << ',' << r.trials() << ','
           << r.seed;
    } else if (row.report) {
        os << ",,,," << 0 << ',' << row.report->seed;
    } else {
        os << ",,,,0,";
    }
    os << '\n';
    os.precision(old);
}

inline void write_power_csv(std::ostream& os, const PowerTable& table) {
    write_power_csv_header(os);
    for (const auto& row : table.rows) write_power_csv_row(os, row);
}

inline void write_power_csv(std::ostream& os, const PowerReport& r) {
    write_power_csv_header(os);
    write_power_csv_row(os, {r.method, r.scenario, r.n, r.d, r});
}

/// Per-trial log: trial,change,alarm,degenerate.
inline void write_trial_log_csv(std::ostream& os, const PowerReport& report) {
    os << "trial,change,alarm,degenerate\n";
    for (const auto& r : report.log) os << r.trial << ',' << r.change << ',' << r.alarm << ',' << r.degenerate << '\n';
}

}  // namespace gsrcpd
