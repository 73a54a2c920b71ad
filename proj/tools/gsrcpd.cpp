// gsrcpd command-line tool.
//
// Exit codes: 0 success, 2 usage or domain error, 3 calibration did not
// converge (thresholds still written), 4 internal numerical fault.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gsrcpd/gsrcpd.hpp"

using namespace gsrcpd;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kNotConverged = 3;
constexpr int kInternal = 4;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
    if (seed) return *seed;
    std::random_device rd;
    const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::cerr << "seed: " << s << '\n';
    return s;
}

StatSet parse_stats(const std::vector<std::string>& names) {
    if (names.empty()) return StatSet::all();
    StatSet out;
    for (const auto& n : names) {
        std::stringstream ss(n);
        std::string part;
        while (std::getline(ss, part, ',')) {
            if (part.empty()) continue;
            out.insert(parse_stat_kind(part));
        }
    }
    if (out.empty()) throw DomainError("no statistic selected");
    return out;
}

/// Output stream: a file, or stdout for "-" / empty.
class Output {
  public:
    explicit Output(const std::string& path) : path_(path) {
        if (to_file()) {
            file_.open(path_, std::ios::binary);
            if (!file_) throw DomainError("cannot write '" + path_ + "'");
        }
    }
    std::ostream& stream() { return to_file() ? static_cast<std::ostream&>(file_) : std::cout; }
    [[nodiscard]] bool to_file() const { return !path_.empty() && path_ != "-"; }
    [[nodiscard]] const std::string& path() const { return path_; }
    void close() {
        if (to_file()) file_.close();
        else std::cout.flush();
    }

  private:
    std::string path_;
    std::ofstream file_;
};

void finish_manifest(RunManifest& m, const Output& out) {
    if (!out.to_file()) return;
    m.outputs.push_back(out.path());
    m.finished_at = utc_timestamp();
    m.write(out.path());
}

// calibrate

struct CalibrateArgs {
    std::string input;
    std::string format = "auto";
    std::size_t window = 16;
    double alpha = 0.025;
    std::string graph = "cg";
    std::string method = "permutation";
    std::size_t reps = 500;
    std::optional<std::uint64_t> seed;
    bool symmetric = false;
    std::optional<std::size_t> stream_length;
    double tol = 0.001;
    std::size_t max_iters = 100;
    std::string out;
};

int run_calibrate(const CalibrateArgs& a) {
    RunManifest m;
    m.command = "calibrate";
    m.inputs.push_back(a.input);
    const auto train = read_observations(a.input, parse_input_format(a.format));
    if (train.size() < 2 * a.window) {
        throw DomainError("training input has " + std::to_string(train.size()) +
                          " observations; calibration needs at least 2n = " + std::to_string(2 * a.window));
    }
    ThresholdTable table;
    if (a.method == "parametric") {
        if (parse_graph_kind(a.graph) != GraphKind::Complete) {
            throw DomainError("parametric thresholds assume the complete graph");
        }
        if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
        table = parametric_table(a.window, train.dim(), a.alpha);
    } else {
        CalibrationConfig cc;
        cc.n = a.window;
        cc.alpha = a.alpha;
        cc.reps = a.reps;
        cc.method = parse_resample_method(a.method);
        cc.graph = parse_graph_kind(a.graph);
        cc.seed = resolve_seed(a.seed);
        cc.symmetric_only = a.symmetric;
        cc.stream_length = a.stream_length;
        cc.bisection_tol = a.tol;
        cc.max_iters = a.max_iters;
        m.seed = cc.seed;
        table = calibrate(train, cc);
    }
    m.config = {{"input", a.input},   {"format", a.format},       {"window", a.window},
                {"alpha", a.alpha},   {"graph", a.graph},         {"method", a.method},
                {"reps", a.reps},     {"symmetric", a.symmetric}, {"tol", a.tol},
                {"max_iters", a.max_iters}, {"out", a.out}};
    m.config["stream_length"] = a.stream_length ? Json(*a.stream_length) : Json(nullptr);
    write_threshold_table(a.out, table, manifest_path(a.out));
    m.outputs.push_back(a.out);
    m.finished_at = utc_timestamp();
    m.write(a.out);
    if (!table.converged) {
        std::cerr << "calibration did not converge; thresholds written with converged=false";
        for (auto s : kAllStats) {
            std::cerr << (s == StatKind::Mean ? " (" : ", ") << to_string(s) << " rate "
                      << table.achieved_rate[index_of(s)];
        }
        std::cerr << "). More replicates (--reps) or --symmetric reduce the discreteness of the family rate.\n";
        return kNotConverged;
    }
    return kOk;
}

// detect

struct DetectArgs {
    std::string thresholds;
    std::string input;
    std::string format = "auto";
    std::string out;
    bool offline = false;
    std::string policy = "continuous";
    std::optional<std::size_t> cooldown;
    std::vector<std::string> stats;
    std::optional<std::size_t> window;
    std::optional<std::string> graph;
};

int run_detect(const DetectArgs& a) {
    RunManifest m;
    m.command = "detect";
    m.inputs = {a.thresholds, a.input};
    const auto table = read_threshold_table(a.thresholds);
    if (a.window && *a.window != table.n) {
        throw DomainError("window n=" + std::to_string(*a.window) + " does not match threshold n=" +
                          std::to_string(table.n));
    }
    if (a.graph && parse_graph_kind(*a.graph) != table.graph) {
        throw DomainError("graph '" + *a.graph + "' does not match threshold graph '" +
                          std::string(to_string(table.graph)) + "'");
    }
    const auto monitored = parse_stats(a.stats);
    const auto format = parse_input_format(a.format);
    Output out(a.out);
    std::size_t count = 0;
    if (a.offline) {
        const auto stream = read_observations(a.input, format);
        if (stream.size() > 0) {
            const auto r = detect_blocks(stream, table, monitored);
            for (const auto& e : r.events) write_event_jsonl(out.stream(), e);
            count = r.events.size();
            for (auto b : r.degenerate_blocks) std::cerr << "degenerate block at " << b << '\n';
        }
    } else {
        OnlinePolicy policy;
        if (a.policy == "stop") policy = OnlinePolicy::stop_on_first();
        else if (a.policy == "continuous") policy = OnlinePolicy::continuous(a.cooldown);
        else throw DomainError("unknown policy '" + a.policy + "' (expected stop or continuous)");
        OnlineDetector det(table, policy, monitored);
        // Events count rows from the first record's time, as offline windows do.
        std::optional<std::int64_t> origin;
        scan_observations(a.input, format, [&](std::int64_t t, std::span<const double> y) {
            if (!origin) origin = t;
            for (auto e : det.push(y)) {
                e.time += *origin;
                e.location += *origin;
                e.arrival += *origin;
                write_event_jsonl(out.stream(), e);
                ++count;
            }
        });
    }
    out.close();
    m.config = {{"thresholds", a.thresholds}, {"input", a.input}, {"format", a.format},
                {"offline", a.offline},       {"policy", a.policy}, {"out", a.out}};
    m.config["cooldown"] = a.cooldown ? Json(*a.cooldown) : Json(nullptr);
    m.config["stats"] = a.stats;
    finish_manifest(m, out);
    std::cerr << count << " event(s)\n";
    return kOk;
}

// simulate

struct SimulateArgs {
    std::string scenario;
    std::size_t n = 35;
    std::size_t d = 10;
    std::size_t trials = 100;
    std::optional<std::uint64_t> seed;
    std::string detector = "gsr";
    std::string graph = "cg";
    double alpha = 0.025;
    std::size_t reps = 500;
    std::optional<double> shift;
    double scale = 2.0;
    double p0 = 0.5;
    double p1 = 1.0 / 3.0;
    double change_prob = 0.5;
    bool full_sweep = false;
    std::vector<std::string> stats;
    std::string out;
    std::string log;
    std::string emit_plot;
    std::size_t trial = 0;
    std::vector<std::size_t> plot_ns;
    double beta = 0.1;
};

Scenario make_scenario(const SimulateArgs& a, std::uint64_t seed) {
    Scenario sc;
    sc.kind = parse_scenario_kind(a.scenario);
    sc.n = a.n;
    sc.d = a.d;
    sc.trials = a.trials;
    sc.seed = seed;
    sc.change_present_prob = a.change_prob;
    sc.shift = a.shift;
    sc.scale = a.scale;
    sc.p0 = a.p0;
    sc.p1 = a.p1;
    sc.validate();
    return sc;
}

int emit_plot(const SimulateArgs& a, std::uint64_t seed, RunManifest& m) {
    Output out(a.out);
    auto& os = out.stream();
    os.precision(17);
    if (a.emit_plot == "delta_mu") {
        const auto ns = a.plot_ns.empty() ? std::vector<std::size_t>{a.n} : a.plot_ns;
        if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
        write_delta_mu_csv(os, delta_mu_series(ns, a.d, a.alpha));
    } else if (a.emit_plot == "profile") {
        const auto sc = make_scenario(a, seed);
        const auto sample = generate(sc, a.trial);
        const auto p = profile(sample.window, parse_graph_kind(a.graph));
        os << "k,mean,var_up,var_down\n";
        for (std::size_t k = p.ks.first; k <= p.ks.last; ++k) {
            os << k;
            for (auto s : kAllStats) {
                os << ',';
                if (const auto v = p.value(s, k)) os << *v;
            }
            os << '\n';
        }
        m.seed = seed;
    } else {
        throw DomainError("unknown plot '" + a.emit_plot + "' (expected profile or delta_mu)");
    }
    out.close();
    finish_manifest(m, out);
    return kOk;
}

int run_simulate(const SimulateArgs& a) {
    RunManifest m;
    m.command = "simulate";
    m.config = {{"scenario", a.scenario}, {"n", a.n},         {"d", a.d},           {"trials", a.trials},
                {"detector", a.detector}, {"graph", a.graph}, {"alpha", a.alpha},   {"reps", a.reps},
                {"scale", a.scale},       {"p0", a.p0},       {"p1", a.p1},         {"change_prob", a.change_prob},
                {"full_sweep", a.full_sweep}, {"stats", a.stats}, {"emit_plot", a.emit_plot}, {"out", a.out}};
    m.config["shift"] = a.shift ? Json(*a.shift) : Json(nullptr);
    if (a.emit_plot == "delta_mu") return emit_plot(a, 0, m);
    (void)parse_scenario_kind(a.scenario);
    const auto seed = resolve_seed(a.seed);
    if (!a.emit_plot.empty()) return emit_plot(a, seed, m);
    const auto sc = make_scenario(a, seed);
    m.seed = seed;
    DetectorConfig cfg;
    if (a.detector == "gsr") cfg.method = PowerMethod::Gsr;
    else if (a.detector == "t2") cfg.method = PowerMethod::Hotelling;
    else if (a.detector == "gec") cfg.method = PowerMethod::EdgeCount;
    else throw DomainError("unknown detector '" + a.detector + "' (expected gsr, t2 or gec)");
    cfg.graph = parse_graph_kind(a.graph);
    cfg.alpha = a.alpha;
    cfg.reps = a.reps;
    cfg.symmetric = !a.full_sweep;
    if (!a.stats.empty()) cfg.monitored = parse_stats(a.stats);
    const auto rep = run_power(sc, cfg);
    Output out(a.out);
    write_power_csv(out.stream(), rep);
    out.close();
    if (!a.log.empty()) {
        std::ofstream log(a.log, std::ios::binary);
        if (!log) throw DomainError("cannot write '" + a.log + "'");
        write_trial_log_csv(log, rep);
        m.outputs.push_back(a.log);
    }
    if (rep.degenerate > 0) std::cerr << rep.degenerate << " degenerate trial(s) excluded\n";
    if (!rep.calibration_converged) std::cerr << "warning: threshold calibration did not converge\n";
    finish_manifest(m, out);
    return kOk;
}

// table

struct TableArgs {
    std::string experiment;
    bool full = false;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> reps;
    std::vector<std::size_t> ns;
    std::vector<std::size_t> ds;
    std::string out;
};

int run_table_cmd(const TableArgs& a) {
    RunManifest m;
    m.command = "table";
    require_experiment(a.experiment);
    TableOptions opt;
    opt.full = a.full;
    opt.seed = resolve_seed(a.seed);
    opt.trials = a.trials;
    opt.reps = a.reps;
    opt.ns = a.ns;
    opt.ds = a.ds;
    m.seed = opt.seed;
    m.config = {{"experiment", a.experiment}, {"full", a.full}, {"ns", a.ns}, {"ds", a.ds}, {"out", a.out}};
    m.config["trials"] = a.trials ? Json(*a.trials) : Json(nullptr);
    m.config["reps"] = a.reps ? Json(*a.reps) : Json(nullptr);
    const auto table = run_table(a.experiment, opt);
    Output out(a.out);
    write_power_csv(out.stream(), table);
    out.close();
    for (const auto& note : table.notes) std::cerr << "note: " << note << '\n';
    m.config["notes"] = table.notes;
    finish_manifest(m, out);
    return kOk;
}

// power

struct PowerArgs {
    std::size_t n = 30;
    std::size_t d = 10;
    double alpha = 0.05;
    double beta = 0.1;
    double sigma2 = 1.0;
    std::optional<double> mu_l;
    std::optional<double> mu_r;
    std::string out;
};

int run_power_cmd(const PowerArgs& a) {
    PowerInputs in{a.n, a.d, a.alpha, a.beta, a.sigma2, a.mu_l, a.mu_r};
    in.validate();
    if (!(a.alpha + a.beta < 1.0)) throw DomainError("beta must be below 1 - alpha");
    Json j;
    j["n"] = a.n;
    j["d"] = a.d;
    j["alpha"] = a.alpha;
    j["beta"] = a.beta;
    j["sigma2"] = a.sigma2;
    j["mu_l_sq"] = in.left();
    j["mu_r_sq"] = in.right();
    j["delta_mu"] = delta_mu(in);
    j["delta_sigma_plus"] = delta_sigma_plus(in);
    j["delta_sigma_minus"] = delta_sigma_minus(in);
    j["min_radius"] = min_radius(a.alpha, a.beta, a.n, a.d, a.sigma2);
    j["gap_expectation"] = gap_expectation(a.n, a.d, a.sigma2);
    Output out(a.out);
    out.stream() << j.dump(2) << '\n';
    out.close();
    RunManifest m;
    m.command = "power";
    m.config = j;
    finish_manifest(m, out);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph-spanning-ratio change-point detection"};
    app.set_version_flag("--version", std::string(GSRCPD_VERSION));
    app.require_subcommand(1);

    CalibrateArgs ca;
    auto* cal = app.add_subcommand("calibrate", "Calibrate per-k thresholds on H0 training data");
    cal->add_option("--input", ca.input, "Training data (CSV or JSONL)")->required();
    cal->add_option("--format", ca.format, "auto, csv or jsonl")->capture_default_str();
    cal->add_option("--window", ca.window, "Window half-length n")->capture_default_str();
    cal->add_option("--alpha", ca.alpha, "Family-wise level")->capture_default_str();
    cal->add_option("--graph", ca.graph, "cg, mst or nng")->capture_default_str();
    cal->add_option("--method", ca.method, "permutation, bootstrap or parametric")->capture_default_str();
    cal->add_option("--reps", ca.reps, "Resamples B")->capture_default_str();
    cal->add_option("--seed", ca.seed, "RNG seed (generated and printed when absent)");
    cal->add_flag("--symmetric", ca.symmetric, "Calibrate k = n only");
    cal->add_option("--stream-length", ca.stream_length, "Rows per resampled stream (default: all)");
    cal->add_option("--tol", ca.tol, "Bisection tolerance")->capture_default_str();
    cal->add_option("--max-iters", ca.max_iters, "Bisection iteration cap")->capture_default_str();
    cal->add_option("--out", ca.out, "Threshold JSON path")->required();

    DetectArgs da;
    auto* det = app.add_subcommand("detect", "Run the detector over a stream and write JSONL events");
    det->add_option("--thresholds", da.thresholds, "Threshold JSON")->required();
    det->add_option("--input", da.input, "Stream (CSV or JSONL)")->required();
    det->add_option("--format", da.format, "auto, csv or jsonl")->capture_default_str();
    det->add_option("--out", da.out, "Events JSONL path (stdout when absent)");
    det->add_flag("--offline", da.offline, "Consecutive non-overlapping 2n blocks");
    det->add_option("--policy", da.policy, "continuous or stop")->capture_default_str();
    det->add_option("--cooldown", da.cooldown, "Pushes suppressed after an event (default 2n)");
    det->add_option("--stats", da.stats, "Monitored statistics: mean,var_up,var_down")->delimiter(',');
    det->add_option("--window", da.window, "Expected window half-length n");
    det->add_option("--graph", da.graph, "Expected graph kind");

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Detection power of one detector on one scenario");
    sim->add_option("--scenario", sa.scenario, "Scenario id");
    sim->add_option("--n", sa.n, "Window half-length")->capture_default_str();
    sim->add_option("--d", sa.d, "Dimension (nodes for graph scenarios)")->capture_default_str();
    sim->add_option("--trials", sa.trials, "Trials")->capture_default_str();
    sim->add_option("--seed", sa.seed, "RNG seed (generated and printed when absent)");
    sim->add_option("--detector", sa.detector, "gsr, t2 or gec")->capture_default_str();
    sim->add_option("--graph", sa.graph, "cg, mst or nng")->capture_default_str();
    sim->add_option("--alpha", sa.alpha, "Level")->capture_default_str();
    sim->add_option("--reps", sa.reps, "Resamples")->capture_default_str();
    sim->add_option("--shift", sa.shift, "Mean shift per coordinate (default d^(-1/3))");
    sim->add_option("--scale", sa.scale, "Variance or scale factor")->capture_default_str();
    sim->add_option("--p0", sa.p0, "Edge probability before the change")->capture_default_str();
    sim->add_option("--p1", sa.p1, "Edge probability after the change")->capture_default_str();
    sim->add_option("--change-prob", sa.change_prob, "Probability a trial holds a change")->capture_default_str();
    sim->add_flag("--full-sweep", sa.full_sweep, "Scan every k instead of k = n");
    sim->add_option("--stats", sa.stats, "Monitored statistics")->delimiter(',');
    sim->add_option("--out", sa.out, "CSV path (stdout when absent)");
    sim->add_option("--log", sa.log, "Per-trial log CSV");
    sim->add_option("--emit-plot", sa.emit_plot, "profile or delta_mu");
    sim->add_option("--trial", sa.trial, "Trial drawn for the profile plot")->capture_default_str();
    sim->add_option("--plot-ns", sa.plot_ns, "Window sizes of the delta_mu series")->delimiter(',');

    TableArgs ta;
    auto* tab = app.add_subcommand("table", "Reproduce a detection-power table");
    tab->add_option("experiment", ta.experiment, "Experiment id")->required();
    tab->add_flag("--full", ta.full, "Every GSR graph and 2000 resamples");
    tab->add_option("--seed", ta.seed, "RNG seed (generated and printed when absent)");
    tab->add_option("--trials", ta.trials, "Trials per cell");
    tab->add_option("--reps", ta.reps, "Resamples");
    tab->add_option("--ns", ta.ns, "Restrict n")->delimiter(',');
    tab->add_option("--ds", ta.ds, "Restrict d")->delimiter(',');
    tab->add_option("--out", ta.out, "CSV path (stdout when absent)");

    PowerArgs pa;
    auto* pow = app.add_subcommand("power", "Power thresholds and minimax radius as JSON");
    pow->add_option("--n", pa.n)->capture_default_str();
    pow->add_option("--d", pa.d)->capture_default_str();
    pow->add_option("--alpha", pa.alpha)->capture_default_str();
    pow->add_option("--beta", pa.beta)->capture_default_str();
    pow->add_option("--sigma2", pa.sigma2)->capture_default_str();
    pow->add_option("--mu-l", pa.mu_l, "Left-block spanning expectation");
    pow->add_option("--mu-r", pa.mu_r, "Right-block spanning expectation");
    pow->add_option("--out", pa.out, "JSON path (stdout when absent)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*cal) return run_calibrate(ca);
        if (*det) return run_detect(da);
        if (*sim) {
            if (sa.emit_plot != "delta_mu" && sa.scenario.empty()) {
                throw DomainError("--scenario is required (registered: " + [] {
                    std::string s;
                    for (const auto& id : scenario_ids()) s += (s.empty() ? "" : ", ") + std::string(id);
                    return s;
                }() + ")");
            }
            return run_simulate(sa);
        }
        if (*tab) return run_table_cmd(ta);
        if (*pow) return run_power_cmd(pa);
    } catch (const NumericalFault& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInternal;
    } catch (const DegenerateWindow& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInternal;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kUsage;
}
