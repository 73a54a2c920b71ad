#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsrcpd/calibrate.hpp"
#include "gsrcpd/error.hpp"
#include "gsrcpd/graphkit.hpp"
#include "gsrcpd/gsr_stats.hpp"
#include "gsrcpd/observation.hpp"

namespace gsrcpd {

/// One threshold exceedance. Indices are 0-based stream positions: the
/// window covers [time - n, time + n - 1] and `arrival` is its newest row.
struct DetectionEvent {
    std::int64_t time = 0;
    /// First row of the right block, time - n + k.
    std::int64_t location = 0;
    StatKind stat = StatKind::Mean;
    std::size_t k = 0;
    double value = 0.0;
    double threshold = 0.0;
    std::size_t window_n = 0;
    std::int64_t arrival = 0;

    friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

struct DetectionResult {
    std::vector<DetectionEvent> events;
    /// Reference points skipped because a statistic was undefined.
    std::vector<std::size_t> degenerate_ks;
};

namespace detail {

inline void require_compatible(const ObservationWindow& window, const ThresholdTable& table) {
    if (window.size() != 2 * table.n) {
        throw DomainError("window holds " + std::to_string(window.size()) + " observations but thresholds expect 2n = " +
                          std::to_string(2 * table.n));
    }
    if (table.d != 0 && window.dim() != table.d) {
        throw DimensionMismatch("window dimension " + std::to_string(window.dim()) +
                                " does not match threshold dimension " + std::to_string(table.d));
    }
}

/// Exceedances of one profile in scan order: k ascending, then mean,
/// variance increase, variance decrease.
inline std::vector<DetectionEvent> exceedances(const StatisticProfile& p, const ThresholdTable& table,
                                               StatSet monitored, std::int64_t anchor) {
    std::vector<DetectionEvent> out;
    const auto n = static_cast<std::int64_t>(p.n);
    for (std::size_t k = p.ks.first; k <= p.ks.last; ++k) {
        for (auto s : kAllStats) {
            if (!monitored.contains(s)) continue;
            const auto th = table.threshold(s, k);
            const auto v = p.value(s, k);
            if (!th || !v || !(*v > *th)) continue;
            out.push_back({anchor + n, anchor + static_cast<std::int64_t>(k), s, k, *v, *th, p.n,
                           anchor + 2 * n - 1});
        }
    }
    return out;
}

inline void sort_by_stat_then_k(std::vector<DetectionEvent>& events) {
    std::stable_sort(events.begin(), events.end(), [](const DetectionEvent& a, const DetectionEvent& b) {
        if (a.stat != b.stat) return index_of(a.stat) < index_of(b.stat);
        return a.k < b.k;
    });
}

}  // namespace detail

/// Every (stat, k) exceedance of one 2n window, sorted by (stat, k).
/// Throws DegenerateWindow when no statistic is defined at any k.
inline DetectionResult detect_offline(const ObservationWindow& window, const ThresholdTable& table, GraphKind graph,
                                      StatSet monitored = StatSet::all()) {
    detail::require_compatible(window, table);
    const auto p = profile(window, graph, table.k_range());
    if (p.defined_count() == 0) throw DegenerateWindow("every reference point of the window is degenerate");
    DetectionResult r;
    r.events = detail::exceedances(p, table, monitored, window.anchor());
    detail::sort_by_stat_then_k(r.events);
    r.degenerate_ks = p.degenerate_ks;
    return r;
}

inline DetectionResult detect_offline(const ObservationWindow& window, const ThresholdTable& table,
                                      StatSet monitored = StatSet::all()) {
    return detect_offline(window, table, table.graph, monitored);
}

struct OnlinePolicy {
    enum class Mode { StopOnFirst, ContinuousWithCooldown };
    Mode mode = Mode::ContinuousWithCooldown;
    /// Pushes without detection after an event; 2n when unset.
    std::optional<std::size_t> cooldown;

    static OnlinePolicy stop_on_first() { return {Mode::StopOnFirst, std::nullopt}; }
    static OnlinePolicy continuous(std::optional<std::size_t> c = {}) { return {Mode::ContinuousWithCooldown, c}; }
};

/// Sliding-window detector over a stream of observations.
class OnlineDetector {
  public:
    explicit OnlineDetector(ThresholdTable table, OnlinePolicy policy = OnlinePolicy::continuous(),
                            StatSet monitored = StatSet::all())
        : table_(std::move(table)),
          policy_(policy),
          monitored_(monitored),
          ks_(table_.k_range()),
          cooldown_(policy.cooldown.value_or(2 * table_.n)) {
        if (table_.n < 2) throw DomainError("detector needs n >= 2");
        if (ks_.first < 2 || ks_.last > 2 * table_.n - 2) throw DomainError("threshold k range outside [2, 2n-2]");
    }

    std::vector<DetectionEvent> push(std::span<const double> y) {
        if (dim_ == 0) {
            if (table_.d != 0 && y.size() != table_.d) {
                throw DimensionMismatch("observation dimension " + std::to_string(y.size()) +
                                        " does not match threshold dimension " + std::to_string(table_.d));
            }
            if (y.empty()) throw DimensionMismatch("empty observation");
            dim_ = y.size();
            ring_.assign(2 * table_.n * dim_, 0.0);
        } else if (y.size() != dim_) {
            throw DimensionMismatch("observation dimension " + std::to_string(y.size()) + ", expected " +
                                    std::to_string(dim_));
        }
        require_finite(y, "observation");
        if (terminal_) {
            pushed_after_terminal_ = true;
            return {};
        }
        std::copy(y.begin(), y.end(), ring_.begin() + static_cast<std::ptrdiff_t>(head_ * dim_));
        head_ = (head_ + 1) % (2 * table_.n);
        ++seen_;
        if (!full()) return {};
        if (cooldown_remaining_ > 0) {
            --cooldown_remaining_;
            return {};
        }
        const auto window = current_window();
        const auto p = profile(SpanningEngine(window, table_.graph), ks_);
        if (p.defined_count() == 0) {
            ++degenerate_windows_;
            return {};
        }
        auto events = detail::exceedances(p, table_, monitored_, window.anchor());
        if (events.empty()) return events;
        if (policy_.mode == OnlinePolicy::Mode::StopOnFirst) {
            events.resize(1);
            terminal_ = true;
        } else {
            detail::sort_by_stat_then_k(events);
            cooldown_remaining_ = cooldown_;
        }
        return events;
    }

    /// The latest 2n observations in arrival order, anchored at their stream index.
    [[nodiscard]] ObservationWindow current_window() const {
        if (!full()) throw DomainError("detector buffer is not full yet");
        const std::size_t m = 2 * table_.n;
        ObservationWindow w(dim_, static_cast<std::int64_t>(seen_ - m));
        w.reserve(m);
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t slot = (head_ + i) % m;
            w.push_back(std::span<const double>(ring_.data() + slot * dim_, dim_));
        }
        return w;
    }

    [[nodiscard]] bool full() const { return seen_ >= 2 * table_.n; }
    [[nodiscard]] bool terminal() const { return terminal_; }
    /// Set when observations arrive after a StopOnFirst detector has fired.
    [[nodiscard]] bool pushed_after_terminal() const { return pushed_after_terminal_; }
    [[nodiscard]] std::size_t samples_seen() const { return seen_; }
    [[nodiscard]] std::size_t cooldown_remaining() const { return cooldown_remaining_; }
    [[nodiscard]] std::size_t degenerate_windows() const { return degenerate_windows_; }
    [[nodiscard]] const ThresholdTable& table() const { return table_; }
    [[nodiscard]] std::size_t n() const { return table_.n; }

  private:
    ThresholdTable table_;
    OnlinePolicy policy_;
    StatSet monitored_;
    KRange ks_;
    std::size_t cooldown_;
    std::size_t dim_ = 0;
    std::vector<double> ring_;
    std::size_t head_ = 0;
    std::size_t seen_ = 0;
    std::size_t cooldown_remaining_ = 0;
    std::size_t degenerate_windows_ = 0;
    bool terminal_ = false;
    bool pushed_after_terminal_ = false;
};

struct MultiWindowStep {
    /// Pooled mean statistic over full buffers; empty until one fills.
    std::optional<PooledStatistic> pooled;
    std::map<std::size_t, std::vector<DetectionEvent>> events;
};

/// A family of detectors over window sizes n with the pooled mean test
/// sup_n (R_mu,n(k = n) - rho_mu,n) > 0.
class MultiWindowDetector {
  public:
    explicit MultiWindowDetector(const std::vector<ThresholdTable>& tables,
                                 OnlinePolicy policy = OnlinePolicy::continuous(), StatSet monitored = StatSet::all()) {
        if (tables.empty()) throw DomainError("multi-window detector needs at least one window size");
        for (const auto& t : tables) {
            if (!t.threshold(StatKind::Mean, t.n)) {
                throw DomainError("thresholds for n=" + std::to_string(t.n) + " lack the mean entry at k = n");
            }
            if (!detectors_.emplace(t.n, OnlineDetector(t, policy, monitored)).second) {
                throw DomainError("duplicate window size n=" + std::to_string(t.n));
            }
        }
    }

    MultiWindowStep push(std::span<const double> y) {
        MultiWindowStep step;
        std::map<std::size_t, Margin> margins;
        for (auto& [n, det] : detectors_) {
            auto ev = det.push(y);
            if (!ev.empty()) step.events[n] = std::move(ev);
            if (!det.full()) continue;
            const SpanningEngine engine(det.current_window(), det.table().graph);
            const auto t = engine.triplet(n);
            const double denom = 2.0 * (t.left + t.right);
            if (!(denom > 0.0)) continue;
            margins[n] = {r_mu(t.left, t.right, t.full, n, n), *det.table().threshold(StatKind::Mean, n)};
        }
        if (!margins.empty()) step.pooled = pooled_mu(margins);
        return step;
    }

    [[nodiscard]] const std::map<std::size_t, OnlineDetector>& detectors() const { return detectors_; }

  private:
    std::map<std::size_t, OnlineDetector> detectors_;
};

/// Offline detection over consecutive non-overlapping 2n blocks of a
/// stream; a trailing partial block is ignored. Fully degenerate blocks are
/// listed instead of raising.
struct BlockDetection {
    std::vector<DetectionEvent> events;
    std::vector<std::int64_t> degenerate_blocks;
};

inline BlockDetection detect_blocks(const ObservationWindow& stream, const ThresholdTable& table,
                                    StatSet monitored = StatSet::all()) {
    BlockDetection out;
    const std::size_t m = 2 * table.n;
    for (std::size_t a = 0; a + m <= stream.size(); a += m) {
        const auto block = stream.slice(a, a + m);
        try {
            auto r = detect_offline(block, table, monitored);
            out.events.insert(out.events.end(), r.events.begin(), r.events.end());
        } catch (const DegenerateWindow&) {
            out.degenerate_blocks.push_back(block.anchor());
        }
    }
    return out;
}

}  // namespace gsrcpd
