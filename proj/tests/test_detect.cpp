#include <gtest/gtest.h>

#include <cmath>

#include "gsrcpd/calibrate.hpp"
#include "gsrcpd/detect.hpp"
#include "test_support.hpp"

using namespace gsrcpd;
using gsrcpd::testing::gaussian_window;
using gsrcpd::testing::shifted_window;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<DetectionEvent> feed(OnlineDetector& det, const ObservationWindow& stream) {
    std::vector<DetectionEvent> all;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        auto ev = det.push(stream.row(i));
        all.insert(all.end(), ev.begin(), ev.end());
    }
    return all;
}

ThresholdTable h0_thresholds(std::size_t n, std::size_t d, std::uint64_t seed, ResampleMethod method) {
    Rng rng(seed);
    CalibrationConfig cfg;
    cfg.n = n;
    cfg.alpha = 0.025;
    cfg.reps = 500;
    cfg.seed = seed;
    cfg.method = method;
    return calibrate(gaussian_window(rng, 2 * n, d), cfg);
}

}  // namespace

TEST(DetectOffline, InfiniteThresholdsGiveNothing) {
    Rng rng(1);
    const auto w = gaussian_window(rng, 20, 4);
    EXPECT_TRUE(detect_offline(w, ThresholdTable::constant(10, 4, kInf)).events.empty());
}

TEST(DetectOffline, NegativeInfiniteThresholdsFlagEverything) {
    Rng rng(2);
    const auto w = gaussian_window(rng, 12, 2);
    const auto r = detect_offline(w, ThresholdTable::constant(6, 2, -kInf));
    ASSERT_EQ(r.events.size(), 27u);
    for (std::size_t i = 1; i < r.events.size(); ++i) {
        const auto& a = r.events[i - 1];
        const auto& b = r.events[i];
        EXPECT_TRUE(index_of(a.stat) < index_of(b.stat) || (a.stat == b.stat && a.k < b.k));
    }
    EXPECT_EQ(r.events.front().time, 6);
    EXPECT_EQ(r.events.front().location, 2);
    EXPECT_EQ(r.events.front().arrival, 11);
}

TEST(DetectOffline, StatisticFilter) {
    Rng rng(3);
    const auto w = gaussian_window(rng, 12, 2);
    const auto r = detect_offline(w, ThresholdTable::constant(6, 2, -kInf), StatSet{StatKind::VarDown});
    ASSERT_EQ(r.events.size(), 9u);
    for (const auto& e : r.events) EXPECT_EQ(e.stat, StatKind::VarDown);
}

TEST(DetectOffline, RejectsMismatchesAndDegenerateWindows) {
    Rng rng(4);
    const auto t = ThresholdTable::constant(6, 2, 1.0);
    EXPECT_THROW(detect_offline(gaussian_window(rng, 10, 2), t), DomainError);
    EXPECT_THROW(detect_offline(gaussian_window(rng, 12, 3), t), DimensionMismatch);
    const auto flat = ObservationWindow(std::vector<Observation>(12, Observation{0.5, 0.5}));
    EXPECT_THROW(detect_offline(flat, t), DegenerateWindow);
    const auto partial = gsrcpd::testing::from_scalars({3, 3, 3, 0, 1, 2, 3, 4});
    const auto r = detect_offline(partial, ThresholdTable::constant(4, 1, -kInf));
    EXPECT_EQ(r.degenerate_ks, (std::vector<std::size_t>{2, 3}));
    for (const auto& e : r.events) EXPECT_FALSE(e.stat == StatKind::VarUp && e.k <= 3);
}

TEST(DetectOffline, LocatesLargeMeanShift) {
    const std::size_t n = 35, d = 10;
    const auto table = h0_thresholds(n, d, 5, ResampleMethod::Permutation);
    Rng rng(6);
    int located = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = detect_offline(shifted_window(rng, n, d, 10.0), table);
        bool hit = false;
        for (const auto& e : r.events) {
            EXPECT_GT(e.value, e.threshold);
            hit = hit || (e.stat == StatKind::Mean && std::llabs(e.location - static_cast<std::int64_t>(n)) <= 3);
        }
        located += hit;
    }
    EXPECT_GE(located, 95);
}

TEST(DetectOffline, FlagsVarianceDoubling) {
    const std::size_t n = 35, d = 100;
    const auto table = h0_thresholds(n, d, 7, ResampleMethod::Permutation);
    Rng rng(8);
    int flagged = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = detect_offline(shifted_window(rng, n, d, 0.0, 2.0), table, StatSet{StatKind::VarUp});
        flagged += !r.events.empty();
    }
    EXPECT_GE(flagged, 90);
}

TEST(OnlineDetector, NothingBeforeBufferFills) {
    Rng rng(9);
    OnlineDetector det(ThresholdTable::constant(5, 3, -kInf));
    const auto w = gaussian_window(rng, 9, 3);
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_TRUE(det.push(w.row(i)).empty());
    EXPECT_FALSE(det.full());
    EXPECT_FALSE(det.push(gaussian_window(rng, 1, 3).row(0)).empty());
}

TEST(OnlineDetector, NullStreamWithInfiniteThresholds) {
    Rng rng(10);
    OnlineDetector det(ThresholdTable::constant(8, 2, kInf), OnlinePolicy::stop_on_first());
    EXPECT_TRUE(feed(det, gaussian_window(rng, 32, 2)).empty());
    EXPECT_FALSE(det.terminal());
    EXPECT_EQ(det.samples_seen(), 32u);
}

TEST(OnlineDetector, StopOnFirstReportsSmallestKThenBecomesTerminal) {
    Rng rng(11);
    OnlineDetector det(ThresholdTable::constant(4, 2, -kInf), OnlinePolicy::stop_on_first());
    const auto events = feed(det, gaussian_window(rng, 20, 2));
    ASSERT_EQ(events.size(), 1u);
    EXPECT_EQ(events[0].k, 2u);
    EXPECT_EQ(events[0].stat, StatKind::Mean);
    EXPECT_EQ(events[0].arrival, 7);
    EXPECT_TRUE(det.terminal());
    EXPECT_TRUE(det.pushed_after_terminal());
}

TEST(OnlineDetector, CooldownSuppressesDetection) {
    Rng rng(12);
    OnlineDetector det(ThresholdTable::constant(4, 1, -kInf), OnlinePolicy::continuous(3), StatSet{StatKind::Mean});
    const auto w = gaussian_window(rng, 20, 1);
    std::vector<std::int64_t> arrivals;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto ev = det.push(w.row(i));
        if (!ev.empty()) arrivals.push_back(ev.front().arrival);
    }
    EXPECT_EQ(arrivals, (std::vector<std::int64_t>{7, 11, 15, 19}));
    OnlineDetector def(ThresholdTable::constant(4, 1, -kInf), OnlinePolicy::continuous(), StatSet{StatKind::Mean});
    feed(def, w.slice(0, 8));
    EXPECT_EQ(def.cooldown_remaining(), 8u);
}

TEST(OnlineDetector, RejectsDimensionChanges) {
    OnlineDetector det(ThresholdTable::constant(4, 2, 1.0));
    EXPECT_THROW(det.push(std::vector<double>{1.0}), DimensionMismatch);
    det.push(std::vector<double>{1.0, 2.0});
    EXPECT_THROW(det.push(std::vector<double>{1.0, 2.0, 3.0}), DimensionMismatch);
    EXPECT_THROW(det.push(std::vector<double>{1.0, NAN}), DomainError);
}

TEST(OnlineDetector, CoherentWithOfflineAtFill) {
    const std::size_t n = 10, d = 5;
    const auto table = h0_thresholds(n, d, 13, ResampleMethod::Bootstrap);
    Rng rng(14);
    for (int trial = 0; trial < 30; ++trial) {
        const auto w = shifted_window(rng, n, d, trial % 2 ? 1.0 : 0.0);
        OnlineDetector det(table);
        const auto online = feed(det, w);
        EXPECT_EQ(online, detect_offline(w, table).events);
    }
}

TEST(OnlineDetector, ReplayDeterminismAndEventInvariants) {
    const std::size_t n = 8, d = 4;
    const auto table = h0_thresholds(n, d, 15, ResampleMethod::Permutation);
    Rng rng(16);
    ObservationWindow stream(d);
    Observation y(d);
    for (int i = 0; i < 200; ++i) {
        rng.fill_normal(y, i >= 100 ? 1.5 : 0.0);
        stream.push_back(y);
    }
    OnlineDetector a(table), b(table);
    const auto ea = feed(a, stream);
    const auto eb = feed(b, stream);
    EXPECT_EQ(ea, eb);
    EXPECT_FALSE(ea.empty());
    for (const auto& e : ea) {
        EXPECT_GT(e.value, e.threshold);
        EXPECT_GE(e.location, e.time - static_cast<std::int64_t>(n) + 2);
        EXPECT_LE(e.location, e.time + static_cast<std::int64_t>(n) - 1);
        EXPECT_EQ(e.arrival, e.time + static_cast<std::int64_t>(n) - 1);
    }
}

TEST(MultiWindow, SingleWindowMatchesPlainDetector) {
    const auto table = h0_thresholds(6, 3, 17, ResampleMethod::Permutation);
    Rng rng(18);
    ObservationWindow stream(3);
    Observation y(3);
    for (int i = 0; i < 80; ++i) {
        rng.fill_normal(y, i >= 40 ? 2.0 : 0.0);
        stream.push_back(y);
    }
    OnlineDetector plain(table);
    MultiWindowDetector multi({table});
    for (std::size_t i = 0; i < stream.size(); ++i) {
        const auto a = plain.push(stream.row(i));
        const auto step = multi.push(stream.row(i));
        const auto it = step.events.find(6);
        EXPECT_EQ(a, it == step.events.end() ? std::vector<DetectionEvent>{} : it->second);
        EXPECT_EQ(step.pooled.has_value(), i >= 11);
    }
    EXPECT_THROW(MultiWindowDetector({}), DomainError);
}

TEST(MultiWindow, OneAlarmingWindowFiresThePool) {
    Rng rng(19);
    auto low = ThresholdTable::constant(4, 2, -1e9);
    auto high = ThresholdTable::constant(6, 2, 1e9);
    MultiWindowDetector multi({low, high});
    std::optional<PooledStatistic> last;
    const auto w = gaussian_window(rng, 12, 2);
    for (std::size_t i = 0; i < w.size(); ++i) last = multi.push(w.row(i)).pooled;
    ASSERT_TRUE(last);
    EXPECT_TRUE(last->alarm);
    EXPECT_GT(last->contributions.at(4), 0.0);
    EXPECT_LT(last->contributions.at(6), 0.0);
}

TEST(MultiWindow, UnionBoundLevelUnderNull) {
    // Per-window parametric thresholds at alpha / 2 for n in {8, 16}.
    const double alpha = 0.05;
    const std::size_t d = 10;
    const auto t8 = parametric_table(8, d, alpha / 2);
    const auto t16 = parametric_table(16, d, alpha / 2);
    Rng rng(20);
    int alarms = 0;
    const int streams = 500;
    for (int s = 0; s < streams; ++s) {
        MultiWindowDetector multi({t8, t16}, OnlinePolicy::continuous(), StatSet{StatKind::Mean});
        const auto w = gaussian_window(rng, 32, d);
        MultiWindowStep step;
        for (std::size_t i = 0; i < w.size(); ++i) step = multi.push(w.row(i));
        alarms += step.pooled->alarm;
    }
    const double se = std::sqrt(alpha * (1 - alpha) / streams);
    EXPECT_LE(alarms / static_cast<double>(streams), alpha + 2 * se);
}

TEST(DetectBlocks, NonOverlappingBlocks) {
    Rng rng(21);
    const auto w = gaussian_window(rng, 25, 2);
    const auto r = detect_blocks(w, ThresholdTable::constant(3, 2, -kInf), StatSet{StatKind::Mean});
    ASSERT_EQ(r.events.size(), 4u * 3u);
    EXPECT_EQ(r.events.back().time, 18 + 3);
    EXPECT_TRUE(r.degenerate_blocks.empty());
}
