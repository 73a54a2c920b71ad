// Calibrates on a null training stream, then monitors a stream with a mean
// change at row 300 and a fourfold variance increase at row 600.

#include <cmath>
#include <iostream>

#include "gsrcpd/gsrcpd.hpp"

using namespace gsrcpd;

int main() {
    const std::size_t n = 16, d = 20;
    Rng rng(2024);

    ObservationWindow train(d);
    Observation y(d);
    for (int i = 0; i < 400; ++i) {
        rng.fill_normal(y);
        train.push_back(y);
    }

    CalibrationConfig cfg;
    cfg.n = n;
    cfg.alpha = 0.025;
    cfg.reps = 2000;
    cfg.seed = 7;
    cfg.stream_length = 300;
    const auto table = calibrate(train, cfg);
    std::cout << "calibrated n=" << table.n << " d=" << table.d << " converged=" << std::boolalpha << table.converged
              << '\n';

    OnlineDetector detector(table, OnlinePolicy::continuous());
    for (std::size_t i = 0; i < 900; ++i) {
        const double mean = i >= 300 ? 1.0 : 0.0;
        const double sd = i >= 600 ? 2.0 : 1.0;
        rng.fill_normal(y, mean, sd);
        for (const auto& e : detector.push(y)) {
            std::cout << "arrival " << e.arrival << "  " << to_string(e.stat) << " at " << e.location << "  value "
                      << e.value << " > " << e.threshold << '\n';
        }
    }
}
