// Statistic profile of one 2n window with a mean change in the middle, on
// all three graph kinds, against parametric complete-graph thresholds.

#include <iostream>

#include "gsrcpd/gsrcpd.hpp"

using namespace gsrcpd;

int main() {
    const std::size_t n = 20, d = 50;
    Rng rng(11);
    ObservationWindow w(d);
    Observation y(d);
    for (std::size_t i = 0; i < 2 * n; ++i) {
        rng.fill_normal(y, i < n ? 0.0 : 0.4);
        w.push_back(y);
    }

    for (auto g : {GraphKind::Complete, GraphKind::MinimumSpanningTree, GraphKind::NearestNeighbor}) {
        const auto p = profile(w, g, symmetric_k_range(n));
        std::cout << to_string(g) << ": mean " << p.value(StatKind::Mean, n).value_or(NAN) << "  var_up "
                  << p.value(StatKind::VarUp, n).value_or(NAN) << "  var_down "
                  << p.value(StatKind::VarDown, n).value_or(NAN) << '\n';
    }

    const auto table = parametric_table(n, d, 0.025);
    const auto result = detect_offline(w, table, GraphKind::Complete);
    std::cout << result.events.size() << " exceedance(s) against parametric thresholds\n";
    for (const auto& e : result.events) std::cout << "  " << to_string(e.stat) << " k=" << e.k << " value " << e.value << '\n';
}
