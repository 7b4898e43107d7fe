#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "affsched/fluid.hpp"
#include "affsched/model.hpp"
#include "affsched/rng.hpp"
#include "affsched/trajectory.hpp"

namespace affsched {

struct SimConfig {
    explicit SimConfig(SelectionFamily f) : family(std::move(f)) {}

    SelectionFamily family;
    double mu1 = 1.0;
    double mu2 = 0.5;
    double horizon = 100.0;
    double sample_dt = 0.1;
    std::uint64_t seed = 1;
    int record_imax = 12;

    enum class Init { Empty, AllTypeII, Explicit };
    Init init = Init::Empty;
    std::vector<ServerConfig> initial; // Init::Explicit only
};

OccupancyState initial_state(const SimConfig& cfg);

// One uniform draw of a primary selection. Combinatorial families are sampled
// without materializing the subsets (Floyd's algorithm).
std::vector<int> sample_selection(const SelectionFamily& family, Rng& rng);

// Called after every applied event with the event time and the new state.
using EventObserver = std::function<void(double, const OccupancyState&)>;

// Event-driven continuous-time simulation: one aggregate arrival clock plus
// aggregate service clocks per server class. Snapshots the fluid-scaled
// cumulative occupancy every sample_dt. Bitwise reproducible per seed.
Trajectory run(const SimConfig& cfg);
Trajectory run(const SimConfig& cfg, const EventObserver& observer);

// Replays independent arrivals against the frozen initial state of cfg and
// tallies where the allocation rule places them; comparable directly with
// transition_probs. Combinatorial families only.
std::map<AllocCell, double> empirical_allocation_frequencies(const SimConfig& cfg,
                                                             long n_arrivals);

} // namespace affsched
