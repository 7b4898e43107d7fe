#pragma once

#include <map>
#include <tuple>
#include <vector>

#include "affsched/model.hpp"
#include "affsched/trajectory.hpp"

namespace affsched {

struct FluidParams {
    int d1 = 2;
    double lambda = 0.8;
    double mu1 = 1.0;
    double mu2 = 0.5;
    double eps0 = 1e-15; // idle-fraction threshold standing in for q00 == 0
};

// Truncated cumulative fractions qbar_ij, 0 <= i <= imax, j in {0,1}, with
// qbar_{imax+1, j} == 0 as closure. Layout matches Trajectory columns.
struct FluidState {
    FluidParams params;
    int imax = 12;
    std::vector<double> qbar; // qbar[2*i + j]

    static FluidState empty(const FluidParams& p, int imax = 12);
    static FluidState all_type_ii(const FluidParams& p, int imax = 12);

    double at(int level, int j) const { return qbar[static_cast<size_t>(2 * level + j)]; }
    double& at(int level, int j) { return qbar[static_cast<size_t>(2 * level + j)]; }

    void validate() const;
};

// reduced arrival rate: share of arrivals not absorbed by freshly idled servers
double tilde_lambda(const FluidState& state);

std::vector<double> drift(const FluidState& state);

struct FluidRunResult {
    Trajectory trajectory;
    FluidState final_state;
    long indicator_flips = 0;
    bool chattering = false; // > 1e3 indicator flips per unit time
};

// Fixed-step RK4 with post-step projection (clamp to [0,1], repair tiny
// monotonicity violations, renormalize qbar00 + qbar01 = 1). Samples every
// sample_dt on the shared CSV schema.
FluidRunResult integrate(const FluidState& initial, double horizon, double dt, double sample_dt);

// Integration failure: a monotonicity violation too large to repair.
struct integration_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AllocCell {
    int level = 0;
    int j = 0;
    JobType type = JobType::I;

    friend bool operator<(const AllocCell& a, const AllocCell& b) {
        return std::tie(a.level, a.j, a.type) < std::tie(b.level, b.j, b.type);
    }
    friend bool operator==(const AllocCell&, const AllocCell&) = default;
};

// Closed-form allocation probabilities for the combinatorial model, given
// non-cumulative fractions q[2*i+j] summing to 1. Oracle for the empirical
// allocation frequencies.
std::map<AllocCell, double> transition_probs(const std::vector<double>& fractions, int d1);

} // namespace affsched
