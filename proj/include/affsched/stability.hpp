#pragma once

#include <vector>

#include "affsched/model.hpp"

namespace affsched {

// Optimal fractional split of selection arrival streams over their members.
// splits[s][k] is the fraction of selection s routed to its k-th member
// (aligned with selections()[s].servers); server_load[n] is the resulting
// per-server rate, with max_n server_load[n] = lambda0 up to tolerance.
struct SplitSolution {
    double lambda0 = 0.0;
    std::vector<std::vector<double>> splits;
    std::vector<double> server_load;
};

// Min-max per-server load over all feasible splits, via binary search on the
// load bound with a max-flow feasibility oracle. Absolute tolerance 1e-9.
SplitSolution lambda0(const SelectionFamily& family);

// Stability threshold for the MJSQ(k) reference policy: lambda*N < mu1*(N-k),
// strict.
bool mjsq_condition(int n, int k, double lambda, double mu1);

// Step-function dominance condition for the d-regular graph coupling:
// sum_{i=1}^{N-d-1} C(N-i, k-1) < ((d+1)/N) * C(N, k), evaluated in exact
// integer arithmetic.
bool dregular_condition(int n, int d, int k);

// Smallest d satisfying dregular_condition (d = N-1 always qualifies).
int min_regular_degree(int n, int k);

} // namespace affsched
