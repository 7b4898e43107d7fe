#pragma once

#include <vector>

#include "affsched/fluid.hpp"

namespace affsched {

// Equilibrium of the fluid dynamics with every server holding a secondary
// job: cumulative level fractions qbar*_{i1} for i = 0..i_max (qbar*_{i0}=0).
// Requires mu2 < lambda < mu1; throws std::domain_error otherwise.
std::vector<double> queueing_fixed_point(int d1, double lambda, double mu1, double mu2, int i_max);

struct EigenPair {
    double alpha_minus = 0.0;
    double alpha_plus = 0.0;
    bool stable = false;       // alpha_plus < 0
    bool inconclusive = false; // alpha_plus == 0 at working precision
};

struct NoQueueingRoot {
    double x = 0.0; // busy fraction 1 - q00
    double q00 = 0.0;
    double q01 = 0.0;
    double q10 = 0.0;
    EigenPair eig;
    bool degenerate = false; // tangency: the two roots coincide at the critical point
};

// Roots in (0,1) of f(x) = x^d1 * lambda*(1/mu2 - 1/mu1) - x + lambda/mu1,
// converted to idle-server equilibria (q00*, q01*, q10*). Empty when no such
// equilibrium exists.
std::vector<NoQueueingRoot> no_queueing_fixed_points(int d1, double lambda, double mu1, double mu2);

// Critical point of f: ((1/(d1 * lambda * (1/mu2 - 1/mu1)))^{1/(d1-1)}.
// Separates the stable root (x < x_tilde) from the unstable one. May exceed 1
// when f is monotone on (0,1); requires d1 >= 2.
double x_tilde(int d1, double lambda, double mu1, double mu2);

// Linearized growth rates around a no-queueing equilibrium.
EigenPair local_stability(double q00_star, int d1, double lambda, double mu1, double mu2);

// Minimum selection size for which the idle-server equilibria appear alongside
// the queueing one. Requires mu2 < lambda < mu1.
int d1_star(double lambda, double mu1, double mu2);

// Stationary performance summary at the queueing equilibrium, plus the
// matching quantities for power-of-d and random assignment baselines.
struct MetricsReport {
    double eq_cm = 0.0;   // mean primary jobs per server
    double eq_i = 0.0;    // mean waiting primary jobs per server
    double eq_ii = 0.0;   // mean preempted secondary jobs per server
    double eq_jsq = 0.0;  // power-of-d baseline, waiting jobs per server
    double eq_ra = 0.0;   // random assignment baseline, waiting jobs per server
    double ew_i = 0.0;    // mean wait of jobs that queue
    double ew_ii = 0.0;   // mean wait of jobs parked as secondary
    double ew = 0.0;      // mixture over both job paths
    double ew_jsq = 0.0;
    double ew_ra = 0.0;
    double lambda_tilde = 0.0;   // arrival rate of jobs that queue
    double switch_fraction = 0.0; // share of arrivals parked as secondary
};

MetricsReport metrics(int d1, double lambda, double mu1, double mu2);

} // namespace affsched
