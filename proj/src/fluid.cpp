#include "affsched/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace affsched {

namespace {

// x^n by squaring. The drift loop evaluates ~4 powers per level per call and
// std::pow is an order of magnitude slower for small integer exponents.
double ipow(double x, int n) {
    double acc = 1.0;
    double base = x;
    for (int e = n; e > 0; e >>= 1) {
        if (e & 1) acc *= base;
        base *= base;
    }
    return acc;
}

void check_params(const FluidParams& p) {
    if (p.d1 < 1) throw std::invalid_argument("fluid: d1 must be >= 1");
    if (!(p.lambda > 0.0) || !std::isfinite(p.lambda))
        throw std::invalid_argument("fluid: lambda must be positive");
    if (!(p.mu1 > p.mu2) || !(p.mu2 > 0.0))
        throw std::invalid_argument("fluid: need mu1 > mu2 > 0");
    if (!(p.eps0 > 0.0)) throw std::invalid_argument("fluid: eps0 must be positive");
}

void drift_into(const FluidState& s, std::vector<double>& d, std::vector<double>& pw_p,
                std::vector<double>& pw_m) {
    const FluidParams& p = s.params;
    const int imax = s.imax;
    auto qb = [&](int i, int j) -> double { return i <= imax ? s.at(i, j) : 0.0; };

    d.assign(s.qbar.size(), 0.0);
    // RK4 stage states may leave the simplex by a rounding error; clamping the
    // idle fraction keeps the extension mass-conserving without changing the
    // drift at any admissible state.
    const double q00 = std::max(0.0, qb(0, 0) - qb(1, 0));
    const bool on_surface = q00 < p.eps0; // idle servers exhausted at fluid scale
    const double miss = ipow(1.0 - q00, p.d1); // primary selection sees no idle server
    const double lt = tilde_lambda(s);

    // service completions
    d[0] = p.mu2 * (qb(0, 1) - qb(1, 1));
    d[1] = p.mu2 * (qb(1, 1) - qb(0, 1));
    for (int i = 1; i <= imax; ++i) {
        d[static_cast<size_t>(2 * i)] = p.mu1 * (qb(i + 1, 0) - qb(i, 0));
        d[static_cast<size_t>(2 * i + 1)] = p.mu1 * (qb(i + 1, 1) - qb(i, 1));
    }

    // arrivals
    if (!on_surface) {
        d[0] -= p.lambda * miss;            // type II to an idle server
        d[1] += p.lambda * miss;
        d[2] += p.lambda * (1.0 - miss);    // type I to an idle server
    } else {
        d[0] += lt - p.lambda * miss;       // type II absorbs only lambda - lt
        d[1] += p.lambda - lt;
        if (lt > 0.0) {
            // Allocation cell probabilities telescope through two power
            // families: pw_p[i] = (qbar_i0 + qbar_i1)^d1 and
            // pw_m[i] = (qbar_{i+1,0} + qbar_i1)^d1, giving
            // p_{i0} = pw_p[i] - pw_m[i] and p_{i1} = pw_m[i] - pw_p[i+1].
            pw_p.resize(static_cast<size_t>(imax + 2));
            pw_m.resize(static_cast<size_t>(imax + 1));
            pw_p[static_cast<size_t>(imax + 1)] = 0.0;
            for (int i = 1; i <= imax; ++i)
                pw_p[static_cast<size_t>(i)] = ipow(qb(i, 0) + qb(i, 1), p.d1);
            for (int i = 0; i <= imax; ++i)
                pw_m[static_cast<size_t>(i)] = ipow(qb(i + 1, 0) + qb(i, 1), p.d1);
            for (int i = 2; i <= imax; ++i)
                d[static_cast<size_t>(2 * i)] +=
                    lt * (pw_p[static_cast<size_t>(i - 1)] - pw_m[static_cast<size_t>(i - 1)]);
            for (int i = 1; i <= imax; ++i)
                d[static_cast<size_t>(2 * i + 1)] +=
                    lt * (pw_m[static_cast<size_t>(i - 1)] - pw_p[static_cast<size_t>(i)]);
        }
    }
}

} // namespace

FluidState FluidState::empty(const FluidParams& p, int imax) {
    FluidState s;
    s.params = p;
    s.imax = imax;
    s.qbar.assign(static_cast<size_t>(2 * (imax + 1)), 0.0);
    s.at(0, 0) = 1.0;
    s.validate();
    return s;
}

FluidState FluidState::all_type_ii(const FluidParams& p, int imax) {
    FluidState s;
    s.params = p;
    s.imax = imax;
    s.qbar.assign(static_cast<size_t>(2 * (imax + 1)), 0.0);
    s.at(0, 1) = 1.0;
    s.validate();
    return s;
}

void FluidState::validate() const {
    check_params(params);
    if (imax < 1) throw std::invalid_argument("fluid: imax must be >= 1");
    if (qbar.size() != static_cast<size_t>(2 * (imax + 1)))
        throw std::invalid_argument("fluid: qbar size does not match imax");
    for (double v : qbar)
        if (!std::isfinite(v) || v < -1e-12 || v > 1.0 + 1e-12)
            throw std::invalid_argument("fluid: qbar entries must lie in [0, 1]");
    if (std::abs(at(0, 0) + at(0, 1) - 1.0) > 1e-9)
        throw std::invalid_argument("fluid: qbar00 + qbar01 must equal 1");
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < imax; ++i)
            if (at(i + 1, j) > at(i, j) + 1e-9)
                throw std::invalid_argument("fluid: qbar must be non-increasing in the level index");
}

double tilde_lambda(const FluidState& s) {
    const double q10 = s.at(1, 0) - (s.imax >= 2 ? s.at(2, 0) : 0.0);
    const double q01 = s.at(0, 1) - s.at(1, 1);
    const double v = s.params.lambda - s.params.mu1 * q10 - s.params.mu2 * q01;
    return v > 0.0 ? v : 0.0;
}

std::vector<double> drift(const FluidState& state) {
    std::vector<double> d, pw_p, pw_m;
    drift_into(state, d, pw_p, pw_m);
    return d;
}

FluidRunResult integrate(const FluidState& initial, double horizon, double dt, double sample_dt) {
    initial.validate();
    if (!std::isfinite(horizon) || horizon < 0.0)
        throw std::invalid_argument("fluid: horizon must be >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("fluid: dt must be positive");
    if (!(sample_dt > 0.0)) throw std::invalid_argument("fluid: sample_dt must be positive");

    const FluidParams& p = initial.params;
    const int imax = initial.imax;
    const size_t m = initial.qbar.size();

    // Crossing the q00 = 0 surface mid-step overshoots by O(dt); the repair
    // cap is sized to one step of the fastest flows so genuine integrator
    // failures still surface as errors.
    const double surface_cap = 10.0 * (p.lambda + p.mu1 + p.mu2) * dt + 1e-9;

    auto project = [&](FluidState& st) {
        for (double& v : st.qbar) v = std::clamp(v, 0.0, 1.0);
        if (std::abs(st.at(0, 0) + st.at(0, 1) - 1.0) > 1e-6)
            throw integration_error("fluid: level-0 mass drifted away from 1");
        // q00 < 0 means the step ran past idle depletion; restore the idle
        // mass, which the exact dynamics would have held at the surface.
        if (st.at(1, 0) > st.at(0, 0)) {
            if (st.at(1, 0) - st.at(0, 0) > surface_cap)
                throw integration_error("fluid: idle-fraction overshoot too large, reduce dt");
            st.at(0, 0) = st.at(1, 0);
        }
        st.at(0, 1) = 1.0 - st.at(0, 0);
        for (int j = 0; j < 2; ++j) {
            for (int i = (j == 0 ? 1 : 0); i < imax; ++i) {
                const double excess = st.at(i + 1, j) - st.at(i, j);
                if (excess <= 0.0) continue;
                // the (0,1)/(1,1) pair can inherit the surface repair shift
                const double cap = (j == 1 && i == 0) ? surface_cap : 1e-6;
                if (excess > cap)
                    throw integration_error("fluid: monotonicity violation beyond repair");
                st.at(i + 1, j) = st.at(i, j);
            }
        }
    };

    FluidRunResult res;
    res.trajectory.imax = imax;
    auto record = [&](double t, const FluidState& st) {
        res.trajectory.times.push_back(t);
        res.trajectory.rows.push_back(st.qbar);
    };

    FluidState y = initial;
    FluidState stage = initial;
    std::vector<double> k1, k2, k3, k4, pw_p, pw_m;

    auto rk4_step = [&](double h) {
        drift_into(y, k1, pw_p, pw_m);
        for (size_t i = 0; i < m; ++i) stage.qbar[i] = y.qbar[i] + 0.5 * h * k1[i];
        drift_into(stage, k2, pw_p, pw_m);
        for (size_t i = 0; i < m; ++i) stage.qbar[i] = y.qbar[i] + 0.5 * h * k2[i];
        drift_into(stage, k3, pw_p, pw_m);
        for (size_t i = 0; i < m; ++i) stage.qbar[i] = y.qbar[i] + h * k3[i];
        drift_into(stage, k4, pw_p, pw_m);
        for (size_t i = 0; i < m; ++i)
            y.qbar[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    };

    record(0.0, y);
    long flips = 0;
    bool prev_surface = (y.at(0, 0) - y.at(1, 0)) < p.eps0;
    long next_sample = 1;
    const long n_full = static_cast<long>(std::floor(horizon / dt + 1e-9));
    const double tail = horizon - static_cast<double>(n_full) * dt;

    auto after_step = [&](double t) {
        const bool now = (y.at(0, 0) - y.at(1, 0)) < p.eps0;
        if (now != prev_surface) {
            ++flips;
            prev_surface = now;
        }
        while (static_cast<double>(next_sample) * sample_dt <= t + 1e-9) {
            record(static_cast<double>(next_sample) * sample_dt, y);
            ++next_sample;
        }
    };

    for (long k = 1; k <= n_full; ++k) {
        rk4_step(dt);
        project(y);
        after_step(static_cast<double>(k) * dt);
    }
    if (tail > 1e-12) {
        rk4_step(tail);
        project(y);
        after_step(horizon);
    }

    res.final_state = std::move(y);
    res.indicator_flips = flips;
    res.chattering = horizon > 0.0 && static_cast<double>(flips) > 1000.0 * horizon;
    return res;
}

std::map<AllocCell, double> transition_probs(const std::vector<double>& fractions, int d1) {
    if (d1 < 1) throw std::invalid_argument("transition_probs: d1 must be >= 1");
    if (fractions.size() < 2 || fractions.size() % 2 != 0)
        throw std::invalid_argument("transition_probs: fractions must hold (level, j) pairs");
    double total = 0.0;
    for (double v : fractions) {
        if (!std::isfinite(v) || v < -1e-12)
            throw std::invalid_argument("transition_probs: fractions must be non-negative");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("transition_probs: fractions must sum to 1");

    const int imax = static_cast<int>(fractions.size() / 2) - 1;
    std::vector<double> cum(fractions.size(), 0.0);
    for (int i = imax; i >= 0; --i)
        for (int j = 0; j < 2; ++j)
            cum[static_cast<size_t>(2 * i + j)] = fractions[static_cast<size_t>(2 * i + j)] +
                (i < imax ? cum[static_cast<size_t>(2 * (i + 1) + j)] : 0.0);
    auto qbar = [&](int i, int j) -> double {
        return i <= imax ? cum[static_cast<size_t>(2 * i + j)] : 0.0;
    };

    const double q00 = fractions[0];
    const double miss = ipow(1.0 - q00, d1);
    std::map<AllocCell, double> out;
    if (1.0 - miss > 0.0) out[{0, 0, JobType::I}] = 1.0 - miss;
    if (q00 > 0.0) {
        if (miss > 0.0) out[{0, 0, JobType::II}] = miss;
        return out;
    }
    for (int i = 1; i <= imax; ++i) {
        const double v = ipow(qbar(i, 0) + qbar(i, 1), d1) - ipow(qbar(i + 1, 0) + qbar(i, 1), d1);
        if (v > 0.0) out[{i, 0, JobType::I}] = v;
    }
    for (int i = 0; i <= imax; ++i) {
        const double v =
            ipow(qbar(i + 1, 0) + qbar(i, 1), d1) - ipow(qbar(i + 1, 0) + qbar(i + 1, 1), d1);
        if (v > 0.0) out[{i, 1, JobType::I}] = v;
    }
    return out;
}

} // namespace affsched
