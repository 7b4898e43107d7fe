#include "affsched/fixedpoint.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "affsched/model.hpp"

namespace affsched {

namespace {

double ipow(double x, int n) {
    double acc = 1.0;
    double base = x;
    for (int e = n; e > 0; e >>= 1) {
        if (e & 1) acc *= base;
        base *= base;
    }
    return acc;
}

void check_rates(double lambda, double mu1, double mu2) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("fixedpoint: lambda must be positive");
    if (!(mu1 > mu2) || !(mu2 > 0.0))
        throw std::invalid_argument("fixedpoint: need mu1 > mu2 > 0");
}

void check_queueing_regime(double lambda, double mu1, double mu2) {
    check_rates(lambda, mu1, mu2);
    if (lambda <= mu2)
        throw std::domain_error("fixedpoint: lambda <= mu2, secondary service absorbs all load");
    if (lambda >= mu1)
        throw std::domain_error("fixedpoint: lambda >= mu1, system not stabilizable");
}

// f(x) = a x^d1 - x + lambda/mu1 with a = lambda (1/mu2 - 1/mu1); its roots in
// (0,1) are the busy fractions of the idle-server equilibria
double root_fn(double x, int d1, double a, double lambda_over_mu1) {
    return a * ipow(x, d1) - x + lambda_over_mu1;
}

double bisect(double lo, double hi, int d1, double a, double lm1) {
    double flo = root_fn(lo, d1, a, lm1);
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = root_fn(mid, d1, a, lm1);
        if ((flo <= 0.0) == (fmid <= 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

NoQueueingRoot make_root(double x, int d1, double lambda, double mu1, double mu2,
                         bool degenerate) {
    NoQueueingRoot r;
    r.x = x;
    r.q00 = 1.0 - x;
    const double xd = ipow(x, d1);
    r.q01 = lambda / mu2 * xd;
    r.q10 = lambda / mu1 * (1.0 - xd);
    r.eig = local_stability(r.q00, d1, lambda, mu1, mu2);
    r.degenerate = degenerate;
    return r;
}

} // namespace

std::vector<double> queueing_fixed_point(int d1, double lambda, double mu1, double mu2,
                                         int i_max) {
    if (d1 < 1) throw std::invalid_argument("fixedpoint: d1 must be >= 1");
    if (i_max < 0) throw std::invalid_argument("fixedpoint: i_max must be >= 0");
    check_queueing_regime(lambda, mu1, mu2);
    const double r = (lambda - mu2) / (mu1 - mu2);
    std::vector<double> seq(static_cast<size_t>(i_max) + 1);
    double v = 1.0;
    for (int i = 0; i <= i_max; ++i) {
        seq[static_cast<size_t>(i)] = v;
        v = r * ipow(v, d1); // exponent recurrence (d1^i - 1)/(d1 - 1)
    }
    return seq;
}

double x_tilde(int d1, double lambda, double mu1, double mu2) {
    if (d1 < 2) throw std::invalid_argument("fixedpoint: x_tilde needs d1 >= 2");
    check_rates(lambda, mu1, mu2);
    const double a = lambda * (1.0 / mu2 - 1.0 / mu1);
    return std::pow(1.0 / (static_cast<double>(d1) * a), 1.0 / (d1 - 1));
}

EigenPair local_stability(double q00_star, int d1, double lambda, double mu1, double mu2) {
    if (d1 < 1) throw std::invalid_argument("fixedpoint: d1 must be >= 1");
    check_rates(lambda, mu1, mu2);
    const double x = 1.0 - q00_star;
    const double disc =
        (mu1 - mu2) * (mu1 - mu2) + 4.0 * lambda * d1 * (mu1 - mu2) * ipow(x, d1 - 1);
    const double s = std::sqrt(disc);
    EigenPair e;
    e.alpha_minus = 0.5 * (-(mu1 + mu2) - s);
    e.alpha_plus = 0.5 * (-(mu1 + mu2) + s);
    e.inconclusive = std::abs(e.alpha_plus) < 1e-12;
    e.stable = !e.inconclusive && e.alpha_plus < 0.0;
    return e;
}

std::vector<NoQueueingRoot> no_queueing_fixed_points(int d1, double lambda, double mu1,
                                                     double mu2) {
    if (d1 < 1) throw std::invalid_argument("fixedpoint: d1 must be >= 1");
    check_rates(lambda, mu1, mu2);
    const double a = lambda * (1.0 / mu2 - 1.0 / mu1);
    const double lm1 = lambda / mu1;

    std::vector<NoQueueingRoot> roots;
    if (d1 == 1) {
        // linear f: at most one root, present only when secondary service
        // outpaces arrivals
        if (lambda < mu2) {
            const double q00 = (mu2 - lambda) * mu1 / ((mu2 - lambda) * mu1 + lambda * mu2);
            roots.push_back(make_root(1.0 - q00, d1, lambda, mu1, mu2, false));
        }
        return roots;
    }

    const double xt = x_tilde(d1, lambda, mu1, mu2);
    if (xt >= 1.0) {
        // f decreases on all of (0,1): a single crossing iff f(1) < 0
        if (root_fn(1.0, d1, a, lm1) < 0.0)
            roots.push_back(make_root(bisect(0.0, 1.0, d1, a, lm1), d1, lambda, mu1, mu2, false));
        return roots;
    }

    const double fmin = root_fn(xt, d1, a, lm1);
    if (fmin > 0.0) return roots;
    if (fmin == 0.0) {
        // tangency: the two crossings coincide at the critical point
        roots.push_back(make_root(xt, d1, lambda, mu1, mu2, true));
        return roots;
    }
    roots.push_back(make_root(bisect(0.0, xt, d1, a, lm1), d1, lambda, mu1, mu2, false));
    if (root_fn(1.0, d1, a, lm1) > 0.0)
        roots.push_back(make_root(bisect(xt, 1.0, d1, a, lm1), d1, lambda, mu1, mu2, false));
    return roots;
}

int d1_star(double lambda, double mu1, double mu2) {
    check_queueing_regime(lambda, mu1, mu2);
    const double a = lambda * (1.0 / mu2 - 1.0 / mu1);
    for (int d = 2; d <= 1000000; ++d) {
        const double da = static_cast<double>(d) * a;
        if (da <= 1.0) continue;
        if ((1.0 - 1.0 / d) * (mu1 / lambda) > std::pow(da, 1.0 / (d - 1))) return d;
    }
    throw internal_error("fixedpoint: d1_star scan did not terminate");
}

MetricsReport metrics(int d1, double lambda, double mu1, double mu2) {
    if (d1 < 1) throw std::invalid_argument("fixedpoint: d1 must be >= 1");
    check_queueing_regime(lambda, mu1, mu2);
    const double r = (lambda - mu2) / (mu1 - mu2);
    const double rho = lambda / mu1;

    MetricsReport m;
    if (d1 == 1) {
        m.eq_cm = r / (1.0 - r);
        m.eq_jsq = rho * rho / (1.0 - rho);
    } else {
        double v = r;
        for (int i = 0; i < 1000 && v >= 1e-16; ++i) {
            m.eq_cm += v;
            v = r * ipow(v, d1);
        }
        double u = rho * ipow(rho, d1); // level-2 term of the power-of-d cascade
        for (int i = 0; i < 1000 && u >= 1e-16; ++i) {
            m.eq_jsq += u;
            u = rho * ipow(u, d1);
        }
    }
    m.eq_i = m.eq_cm - r;
    m.eq_ii = r;
    m.eq_ra = rho * rho / (1.0 - rho);

    m.lambda_tilde = lambda - mu2 * (1.0 - r);
    m.switch_fraction = (lambda - m.lambda_tilde) / lambda;
    m.ew_i = m.eq_i / m.lambda_tilde;
    m.ew_ii = m.eq_ii / (lambda - m.lambda_tilde);
    m.ew = (m.lambda_tilde * m.ew_i + (lambda - m.lambda_tilde) * m.ew_ii) / lambda;
    m.ew_jsq = m.eq_jsq / lambda;
    m.ew_ra = m.eq_ra / lambda;
    return m;
}

} // namespace affsched
