#include "affsched/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <boost/multiprecision/cpp_int.hpp>

namespace affsched {

int StepFunction::inverse(double x) const {
    const auto it = std::lower_bound(values.begin(), values.end(), x);
    if (it == values.end()) return n();
    return static_cast<int>(it - values.begin()) + 1;
}

StepFunction build_f_ref(int n, int k) {
    if (n < 1 || k < 1 || k > n) throw std::invalid_argument("need 1 <= k <= N");
    using boost::multiprecision::cpp_int;
    auto binom = [](int a, int b) {
        if (b < 0 || b > a) return cpp_int(0);
        cpp_int r = 1;
        for (int i = 0; i < b; ++i) {
            r *= a - i;
            r /= i + 1;
        }
        return r;
    };
    const cpp_int total = binom(n, k);
    StepFunction f;
    f.values.resize(static_cast<size_t>(n));
    cpp_int acc = 0;
    for (int x = 1; x <= n; ++x) {
        if (x <= n - k + 1) {
            acc += binom(n - x, k - 1);
            f.values[static_cast<size_t>(x - 1)] = acc.convert_to<double>() / total.convert_to<double>();
        } else {
            f.values[static_cast<size_t>(x - 1)] = 1.0;
        }
    }
    f.values[static_cast<size_t>(n - 1)] = 1.0;
    if (n - k + 1 >= 1) f.values[static_cast<size_t>(n - k)] = 1.0;
    return f;
}

StepFunction build_f_aff(int n, int d) {
    if (d < 1 || d >= n) throw std::invalid_argument("need 1 <= d < N");
    const double head = static_cast<double>(d + 1) / n;
    const int blocks_floor = n / (d + 1);
    const int blocks_ceil = (n + d) / (d + 1);
    const int head_end = n - d - blocks_ceil + 2;
    const int ramp_start = n - d - blocks_floor + 2;
    const bool divisible = n % (d + 1) == 0;
    StepFunction f;
    f.values.resize(static_cast<size_t>(n));
    for (int x = 1; x <= n; ++x) {
        double v;
        if (x >= n - d) {
            v = 1.0;
        } else if (x <= head_end) {
            v = head;
        } else if (divisible && x == ramp_start) {
            v = head + static_cast<double>(n - blocks_floor * (d + 1)) / n;
        } else if (x >= ramp_start) {
            v = 1.0 - head * (n - d - x);
        } else {
            throw internal_error("step-function branch gap");
        }
        f.values[static_cast<size_t>(x - 1)] = v;
    }
    for (int x = 1; x < n; ++x) {
        if (f.values[static_cast<size_t>(x)] < f.values[static_cast<size_t>(x - 1)] - 1e-12)
            throw internal_error("worst-case step function must be nondecreasing");
    }
    return f;
}

int position_index(const std::vector<long>& cumulative, int pos) {
    if (cumulative.empty()) throw std::invalid_argument("cumulative vector must include level 0");
    const long n = cumulative[0];
    if (pos < 1 || pos > n) throw std::invalid_argument("position out of range");
    int level = 0;
    for (size_t i = 1; i < cumulative.size(); ++i) {
        if (cumulative[i] >= n - pos + 1) {
            level = static_cast<int>(i);
        } else {
            break;
        }
    }
    return level;
}

bool tail_dominated(const std::vector<long>& aff_counts, const std::vector<long>& ref_counts) {
    long max_level = 0;
    for (long c : aff_counts) max_level = std::max(max_level, c);
    for (long c : ref_counts) max_level = std::max(max_level, c);
    for (long m = max_level; m >= 1; --m) {
        long sa = 0, sr = 0;
        for (long c : aff_counts) sa += std::max(0L, c - m + 1);
        for (long c : ref_counts) sr += std::max(0L, c - m + 1);
        if (sa > sr) return false;
    }
    return true;
}

CoupledSystem::CoupledSystem(int n, double mu1, double mu2, std::uint64_t seed)
    : mu1_(mu1), mu2_(mu2), rng_(seed), aff_(n) {
    if (!(mu1 > mu2 && mu2 > 0)) throw std::invalid_argument("need mu1 > mu2 > 0");
    order_.resize(static_cast<size_t>(n));
    pos_.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        order_[static_cast<size_t>(i)] = i;
        pos_[static_cast<size_t>(i)] = i;
    }
    ref_q_.assign(static_cast<size_t>(n), 0);
    ref_ge_.assign(2, 0);
}

CoupledSystem CoupledSystem::ra(const SelectionFamily& family, const SplitSolution& splits,
                                double mu1, double mu2, std::uint64_t seed) {
    CoupledSystem sys(family.n_servers(), mu1, mu2, seed);
    sys.policy_ = RefPolicy::RA;
    sys.selections_ = family.selections();
    sys.lambda0_ = splits.lambda0;
    sys.load_ = splits.server_load;
    if (splits.splits.size() != sys.selections_.size())
        throw std::invalid_argument("split solution does not match the family");
    sys.server_sels_.resize(static_cast<size_t>(family.n_servers()));
    for (size_t s = 0; s < sys.selections_.size(); ++s) {
        const auto& sel = sys.selections_[s];
        for (size_t k = 0; k < sel.servers.size(); ++k) {
            const double w = sel.rate * splits.splits[s][k];
            if (w <= 0.0) continue;
            auto& list = sys.server_sels_[static_cast<size_t>(sel.servers[k])];
            const double prev = list.empty() ? 0.0 : list.back().cum_weight;
            list.push_back({prev + w, static_cast<int>(s)});
        }
    }
    sys.arrival_rate_ = splits.lambda0 * family.n_servers();
    return sys;
}

CoupledSystem CoupledSystem::mjsq(const SelectionFamily& graph_family, int k,
                                  double mu1, double mu2, std::uint64_t seed) {
    if (graph_family.kind() != FamilyKind::Graph)
        throw std::invalid_argument("MJSQ coupling needs the graph variant");
    const int n = graph_family.n_servers();
    if (k < 0 || k >= n) throw std::invalid_argument("need 0 <= k < N");
    if (graph_family.min_selection_size() < n - k)
        throw std::invalid_argument("minimum closed neighborhood must have size >= N-k");
    CoupledSystem sys(n, mu1, mu2, seed);
    sys.policy_ = RefPolicy::MJSQ;
    sys.selections_ = graph_family.selections();
    sys.k_ = k;
    sys.arrival_rate_ = graph_family.total_rate();
    return sys;
}

CoupledSystem CoupledSystem::jsqk(int n, int d, int k, double lambda,
                                  double mu1, double mu2, std::uint64_t seed) {
    if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
    CoupledSystem sys(n, mu1, mu2, seed);
    sys.policy_ = RefPolicy::JSQK;
    sys.d_ = d;
    sys.k_ = k;
    sys.f_aff_ = build_f_aff(n, d);
    sys.f_ref_ = build_f_ref(n, k);
    for (int x = 1; x <= n; ++x) {
        if (sys.f_aff_.at(x) < sys.f_ref_.at(x) - 1e-12)
            throw std::invalid_argument("step-function dominance fails for this (N, d, k)");
    }
    sys.arrival_rate_ = lambda * n;
    return sys;
}

bool CoupledSystem::key_less(int a, int b) const {
    const auto& ca = aff_.config(a);
    const auto& cb = aff_.config(b);
    if (ca.type_i != cb.type_i) return ca.type_i < cb.type_i;
    return ca.type_ii < cb.type_ii;
}

void CoupledSystem::restore_order(int id) {
    int p = pos_[static_cast<size_t>(id)];
    while (p > 0 && key_less(order_[static_cast<size_t>(p)], order_[static_cast<size_t>(p - 1)])) {
        std::swap(order_[static_cast<size_t>(p)], order_[static_cast<size_t>(p - 1)]);
        pos_[static_cast<size_t>(order_[static_cast<size_t>(p)])] = p;
        pos_[static_cast<size_t>(order_[static_cast<size_t>(p - 1)])] = p - 1;
        --p;
    }
    const int n = n_servers();
    while (p + 1 < n && key_less(order_[static_cast<size_t>(p + 1)], order_[static_cast<size_t>(p)])) {
        std::swap(order_[static_cast<size_t>(p)], order_[static_cast<size_t>(p + 1)]);
        pos_[static_cast<size_t>(order_[static_cast<size_t>(p)])] = p;
        pos_[static_cast<size_t>(order_[static_cast<size_t>(p + 1)])] = p + 1;
        ++p;
    }
}

void CoupledSystem::aff_remove_at(int pos) {
    const int id = order_[static_cast<size_t>(pos - 1)];
    if (aff_.config(id).type_i <= 0) throw internal_error("coupled removal must target a type-I job");
    aff_.complete_service(id);
    restore_order(id);
}

int CoupledSystem::aff_apply(const AllocationDecision& d) {
    int canonical = 0;
    if (d.type == JobType::I) {
        const auto& c = aff_.config(d.server);
        long before = aff_.n_servers() - aff_ge(c.type_i);
        if (c.type_ii == 1) before += aff_.count(c.type_i, 0);
        canonical = static_cast<int>(before) + 1;
    }
    aff_.apply_arrival(d.server, d.type);
    restore_order(d.server);
    return canonical;
}

long CoupledSystem::ref_ge(int level) const {
    if (level < 1 || level >= static_cast<int>(ref_ge_.size())) return level < 1 ? n_servers() : 0;
    return ref_ge_[static_cast<size_t>(level)];
}

void CoupledSystem::ref_insert_at(int pos) {
    const long v = ref_q_[static_cast<size_t>(pos - 1)];
    ref_q_[static_cast<size_t>(pos - 1)] = v + 1;
    if (static_cast<size_t>(v + 1) >= ref_ge_.size()) ref_ge_.resize(static_cast<size_t>(v + 2), 0);
    ref_ge_[static_cast<size_t>(v + 1)] += 1;
    ref_jobs_ += 1;
    size_t i = static_cast<size_t>(pos - 1);
    while (i + 1 < ref_q_.size() && ref_q_[i] > ref_q_[i + 1]) {
        std::swap(ref_q_[i], ref_q_[i + 1]);
        ++i;
    }
}

void CoupledSystem::ref_remove_at(int pos) {
    const long v = ref_q_[static_cast<size_t>(pos - 1)];
    if (v <= 0) throw internal_error("coupled removal must target a busy reference queue");
    ref_q_[static_cast<size_t>(pos - 1)] = v - 1;
    ref_ge_[static_cast<size_t>(v)] -= 1;
    ref_jobs_ -= 1;
    size_t i = static_cast<size_t>(pos - 1);
    while (i > 0 && ref_q_[i] < ref_q_[i - 1]) {
        std::swap(ref_q_[i], ref_q_[i - 1]);
        --i;
    }
}

bool CoupledSystem::check_majorization() const {
    const int max_level = std::max(aff_.max_level(), static_cast<int>(ref_ge_.size()) - 1);
    long sa = 0, sr = 0;
    for (int m = max_level; m >= 1; --m) {
        sa += aff_ge(m);
        sr += ref_ge(m);
        if (sa > sr) return false;
    }
    return true;
}

void CoupledSystem::service_step(double x, double u, CoupledEvent& ev) {
    ev.kind = CoupledEvent::Kind::Service;
    const int n = n_servers();
    const long active_aff = aff_ge(1);
    const long active_ref = ref_ge(1);
    const long shared = std::min(active_aff, active_ref);
    const long longest = std::max(active_aff, active_ref);
    if (shared > 0 && x * n <= static_cast<double>(shared)) {
        const long idx = std::min(static_cast<long>(u * static_cast<double>(shared)), shared - 1);
        const int pos = static_cast<int>(n - shared + 1 + idx);
        aff_remove_at(pos);
        ref_remove_at(pos);
        ev.pos_aff = pos;
        ev.pos_ref = pos;
    } else if (longest > shared && x * n <= static_cast<double>(longest)) {
        const long extra = longest - shared;
        const long idx = std::min(static_cast<long>(u * static_cast<double>(extra)), extra - 1);
        const int pos = static_cast<int>(n - longest + 1 + idx);
        if (active_aff > active_ref) {
            aff_remove_at(pos);
            ev.pos_aff = pos;
        } else {
            ref_remove_at(pos);
            ev.pos_ref = pos;
        }
    }
}

void CoupledSystem::ra_arrival_step(int n_star, double y1, double y2, CoupledEvent& ev) {
    ev.kind = CoupledEvent::Kind::Arrival;
    if (n_star < 1 || n_star > n_servers()) throw std::invalid_argument("position out of range");
    ref_insert_at(n_star);
    ev.pos_ref = n_star;
    const int v = order_[static_cast<size_t>(n_star - 1)];
    const double lv = load_[static_cast<size_t>(v)];
    if (lv > lambda0_ + 1e-7) throw internal_error("per-server load exceeds the split bound");
    if (lambda0_ <= 0.0 || y1 > lv / lambda0_) return;
    const auto& list = server_sels_[static_cast<size_t>(v)];
    if (list.empty()) return;
    const double target = y2 * list.back().cum_weight;
    size_t lo = 0, hi = list.size() - 1;
    while (lo < hi) {
        const size_t mid = (lo + hi) / 2;
        if (list[mid].cum_weight >= target) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    const auto& sel = selections_[static_cast<size_t>(list[lo].index)];
    const auto decision = allocate(aff_, sel.servers, rng_);
    const int pos = aff_apply(decision);
    ev.pos_aff = pos;
    if (pos > n_star) throw internal_error("type-I insertion above the coupled arrival position");
}

void CoupledSystem::mjsq_arrival_step(CoupledEvent& ev) {
    ev.kind = CoupledEvent::Kind::Arrival;
    ref_insert_at(k_ + 1);
    ev.pos_ref = k_ + 1;
    const int v = static_cast<int>(rng_.below(static_cast<std::uint64_t>(n_servers())));
    const auto decision = allocate(aff_, selections_[static_cast<size_t>(v)].servers, rng_);
    const int pos = aff_apply(decision);
    ev.pos_aff = pos;
    if (pos > k_ + 1) throw internal_error("type-I insertion above the coupled arrival position");
}

void CoupledSystem::jsq_arrival_step(double x, CoupledEvent& ev) {
    ev.kind = CoupledEvent::Kind::Arrival;
    const int n_aff = f_aff_.inverse(x);
    const int n_ref = f_ref_.inverse(x);
    if (n_aff > n_ref) throw internal_error("step-function dominance violated at sampling time");
    ref_insert_at(n_ref);
    ev.pos_ref = n_ref;
    // worst-case-consistent selection: the sampled position plus the top d
    std::vector<int> primary;
    primary.reserve(static_cast<size_t>(d_) + 1);
    primary.push_back(order_[static_cast<size_t>(n_aff - 1)]);
    const int n = n_servers();
    for (int p = n - d_ + 1; p <= n; ++p) primary.push_back(order_[static_cast<size_t>(p - 1)]);
    const auto decision = allocate(aff_, primary, rng_);
    const int pos = aff_apply(decision);
    ev.pos_aff = pos;
    if (pos > n_aff) throw internal_error("type-I insertion above the coupled arrival position");
}

CoupledEvent CoupledSystem::step() {
    const int n = n_servers();
    const double r_svc = mu1_ * n;
    const double r_ii = mu2_ * static_cast<double>(aff_.busy_ii_count());
    const double total = arrival_rate_ + r_svc + r_ii;
    t_ += rng_.exponential(total);
    CoupledEvent ev;
    ev.t = t_;
    const double pick = rng_.next_double() * total;
    if (pick < arrival_rate_) {
        switch (policy_) {
            case RefPolicy::RA: {
                const int n_star = 1 + static_cast<int>(rng_.below(static_cast<std::uint64_t>(n)));
                const double y1 = rng_.next_double();
                const double y2 = rng_.next_double();
                ra_arrival_step(n_star, y1, y2, ev);
                break;
            }
            case RefPolicy::MJSQ:
                mjsq_arrival_step(ev);
                break;
            case RefPolicy::JSQK:
                jsq_arrival_step(rng_.next_double(), ev);
                break;
        }
    } else if (pick < arrival_rate_ + r_svc) {
        const double x = rng_.next_double();
        const double u = rng_.next_double();
        service_step(x, u, ev);
    } else {
        ev.kind = CoupledEvent::Kind::ServiceII;
        const long c2 = aff_.busy_ii_count();
        const int id = aff_.busy_ii_nth(static_cast<long>(rng_.below(static_cast<std::uint64_t>(c2))));
        ev.pos_aff = pos_[static_cast<size_t>(id)] + 1;
        aff_.complete_service(id);
        restore_order(id);
    }
    ev.ok = check_majorization();
    return ev;
}

CouplingRunResult run_coupling(CoupledSystem& system, long n_events, std::ostream* log) {
    CouplingRunResult result;
    if (log) *log << "t,event_kind,pos_aff,pos_ref,ok\n";
    for (long e = 0; e < n_events; ++e) {
        const auto ev = system.step();
        result.events += 1;
        if (!ev.ok) result.violations += 1;
        if (log) {
            const char* kind = ev.kind == CoupledEvent::Kind::Arrival    ? "arrival"
                               : ev.kind == CoupledEvent::Kind::Service  ? "service"
                                                                         : "service_ii";
            *log << ev.t << ',' << kind << ',' << ev.pos_aff << ',' << ev.pos_ref << ','
                 << (ev.ok ? 1 : 0) << '\n';
        }
    }
    result.t_end = system.time();
    return result;
}

} // namespace affsched
