#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "affsched/model.hpp"
#include "affsched/stability.hpp"

namespace affsched {

enum class RefPolicy { RA, MJSQ, JSQK };

// Nondecreasing CDF over ordered positions 1..N with value 1 at N.
struct StepFunction {
    std::vector<double> values;

    int n() const { return static_cast<int>(values.size()); }
    double at(int pos) const { return values[static_cast<size_t>(pos - 1)]; }
    // inverse transform: smallest position with f(pos) >= x
    int inverse(double x) const;
};

// CDF of the lowest position among k uniformly chosen distinct servers.
StepFunction build_f_ref(int n, int k);
// Worst-case CDF of the lowest selection position for a d-regular graph
// family: constant (d+1)/N head, linear ramp, and 1 from position N-d on.
StepFunction build_f_aff(int n, int d);

// Occupancy level at ordered position pos, given cumulative counts
// (cumulative[i] = number of servers at level >= i, cumulative[0] = N).
int position_index(const std::vector<long>& cumulative, int pos);

// Tail-sum dominance between two per-server job-count vectors.
bool tail_dominated(const std::vector<long>& aff_counts, const std::vector<long>& ref_counts);

struct CoupledEvent {
    enum class Kind { Arrival, Service, ServiceII };

    double t = 0.0;
    Kind kind = Kind::Service;
    int pos_aff = 0; // 1-based insertion/removal position, 0 = untouched
    int pos_ref = 0;
    bool ok = true; // majorization check after the event
};

// One coupled sample path: the affinity system and a reference system driven
// by a single randomness stream. Type-I tail dominance is checkable after
// every event.
class CoupledSystem {
public:
    static CoupledSystem ra(const SelectionFamily& family, const SplitSolution& splits,
                            double mu1, double mu2, std::uint64_t seed);
    static CoupledSystem mjsq(const SelectionFamily& graph_family, int k,
                              double mu1, double mu2, std::uint64_t seed);
    static CoupledSystem jsqk(int n, int d, int k, double lambda,
                              double mu1, double mu2, std::uint64_t seed);

    // advance one exponential-clock event
    CoupledEvent step();

    // event cores with exogenous uniforms (step() draws these internally)
    void service_step(double x, double u, CoupledEvent& ev);
    void ra_arrival_step(int n_star, double y1, double y2, CoupledEvent& ev);
    void mjsq_arrival_step(CoupledEvent& ev);
    void jsq_arrival_step(double x, CoupledEvent& ev);

    bool check_majorization() const;

    double time() const { return t_; }
    int n_servers() const { return aff_.n_servers(); }
    const OccupancyState& aff() const { return aff_; }
    const std::vector<long>& ref_queues() const { return ref_q_; }
    long aff_ge(int level) const { return aff_.cum_count(level, 0) + aff_.cum_count(level, 1); }
    long ref_ge(int level) const;
    long ref_total_jobs() const { return ref_jobs_; }
    int aff_position_of(int id) const { return pos_[static_cast<size_t>(id)] + 1; }

private:
    explicit CoupledSystem(int n, double mu1, double mu2, std::uint64_t seed);

    bool key_less(int a, int b) const;
    void restore_order(int id);
    void aff_remove_at(int pos);
    int aff_apply(const AllocationDecision& d); // returns canonical type-I position or 0
    void ref_insert_at(int pos);
    void ref_remove_at(int pos);

    RefPolicy policy_ = RefPolicy::RA;
    double mu1_ = 1.0;
    double mu2_ = 0.5;
    double arrival_rate_ = 0.0;
    double t_ = 0.0;
    Rng rng_;

    OccupancyState aff_;
    std::vector<int> order_; // order_[p] = server id at position p (0-based)
    std::vector<int> pos_;   // inverse of order_

    std::vector<long> ref_q_;  // sorted ascending
    std::vector<long> ref_ge_; // ref_ge_[i] = #{queues >= i}, i >= 1
    long ref_jobs_ = 0;

    // RA
    std::vector<Selection> selections_;
    double lambda0_ = 0.0;
    std::vector<double> load_; // per-server lambda*_n
    struct WeightedSel {
        double cum_weight;
        int index;
    };
    std::vector<std::vector<WeightedSel>> server_sels_;

    // MJSQ / JSQK
    int k_ = 0;
    int d_ = 0;
    StepFunction f_aff_;
    StepFunction f_ref_;
};

struct CouplingRunResult {
    long events = 0;
    long violations = 0;
    double t_end = 0.0;
};

// Drives n_events steps, counting majorization violations; optionally logs
// each event as CSV (t,event_kind,pos_aff,pos_ref,ok).
CouplingRunResult run_coupling(CoupledSystem& system, long n_events, std::ostream* log = nullptr);

} // namespace affsched
