#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "affsched/rng.hpp"

namespace affsched {

enum class JobType { I, II };

struct ServerConfig {
    int type_i = 0;
    int type_ii = 0;

    friend bool operator==(const ServerConfig&, const ServerConfig&) = default;
};

// Signals a broken internal invariant (policy bug), as opposed to bad input.
struct internal_error : std::logic_error {
    using std::logic_error::logic_error;
};

struct Selection {
    std::vector<int> servers;
    double rate = 0.0;
};

enum class FamilyKind { General, Graph, Combinatorial };

// The set of primary selections S with arrival rates lambda_S. The
// combinatorial variant (all d-subsets of N servers at total rate lambda*N)
// is stored implicitly and never enumerated.
class SelectionFamily {
public:
    static SelectionFamily general(int n_servers, std::vector<Selection> selections);
    // closed neighborhoods of every node, uniform per-selection rate lambda
    static SelectionFamily graph(const std::vector<std::vector<int>>& adjacency, double lambda);
    static SelectionFamily combinatorial(int n_servers, int d, double lambda);

    int n_servers() const { return n_servers_; }
    FamilyKind kind() const { return kind_; }
    double total_rate() const { return total_rate_; }

    // explicit variants only
    const std::vector<Selection>& selections() const;
    // combinatorial only
    int subset_size() const;
    double lambda_per_server() const;

    // smallest selection size (explicit variants)
    int min_selection_size() const;

private:
    SelectionFamily() = default;

    int n_servers_ = 0;
    FamilyKind kind_ = FamilyKind::General;
    std::vector<Selection> selections_;
    int d_ = 0;
    double lambda_ = 0.0;
    double total_rate_ = 0.0;
};

// Full system state: per-server configs plus cumulative counts
// cum(i, j) = #servers with type_i >= i and type_ii == j, maintained
// incrementally. Servers are also bucketed into idle / busy-type-II-only /
// busy-type-I classes for O(1) uniform sampling.
class OccupancyState {
public:
    explicit OccupancyState(int n_servers);
    static OccupancyState all_type_ii(int n_servers);
    static OccupancyState from_configs(std::vector<ServerConfig> configs);

    int n_servers() const { return static_cast<int>(configs_.size()); }
    const ServerConfig& config(int id) const { return configs_[static_cast<size_t>(id)]; }

    // Q-bar_ij; zero beyond the highest occupied level
    long cum_count(int level, int j) const;
    // Q_ij = servers with exactly (level, j)
    long count(int level, int j) const { return cum_count(level, j) - cum_count(level + 1, j); }
    int max_level() const { return static_cast<int>(cum_.size()) - 1; }
    long total_jobs() const { return total_jobs_; }

    long idle_count() const { return static_cast<long>(members_[kIdle].size()); }
    long busy_i_count() const { return static_cast<long>(members_[kBusyI].size()); }
    long busy_ii_count() const { return static_cast<long>(members_[kBusyII].size()); }
    int idle_nth(long k) const { return members_[kIdle][static_cast<size_t>(k)]; }
    int busy_i_nth(long k) const { return members_[kBusyI][static_cast<size_t>(k)]; }
    int busy_ii_nth(long k) const { return members_[kBusyII][static_cast<size_t>(k)]; }

    void apply_arrival(int id, JobType type);
    JobType complete_service(int id);
    double service_rate(int id, double mu1, double mu2) const;

private:
    enum Class { kIdle = 0, kBusyII = 1, kBusyI = 2 };

    static Class classify(const ServerConfig& c) {
        if (c.type_i > 0) return kBusyI;
        return c.type_ii > 0 ? kBusyII : kIdle;
    }

    void check_id(int id) const;
    void move_class(int id, Class to);
    std::array<long, 2>& level(int i);

    std::vector<ServerConfig> configs_;
    std::vector<std::array<long, 2>> cum_;
    std::array<std::vector<int>, 3> members_;
    std::vector<int> member_pos_;
    long total_jobs_ = 0;
};

struct AllocationDecision {
    int server = -1;
    JobType type = JobType::I;
};

// The three-step allocation rule: (1) idle primary server -> type I there;
// (2) idle server outside the primary selection -> type II there; (3) primary
// server with the fewest type-I jobs, ties by fewer type-II jobs, remaining
// ties uniform. Does not mutate the state.
AllocationDecision allocate(const OccupancyState& state, std::span<const int> primary, Rng& rng);

} // namespace affsched
