#include "affsched/model.hpp"

#include <algorithm>
#include <limits>

namespace affsched {

namespace {

void validate_ids(const std::vector<int>& ids, int n) {
    if (ids.empty()) throw std::invalid_argument("selection must be nonempty");
    for (int id : ids) {
        if (id < 0 || id >= n) throw std::invalid_argument("server id out of range");
    }
}

} // namespace

SelectionFamily SelectionFamily::general(int n_servers, std::vector<Selection> selections) {
    if (n_servers <= 0) throw std::invalid_argument("n_servers must be positive");
    SelectionFamily f;
    f.n_servers_ = n_servers;
    f.kind_ = FamilyKind::General;
    for (auto& s : selections) {
        validate_ids(s.servers, n_servers);
        if (!(s.rate >= 0.0)) throw std::invalid_argument("selection rate must be >= 0");
        f.total_rate_ += s.rate;
    }
    f.selections_ = std::move(selections);
    return f;
}

SelectionFamily SelectionFamily::graph(const std::vector<std::vector<int>>& adjacency, double lambda) {
    const int n = static_cast<int>(adjacency.size());
    if (n == 0) throw std::invalid_argument("graph must have at least one node");
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
    SelectionFamily f;
    f.n_servers_ = n;
    f.kind_ = FamilyKind::Graph;
    f.lambda_ = lambda;
    f.selections_.reserve(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) {
        Selection s;
        s.servers.push_back(v);
        for (int u : adjacency[static_cast<size_t>(v)]) {
            if (u == v) continue;
            s.servers.push_back(u);
        }
        validate_ids(s.servers, n);
        std::sort(s.servers.begin(), s.servers.end());
        if (std::adjacent_find(s.servers.begin(), s.servers.end()) != s.servers.end())
            throw std::invalid_argument("duplicate neighbor in adjacency list");
        s.rate = lambda;
        f.selections_.push_back(std::move(s));
    }
    f.total_rate_ = lambda * n;
    return f;
}

SelectionFamily SelectionFamily::combinatorial(int n_servers, int d, double lambda) {
    if (n_servers <= 0) throw std::invalid_argument("n_servers must be positive");
    if (d < 1 || d > n_servers) throw std::invalid_argument("subset size out of range");
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
    SelectionFamily f;
    f.n_servers_ = n_servers;
    f.kind_ = FamilyKind::Combinatorial;
    f.d_ = d;
    f.lambda_ = lambda;
    f.total_rate_ = lambda * n_servers;
    return f;
}

const std::vector<Selection>& SelectionFamily::selections() const {
    if (kind_ == FamilyKind::Combinatorial)
        throw std::invalid_argument("combinatorial family has no explicit selection list");
    return selections_;
}

int SelectionFamily::subset_size() const {
    if (kind_ != FamilyKind::Combinatorial)
        throw std::invalid_argument("subset_size applies to the combinatorial variant");
    return d_;
}

double SelectionFamily::lambda_per_server() const {
    if (kind_ == FamilyKind::General)
        throw std::invalid_argument("general family has no uniform per-server rate");
    return lambda_;
}

int SelectionFamily::min_selection_size() const {
    if (kind_ == FamilyKind::Combinatorial) return d_;
    size_t m = std::numeric_limits<size_t>::max();
    for (const auto& s : selections_) m = std::min(m, s.servers.size());
    return selections_.empty() ? 0 : static_cast<int>(m);
}

OccupancyState::OccupancyState(int n_servers) {
    if (n_servers <= 0) throw std::invalid_argument("n_servers must be positive");
    configs_.resize(static_cast<size_t>(n_servers));
    cum_.push_back({n_servers, 0});
    member_pos_.resize(static_cast<size_t>(n_servers));
    auto& idle = members_[kIdle];
    idle.resize(static_cast<size_t>(n_servers));
    for (int id = 0; id < n_servers; ++id) {
        idle[static_cast<size_t>(id)] = id;
        member_pos_[static_cast<size_t>(id)] = id;
    }
}

OccupancyState OccupancyState::all_type_ii(int n_servers) {
    std::vector<ServerConfig> configs(static_cast<size_t>(n_servers), ServerConfig{0, 1});
    return from_configs(std::move(configs));
}

OccupancyState OccupancyState::from_configs(std::vector<ServerConfig> configs) {
    OccupancyState s(static_cast<int>(configs.size()));
    for (size_t id = 0; id < configs.size(); ++id) {
        const auto& c = configs[id];
        if (c.type_i < 0 || c.type_ii < 0) throw std::invalid_argument("negative job count");
        if (c.type_ii > 1) throw std::invalid_argument("admissible states carry at most one type-II job per server");
        for (int k = 0; k < c.type_i; ++k) s.apply_arrival(static_cast<int>(id), JobType::I);
        if (c.type_ii == 1) {
            // bypass the arrival precondition: explicit states may pair a
            // type-II job with queued type-I jobs
            auto& cfg = s.configs_[id];
            cfg.type_ii = 1;
            s.level(0)[0] -= 1;
            s.level(0)[1] += 1;
            for (int i = 1; i <= cfg.type_i; ++i) {
                s.level(i)[0] -= 1;
                s.level(i)[1] += 1;
            }
            s.total_jobs_ += 1;
            s.move_class(static_cast<int>(id), classify(cfg));
        }
    }
    return s;
}

long OccupancyState::cum_count(int level, int j) const {
    if (level < 0 || (j != 0 && j != 1)) throw std::invalid_argument("bad cumulative index");
    if (level >= static_cast<int>(cum_.size())) return 0;
    return cum_[static_cast<size_t>(level)][static_cast<size_t>(j)];
}

void OccupancyState::check_id(int id) const {
    if (id < 0 || id >= n_servers()) throw std::invalid_argument("server id out of range");
}

std::array<long, 2>& OccupancyState::level(int i) {
    while (static_cast<int>(cum_.size()) <= i) cum_.push_back({0, 0});
    return cum_[static_cast<size_t>(i)];
}

void OccupancyState::move_class(int id, Class to) {
    // locate current bucket by scanning the three possible ones via stored position
    const size_t pos = static_cast<size_t>(member_pos_[static_cast<size_t>(id)]);
    Class from = kIdle;
    for (Class c : {kIdle, kBusyII, kBusyI}) {
        auto& v = members_[c];
        if (pos < v.size() && v[pos] == id) {
            from = c;
            break;
        }
    }
    if (from == to) return;
    auto& src = members_[from];
    const int last = src.back();
    src[pos] = last;
    member_pos_[static_cast<size_t>(last)] = static_cast<int>(pos);
    src.pop_back();
    auto& dst = members_[to];
    member_pos_[static_cast<size_t>(id)] = static_cast<int>(dst.size());
    dst.push_back(id);
}

void OccupancyState::apply_arrival(int id, JobType type) {
    check_id(id);
    auto& c = configs_[static_cast<size_t>(id)];
    if (type == JobType::II) {
        if (c.type_i != 0 || c.type_ii != 0)
            throw internal_error("type-II arrival to a non-idle server");
        c.type_ii = 1;
        level(0)[0] -= 1;
        level(0)[1] += 1;
    } else {
        c.type_i += 1;
        level(c.type_i)[static_cast<size_t>(c.type_ii)] += 1;
    }
    total_jobs_ += 1;
    move_class(id, classify(c));
}

JobType OccupancyState::complete_service(int id) {
    check_id(id);
    auto& c = configs_[static_cast<size_t>(id)];
    JobType done;
    if (c.type_i > 0) {
        level(c.type_i)[static_cast<size_t>(c.type_ii)] -= 1;
        c.type_i -= 1;
        done = JobType::I;
    } else if (c.type_ii > 0) {
        c.type_ii = 0;
        level(0)[1] -= 1;
        level(0)[0] += 1;
        done = JobType::II;
    } else {
        throw internal_error("service completion at an idle server");
    }
    total_jobs_ -= 1;
    while (cum_.size() > 1 && cum_.back()[0] == 0 && cum_.back()[1] == 0) cum_.pop_back();
    move_class(id, classify(c));
    return done;
}

double OccupancyState::service_rate(int id, double mu1, double mu2) const {
    check_id(id);
    const auto& c = configs_[static_cast<size_t>(id)];
    if (c.type_i > 0) return mu1;
    if (c.type_ii > 0) return mu2;
    return 0.0;
}

AllocationDecision allocate(const OccupancyState& state, std::span<const int> primary, Rng& rng) {
    if (primary.empty()) throw std::invalid_argument("primary selection must be nonempty");
    for (int id : primary) {
        if (id < 0 || id >= state.n_servers()) throw std::invalid_argument("server id out of range");
    }

    // step 1: idle server inside the primary selection
    int idle_in_primary = 0;
    int pick = -1;
    for (int id : primary) {
        if (state.config(id) == ServerConfig{0, 0}) {
            ++idle_in_primary;
            // reservoir sample of size 1 keeps the pick uniform in one pass
            if (rng.below(static_cast<std::uint64_t>(idle_in_primary)) == 0) pick = id;
        }
    }
    if (pick >= 0) return {pick, JobType::I};

    // step 2: idle server outside the primary selection
    const long idle_total = state.idle_count();
    const long idle_outside = idle_total - idle_in_primary;
    if (idle_outside > 0) {
        std::vector<int> sorted(primary.begin(), primary.end());
        std::sort(sorted.begin(), sorted.end());
        auto in_primary = [&](int id) {
            return std::binary_search(sorted.begin(), sorted.end(), id);
        };
        for (int tries = 0; tries < 64; ++tries) {
            const int id = state.idle_nth(static_cast<long>(rng.below(static_cast<std::uint64_t>(idle_total))));
            if (!in_primary(id)) return {id, JobType::II};
        }
        // dense-primary fallback: enumerate instead of rejecting
        long target = static_cast<long>(rng.below(static_cast<std::uint64_t>(idle_outside)));
        for (long k = 0; k < idle_total; ++k) {
            const int id = state.idle_nth(k);
            if (in_primary(id)) continue;
            if (target-- == 0) return {id, JobType::II};
        }
        throw internal_error("idle bookkeeping out of sync");
    }

    // step 3: fewest type-I jobs, ties by fewer type-II, residual ties uniform
    ServerConfig best{std::numeric_limits<int>::max(), std::numeric_limits<int>::max()};
    int ties = 0;
    for (int id : primary) {
        const auto& c = state.config(id);
        const bool better = c.type_i < best.type_i || (c.type_i == best.type_i && c.type_ii < best.type_ii);
        if (better) {
            best = c;
            ties = 1;
            pick = id;
        } else if (c == best) {
            ++ties;
            if (rng.below(static_cast<std::uint64_t>(ties)) == 0) pick = id;
        }
    }
    return {pick, JobType::I};
}

} // namespace affsched
