#include "affsched/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace affsched {

namespace {

void check_config(const SimConfig& cfg) {
    if (!(cfg.mu1 > cfg.mu2) || !(cfg.mu2 > 0.0))
        throw std::invalid_argument("simulate: need mu1 > mu2 > 0");
    if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon))
        throw std::invalid_argument("simulate: horizon must be positive");
    if (!(cfg.sample_dt > 0.0))
        throw std::invalid_argument("simulate: sample_dt must be positive");
    if (cfg.record_imax < 1)
        throw std::invalid_argument("simulate: record_imax must be >= 1");
    if (!std::isfinite(cfg.family.total_rate()))
        throw std::invalid_argument("simulate: arrival rate must be finite");
    if (cfg.init == SimConfig::Init::Explicit &&
        cfg.initial.size() != static_cast<size_t>(cfg.family.n_servers()))
        throw std::invalid_argument("simulate: explicit initial state must cover every server");
    if (cfg.init != SimConfig::Init::Explicit && !cfg.initial.empty())
        throw std::invalid_argument("simulate: initial configs given without Init::Explicit");
}

} // namespace

OccupancyState initial_state(const SimConfig& cfg) {
    switch (cfg.init) {
    case SimConfig::Init::Empty:
        return OccupancyState(cfg.family.n_servers());
    case SimConfig::Init::AllTypeII:
        return OccupancyState::all_type_ii(cfg.family.n_servers());
    case SimConfig::Init::Explicit:
        return OccupancyState::from_configs(cfg.initial);
    }
    throw internal_error("simulate: unknown initial-state kind");
}

std::vector<int> sample_selection(const SelectionFamily& family, Rng& rng) {
    switch (family.kind()) {
    case FamilyKind::Combinatorial: {
        const int n = family.n_servers();
        const int d = family.subset_size();
        std::vector<int> out;
        out.reserve(static_cast<size_t>(d));
        // Floyd's subset sampling: uniform over all C(n, d) subsets
        for (int j = n - d; j < n; ++j) {
            const int pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(j) + 1));
            if (std::find(out.begin(), out.end(), pick) != out.end())
                out.push_back(j);
            else
                out.push_back(pick);
        }
        std::sort(out.begin(), out.end());
        return out;
    }
    case FamilyKind::Graph: {
        const auto& sels = family.selections();
        const auto node = rng.below(sels.size());
        return sels[static_cast<size_t>(node)].servers;
    }
    case FamilyKind::General: {
        const auto& sels = family.selections();
        if (!(family.total_rate() > 0.0))
            throw std::invalid_argument("sample_selection: family has no arrival mass");
        double u = rng.next_double() * family.total_rate();
        for (const auto& s : sels) {
            u -= s.rate;
            if (u < 0.0) return s.servers;
        }
        return sels.back().servers; // rounding spill-over
    }
    }
    throw internal_error("sample_selection: unknown family kind");
}

Trajectory run(const SimConfig& cfg) { return run(cfg, EventObserver()); }

Trajectory run(const SimConfig& cfg, const EventObserver& observer) {
    check_config(cfg);
    OccupancyState state = initial_state(cfg);
    Rng rng(cfg.seed);

    const double arrival_rate = cfg.family.total_rate();
    const double n = static_cast<double>(cfg.family.n_servers());

    Trajectory out;
    out.imax = cfg.record_imax;
    const long n_samples =
        static_cast<long>(std::floor(cfg.horizon / cfg.sample_dt + 1e-9)) + 1;
    long next_sample = 0;
    auto record = [&]() {
        out.times.push_back(static_cast<double>(next_sample) * cfg.sample_dt);
        std::vector<double> row(static_cast<size_t>(2 * (cfg.record_imax + 1)));
        for (int level = 0; level <= cfg.record_imax; ++level)
            for (int j = 0; j < 2; ++j)
                row[static_cast<size_t>(2 * level + j)] =
                    static_cast<double>(state.cum_count(level, j)) / n;
        out.rows.push_back(std::move(row));
        ++next_sample;
    };

    double t = 0.0;
    while (true) {
        const double b1 = static_cast<double>(state.busy_i_count());
        const double b2 = static_cast<double>(state.busy_ii_count());
        const double total = arrival_rate + cfg.mu1 * b1 + cfg.mu2 * b2;
        const double t_next =
            total > 0.0 ? t + rng.exponential(total) : std::numeric_limits<double>::infinity();
        while (next_sample < n_samples &&
               static_cast<double>(next_sample) * cfg.sample_dt < t_next)
            record();
        if (t_next > cfg.horizon) break;
        t = t_next;

        const double u = rng.next_double() * total;
        if (u < arrival_rate) {
            const std::vector<int> sel = sample_selection(cfg.family, rng);
            const AllocationDecision dec = allocate(state, sel, rng);
            state.apply_arrival(dec.server, dec.type);
        } else if (u < arrival_rate + cfg.mu1 * b1) {
            state.complete_service(state.busy_i_nth(static_cast<long>(
                rng.below(static_cast<std::uint64_t>(state.busy_i_count())))));
        } else {
            state.complete_service(state.busy_ii_nth(static_cast<long>(
                rng.below(static_cast<std::uint64_t>(state.busy_ii_count())))));
        }
        if (observer) observer(t, state);
    }
    return out;
}

std::map<AllocCell, double> empirical_allocation_frequencies(const SimConfig& cfg,
                                                             long n_arrivals) {
    check_config(cfg);
    if (cfg.family.kind() != FamilyKind::Combinatorial)
        throw std::invalid_argument("empirical_allocation_frequencies: combinatorial families only");
    if (n_arrivals <= 0)
        throw std::invalid_argument("empirical_allocation_frequencies: need n_arrivals > 0");

    const OccupancyState state = initial_state(cfg);
    Rng rng(cfg.seed);
    std::map<AllocCell, long> counts;
    for (long i = 0; i < n_arrivals; ++i) {
        const std::vector<int> sel = sample_selection(cfg.family, rng);
        const AllocationDecision dec = allocate(state, sel, rng);
        const ServerConfig& c = state.config(dec.server);
        ++counts[{c.type_i, c.type_ii, dec.type}];
    }
    std::map<AllocCell, double> freq;
    for (const auto& [cell, cnt] : counts)
        freq[cell] = static_cast<double>(cnt) / static_cast<double>(n_arrivals);
    return freq;
}

} // namespace affsched
