#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <vector>

#include "affsched/model.hpp"
#include "affsched/rng.hpp"

using namespace affsched;

namespace {

// brute-force reference for the cumulative cache
long cum_scratch(const OccupancyState& s, int level, int j) {
    long c = 0;
    for (int id = 0; id < s.n_servers(); ++id) {
        const auto& cfg = s.config(id);
        if (cfg.type_i >= level && cfg.type_ii == j) ++c;
    }
    return c;
}

void check_cache(const OccupancyState& s) {
    for (int i = 0; i <= s.max_level() + 1; ++i) {
        for (int j = 0; j < 2; ++j) {
            REQUIRE(s.cum_count(i, j) == cum_scratch(s, i, j));
        }
    }
}

} // namespace

TEST_CASE("allocation picks the least-loaded primary server") {
    // primary configs {(1,0),(1,1),(1,1),(4,0)}, all secondaries busy
    auto state = OccupancyState::from_configs({
        {1, 0}, {1, 1}, {1, 1}, {4, 0}, {1, 0}, {1, 1}, {1, 1}, {3, 1},
    });
    Rng rng(1);
    const std::vector<int> primary{0, 1, 2, 3};
    for (int rep = 0; rep < 10; ++rep) {
        const auto d = allocate(state, primary, rng);
        CHECK(d.server == 0);
        CHECK(d.type == JobType::I);
    }
}

TEST_CASE("idle primary server is always taken first") {
    auto state = OccupancyState::from_configs({{0, 0}, {3, 0}, {0, 0}, {0, 1}});
    Rng rng(2);
    const std::vector<int> primary{1, 2};
    const auto d = allocate(state, primary, rng);
    CHECK(d.server == 2);
    CHECK(d.type == JobType::I);
}

TEST_CASE("single idle secondary server receives a type-II job") {
    auto state = OccupancyState::from_configs({{2, 0}, {1, 1}, {0, 0}});
    Rng rng(3);
    const std::vector<int> primary{0, 1};
    const auto d = allocate(state, primary, rng);
    CHECK(d.server == 2);
    CHECK(d.type == JobType::II);
}

TEST_CASE("allocation rejects invalid ids and empty selections") {
    OccupancyState state(4);
    Rng rng(4);
    CHECK_THROWS_AS(allocate(state, std::vector<int>{}, rng), std::invalid_argument);
    CHECK_THROWS_AS(allocate(state, std::vector<int>{4}, rng), std::invalid_argument);
    CHECK_THROWS_AS(allocate(state, std::vector<int>{-1}, rng), std::invalid_argument);
}

TEST_CASE("arrival and completion transitions") {
    auto state = OccupancyState::from_configs({{0, 0}, {2, 1}, {0, 1}, {1, 0}});
    state.apply_arrival(0, JobType::II);
    CHECK(state.config(0) == ServerConfig{0, 1});
    state.apply_arrival(1, JobType::I);
    CHECK(state.config(1) == ServerConfig{3, 1});
    CHECK_THROWS_AS(state.apply_arrival(2, JobType::II), internal_error);

    CHECK(state.complete_service(1) == JobType::I);
    CHECK(state.config(1) == ServerConfig{2, 1});
    CHECK(state.complete_service(2) == JobType::II);
    CHECK(state.config(2) == ServerConfig{0, 0});
    CHECK(state.complete_service(3) == JobType::I);
    CHECK(state.config(3) == ServerConfig{0, 0});
    CHECK_THROWS_AS(state.complete_service(3), internal_error);
    check_cache(state);
}

TEST_CASE("type-II arrivals require a fully idle server") {
    auto state = OccupancyState::from_configs({{1, 0}});
    CHECK_THROWS_AS(state.apply_arrival(0, JobType::II), internal_error);
}

TEST_CASE("service rates follow the preemptive priority rule") {
    auto state = OccupancyState::from_configs({{2, 1}, {0, 1}, {0, 0}});
    CHECK(state.service_rate(0, 1.0, 0.5) == 1.0);
    CHECK(state.service_rate(1, 1.0, 0.5) == 0.5);
    CHECK(state.service_rate(2, 1.0, 0.5) == 0.0);
}

TEST_CASE("cumulative counts match a scratch recount on random runs") {
    Rng rng(2024);
    OccupancyState state(30);
    const std::vector<int> all = [] {
        std::vector<int> v(30);
        for (int i = 0; i < 30; ++i) v[static_cast<size_t>(i)] = i;
        return v;
    }();
    long jobs = 0;
    for (int step = 0; step < 5000; ++step) {
        const bool arrive = jobs == 0 || rng.next_double() < 0.55;
        if (arrive) {
            std::vector<int> primary;
            const int sz = 1 + static_cast<int>(rng.below(5));
            for (int k = 0; k < sz; ++k) primary.push_back(static_cast<int>(rng.below(30)));
            std::sort(primary.begin(), primary.end());
            primary.erase(std::unique(primary.begin(), primary.end()), primary.end());
            const auto d = allocate(state, primary, rng);
            state.apply_arrival(d.server, d.type);
            ++jobs;
        } else {
            // pick a random busy server
            std::vector<int> busy;
            for (int id = 0; id < 30; ++id) {
                const auto& c = state.config(id);
                if (c.type_i > 0 || c.type_ii > 0) busy.push_back(id);
            }
            const int id = busy[static_cast<size_t>(rng.below(busy.size()))];
            state.complete_service(id);
            --jobs;
        }
        if (step % 97 == 0) check_cache(state);
        CHECK(state.total_jobs() == jobs);
    }
    check_cache(state);
}

TEST_CASE("no reachable state ever holds two type-II jobs on one server") {
    Rng rng(77);
    for (int run = 0; run < 20; ++run) {
        OccupancyState state(12);
        for (int step = 0; step < 2000; ++step) {
            if (state.total_jobs() == 0 || rng.next_double() < 0.6) {
                std::vector<int> primary;
                const int sz = 1 + static_cast<int>(rng.below(4));
                for (int k = 0; k < sz; ++k) primary.push_back(static_cast<int>(rng.below(12)));
                std::sort(primary.begin(), primary.end());
                primary.erase(std::unique(primary.begin(), primary.end()), primary.end());
                const auto d = allocate(state, primary, rng);
                if (d.type == JobType::II) CHECK(state.config(d.server) == ServerConfig{0, 0});
                state.apply_arrival(d.server, d.type);
            } else {
                for (int id = 0; id < 12; ++id) {
                    const auto& c = state.config(id);
                    if (c.type_i > 0 || c.type_ii > 0) {
                        state.complete_service(id);
                        break;
                    }
                }
            }
            for (int id = 0; id < 12; ++id) CHECK(state.config(id).type_ii <= 1);
        }
    }
}

TEST_CASE("step-3 choice is lexicographically minimal over the primary set") {
    Rng rng(5150);
    for (int rep = 0; rep < 300; ++rep) {
        std::vector<ServerConfig> configs;
        for (int id = 0; id < 10; ++id) {
            configs.push_back({1 + static_cast<int>(rng.below(3)), static_cast<int>(rng.below(2))});
        }
        auto state = OccupancyState::from_configs(configs);
        std::vector<int> primary;
        for (int id = 0; id < 6; ++id) primary.push_back(id);
        const auto d = allocate(state, primary, rng);
        CHECK(d.type == JobType::I);
        const auto& chosen = state.config(d.server);
        for (int id : primary) {
            const auto& c = state.config(id);
            const bool chosen_le = chosen.type_i < c.type_i ||
                                   (chosen.type_i == c.type_i && chosen.type_ii <= c.type_ii);
            CHECK(chosen_le);
        }
    }
}

TEST_CASE("residual step-3 ties are spread uniformly") {
    auto state = OccupancyState::from_configs({{1, 0}, {1, 0}, {1, 0}, {2, 0}});
    Rng rng(31337);
    std::map<int, int> hits;
    const int n = 30000;
    for (int i = 0; i < n; ++i) {
        const auto d = allocate(state, std::vector<int>{0, 1, 2, 3}, rng);
        hits[d.server] += 1;
    }
    CHECK(hits[3] == 0);
    for (int id = 0; id < 3; ++id) {
        CHECK(hits[id] > n / 3 - 500);
        CHECK(hits[id] < n / 3 + 500);
    }
}

TEST_CASE("allocate never labels a busy server type II") {
    Rng rng(404);
    for (int rep = 0; rep < 500; ++rep) {
        std::vector<ServerConfig> configs;
        for (int id = 0; id < 8; ++id) {
            const int i = static_cast<int>(rng.below(3));
            const int j = i == 0 ? static_cast<int>(rng.below(2)) : static_cast<int>(rng.below(2));
            configs.push_back({i, j});
        }
        auto state = OccupancyState::from_configs(configs);
        std::vector<int> primary{static_cast<int>(rng.below(8)), static_cast<int>(rng.below(8))};
        std::sort(primary.begin(), primary.end());
        primary.erase(std::unique(primary.begin(), primary.end()), primary.end());
        const auto d = allocate(state, primary, rng);
        if (d.type == JobType::II) CHECK(state.config(d.server) == ServerConfig{0, 0});
    }
}

TEST_CASE("family constructors validate their inputs") {
    CHECK_THROWS_AS(SelectionFamily::general(3, {{{}, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(SelectionFamily::general(3, {{{3}, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(SelectionFamily::general(3, {{{0}, -1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(SelectionFamily::combinatorial(4, 5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(SelectionFamily::combinatorial(4, 0, 1.0), std::invalid_argument);

    const auto graph = SelectionFamily::graph({{1}, {0, 2}, {1}}, 0.5);
    CHECK(graph.selections().size() == 3);
    CHECK(graph.selections()[1].servers == std::vector<int>{0, 1, 2});
    CHECK(graph.total_rate() == doctest::Approx(1.5));

    const auto comb = SelectionFamily::combinatorial(100, 3, 0.8);
    CHECK(comb.total_rate() == doctest::Approx(80.0));
    CHECK(comb.subset_size() == 3);
}
