#include "affsched/stability.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <boost/multiprecision/cpp_int.hpp>

namespace affsched {

namespace {

// Dinic max-flow on doubles; graphs here are tiny (selections + servers).
class MaxFlow {
public:
    explicit MaxFlow(int n) : head_(static_cast<size_t>(n), -1), level_(static_cast<size_t>(n)), it_(static_cast<size_t>(n)) {}

    int add_edge(int from, int to, double cap) {
        const int id = static_cast<int>(edges_.size());
        edges_.push_back({to, head_[static_cast<size_t>(from)], cap});
        head_[static_cast<size_t>(from)] = id;
        edges_.push_back({from, head_[static_cast<size_t>(to)], 0.0});
        head_[static_cast<size_t>(to)] = id + 1;
        return id;
    }

    double flow_through(int edge_id) const { return edges_[static_cast<size_t>(edge_id) + 1].cap; }

    double run(int s, int t) {
        double total = 0.0;
        while (bfs(s, t)) {
            it_ = head_;
            while (true) {
                const double f = dfs(s, t, kInf);
                if (f <= kEps) break;
                total += f;
            }
        }
        return total;
    }

private:
    static constexpr double kInf = 1e100;
    static constexpr double kEps = 1e-13;

    struct Edge {
        int to;
        int next;
        double cap;
    };

    bool bfs(int s, int t) {
        std::fill(level_.begin(), level_.end(), -1);
        std::queue<int> q;
        level_[static_cast<size_t>(s)] = 0;
        q.push(s);
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            for (int e = head_[static_cast<size_t>(v)]; e >= 0; e = edges_[static_cast<size_t>(e)].next) {
                const auto& ed = edges_[static_cast<size_t>(e)];
                if (ed.cap > kEps && level_[static_cast<size_t>(ed.to)] < 0) {
                    level_[static_cast<size_t>(ed.to)] = level_[static_cast<size_t>(v)] + 1;
                    q.push(ed.to);
                }
            }
        }
        return level_[static_cast<size_t>(t)] >= 0;
    }

    double dfs(int v, int t, double pushed) {
        if (v == t) return pushed;
        for (int& e = it_[static_cast<size_t>(v)]; e >= 0; e = edges_[static_cast<size_t>(e)].next) {
            auto& ed = edges_[static_cast<size_t>(e)];
            if (ed.cap <= kEps || level_[static_cast<size_t>(ed.to)] != level_[static_cast<size_t>(v)] + 1) continue;
            const double f = dfs(ed.to, t, std::min(pushed, ed.cap));
            if (f > kEps) {
                ed.cap -= f;
                edges_[static_cast<size_t>(e) ^ 1].cap += f;
                return f;
            }
        }
        return 0.0;
    }

    std::vector<Edge> edges_;
    std::vector<int> head_;
    std::vector<int> level_;
    std::vector<int> it_;
};

struct FlowResult {
    double routed = 0.0;
    std::vector<std::vector<double>> per_member;
};

// Route every selection's rate through member servers capped at `bound` each;
// returns the total routed mass plus per-member flows.
FlowResult route(const SelectionFamily& family, double bound) {
    const auto& sels = family.selections();
    const int n_sel = static_cast<int>(sels.size());
    const int n_srv = family.n_servers();
    const int source = 0;
    const int sink = 1 + n_sel + n_srv;
    MaxFlow mf(sink + 1);
    std::vector<std::vector<int>> member_edges(static_cast<size_t>(n_sel));
    for (int s = 0; s < n_sel; ++s) {
        mf.add_edge(source, 1 + s, sels[static_cast<size_t>(s)].rate);
        for (int id : sels[static_cast<size_t>(s)].servers) {
            member_edges[static_cast<size_t>(s)].push_back(mf.add_edge(1 + s, 1 + n_sel + id, 1e100));
        }
    }
    for (int v = 0; v < n_srv; ++v) mf.add_edge(1 + n_sel + v, sink, bound);
    FlowResult r;
    r.routed = mf.run(source, sink);
    r.per_member.resize(static_cast<size_t>(n_sel));
    for (int s = 0; s < n_sel; ++s) {
        for (int e : member_edges[static_cast<size_t>(s)]) {
            r.per_member[static_cast<size_t>(s)].push_back(mf.flow_through(e));
        }
    }
    return r;
}

} // namespace

SplitSolution lambda0(const SelectionFamily& family) {
    if (family.kind() == FamilyKind::Combinatorial)
        throw std::invalid_argument("lambda0 requires an explicit selection list");
    SplitSolution sol;
    sol.server_load.assign(static_cast<size_t>(family.n_servers()), 0.0);
    const auto& sels = family.selections();
    if (sels.empty()) return sol;

    const double total = family.total_rate();
    double hi = 0.0;
    for (int v = 0; v < family.n_servers(); ++v) {
        double touching = 0.0;
        for (const auto& s : sels) {
            if (std::find(s.servers.begin(), s.servers.end(), v) != s.servers.end()) touching += s.rate;
        }
        hi = std::max(hi, touching);
    }
    double lo = 0.0;
    const double slack = std::max(total, 1.0) * 1e-12;
    for (int iter = 0; iter < 200 && hi - lo > 1e-9; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (route(family, mid).routed >= total - slack) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    sol.lambda0 = hi;

    const auto flow = route(family, hi);
    sol.splits.resize(sels.size());
    for (size_t s = 0; s < sels.size(); ++s) {
        const auto& members = sels[s].servers;
        auto& p = sol.splits[s];
        p.assign(members.size(), 0.0);
        if (sels[s].rate > 0.0) {
            for (size_t k = 0; k < members.size(); ++k) p[k] = flow.per_member[s][k] / sels[s].rate;
            // flow may under-route by the feasibility slack; renormalize exactly
            double sum = 0.0;
            for (double x : p) sum += x;
            if (sum > 0.0) {
                for (double& x : p) x /= sum;
            } else {
                p.assign(members.size(), 1.0 / static_cast<double>(members.size()));
            }
            for (size_t k = 0; k < members.size(); ++k) {
                sol.server_load[static_cast<size_t>(members[k])] += sels[s].rate * p[k];
            }
        } else {
            p.assign(members.size(), 1.0 / static_cast<double>(members.size()));
        }
    }
    return sol;
}

bool mjsq_condition(int n, int k, double lambda, double mu1) {
    if (k < 0 || k >= n) throw std::invalid_argument("k must satisfy 0 <= k < N");
    return lambda * n < mu1 * (n - k);
}

bool dregular_condition(int n, int d, int k) {
    if (k < 1 || k > n) throw std::invalid_argument("k must satisfy 1 <= k <= N");
    if (d < 1 || d >= n) throw std::invalid_argument("d must satisfy 1 <= d < N");
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
    cpp_int lhs = 0;
    for (int i = 1; i <= n - d - 1; ++i) lhs += binom(n - i, k - 1);
    return lhs * n < cpp_int(d + 1) * binom(n, k);
}

int min_regular_degree(int n, int k) {
    for (int d = 1; d < n; ++d) {
        if (dregular_condition(n, d, k)) return d;
    }
    throw internal_error("d = N-1 must satisfy the dominance condition");
}

} // namespace affsched
