#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "affsched/coupling.hpp"
#include "affsched/fixedpoint.hpp"
#include "affsched/fluid.hpp"
#include "affsched/model.hpp"
#include "affsched/simulate.hpp"
#include "affsched/stability.hpp"
#include "affsched/trajectory.hpp"

using json = nlohmann::json;
using namespace affsched;

namespace {

std::string fmt(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

std::vector<std::string> split_spec(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    return parts;
}

int spec_int(const std::string& s, const std::string& what) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw std::invalid_argument(what + ": bad integer '" + s + "'");
    return v;
}

// cycle:n | complete:n | regular:n:d (circulant) | file:<edge list, "u v" lines>
std::vector<std::vector<int>> make_graph(const std::string& spec) {
    const auto parts = split_spec(spec, ':');
    if (parts.empty()) throw std::invalid_argument("graph: empty spec");
    if (parts[0] == "cycle" && parts.size() == 2) {
        const int n = spec_int(parts[1], "graph cycle");
        if (n < 3) throw std::invalid_argument("graph: cycle needs n >= 3");
        std::vector<std::vector<int>> adj(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i)
            adj[static_cast<size_t>(i)] = {(i + n - 1) % n, (i + 1) % n};
        return adj;
    }
    if (parts[0] == "complete" && parts.size() == 2) {
        const int n = spec_int(parts[1], "graph complete");
        if (n < 2) throw std::invalid_argument("graph: complete needs n >= 2");
        std::vector<std::vector<int>> adj(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (j != i) adj[static_cast<size_t>(i)].push_back(j);
        return adj;
    }
    if (parts[0] == "regular" && parts.size() == 3) {
        const int n = spec_int(parts[1], "graph regular");
        const int d = spec_int(parts[2], "graph regular");
        if (n < 2 || d < 1 || d >= n) throw std::invalid_argument("graph: regular needs 1 <= d < n");
        if (n % 2 != 0 && d % 2 != 0)
            throw std::invalid_argument("graph: regular needs n*d even");
        std::vector<std::vector<int>> adj(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            for (int o = 1; o <= d / 2; ++o) {
                adj[static_cast<size_t>(i)].push_back((i + o) % n);
                adj[static_cast<size_t>(i)].push_back((i + n - o) % n);
            }
            if (d % 2 == 1) adj[static_cast<size_t>(i)].push_back((i + n / 2) % n);
        }
        return adj;
    }
    if (parts[0] == "file" && parts.size() == 2) {
        std::ifstream in(parts[1]);
        if (!in) throw std::invalid_argument("graph: cannot open '" + parts[1] + "'");
        std::vector<std::pair<int, int>> edges;
        int u = 0, v = 0, max_id = -1;
        while (in >> u >> v) {
            if (u < 0 || v < 0 || u == v)
                throw std::invalid_argument("graph: bad edge in '" + parts[1] + "'");
            edges.emplace_back(u, v);
            max_id = std::max({max_id, u, v});
        }
        if (edges.empty()) throw std::invalid_argument("graph: no edges in '" + parts[1] + "'");
        std::vector<std::set<int>> nb(static_cast<size_t>(max_id + 1));
        for (auto [a, b] : edges) {
            nb[static_cast<size_t>(a)].insert(b);
            nb[static_cast<size_t>(b)].insert(a);
        }
        std::vector<std::vector<int>> adj(nb.size());
        for (size_t i = 0; i < nb.size(); ++i) adj[i].assign(nb[i].begin(), nb[i].end());
        return adj;
    }
    throw std::invalid_argument("graph: unknown spec '" + spec + "'");
}

// path:n (selections {i,i+1} over n servers) | file:<json [{servers, rate}]>
SelectionFamily make_family(const std::string& spec, const std::vector<double>& rates) {
    const auto parts = split_spec(spec, ':');
    if (parts.size() == 2 && parts[0] == "path") {
        const int n = spec_int(parts[1], "family path");
        if (n < 2) throw std::invalid_argument("family: path needs n >= 2");
        std::vector<Selection> sels;
        for (int i = 0; i + 1 < n; ++i) sels.push_back({{i, i + 1}, 1.0});
        if (!rates.empty()) {
            if (rates.size() != sels.size())
                throw std::invalid_argument("family: path:" + parts[1] + " needs " +
                                            std::to_string(sels.size()) + " rates");
            for (size_t i = 0; i < sels.size(); ++i) sels[i].rate = rates[i];
        }
        return SelectionFamily::general(n, std::move(sels));
    }
    if (parts.size() == 2 && parts[0] == "file") {
        std::ifstream in(parts[1]);
        if (!in) throw std::invalid_argument("family: cannot open '" + parts[1] + "'");
        json doc = json::parse(in);
        if (!doc.is_array() || doc.empty())
            throw std::invalid_argument("family: expected a non-empty JSON array");
        std::vector<Selection> sels;
        int n = 0;
        for (const auto& item : doc) {
            Selection s;
            s.servers = item.at("servers").get<std::vector<int>>();
            s.rate = item.at("rate").get<double>();
            for (int id : s.servers) n = std::max(n, id + 1);
            sels.push_back(std::move(s));
        }
        if (!rates.empty()) throw std::invalid_argument("family: --rates conflicts with file spec");
        return SelectionFamily::general(n, std::move(sels));
    }
    throw std::invalid_argument("family: unknown spec '" + spec + "'");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open output file '" + path + "'");
    return out;
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
    } else {
        auto out = open_out(path);
        out << text;
    }
}

json qbar_json(const std::vector<double>& qbar) {
    json arr = json::array();
    for (double v : qbar) arr.push_back(v);
    return arr;
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
    std::string model = "combinatorial";
    int n = 100;
    int d1 = 2;
    double lambda = 0.8;
    std::string graph;
    std::string family_file;
    double mu1 = 1.0, mu2 = 0.5;
    double horizon = 100.0, sample_dt = 0.1;
    std::uint64_t seed = 1;
    int imax = 12;
    std::string init = "empty";
    std::string out = "trajectory.csv";
    std::string summary_out;
};

int run_simulate(const SimulateOpts& o) {
    SelectionFamily family = [&] {
        if (o.model == "combinatorial") return SelectionFamily::combinatorial(o.n, o.d1, o.lambda);
        if (o.model == "graph") {
            if (o.graph.empty()) throw std::invalid_argument("simulate: --graph required");
            return SelectionFamily::graph(make_graph(o.graph), o.lambda);
        }
        if (o.model == "general") {
            if (o.family_file.empty())
                throw std::invalid_argument("simulate: --family-file required");
            return make_family("file:" + o.family_file, {});
        }
        throw std::invalid_argument("simulate: unknown model '" + o.model + "'");
    }();

    SimConfig cfg(std::move(family));
    cfg.mu1 = o.mu1;
    cfg.mu2 = o.mu2;
    cfg.horizon = o.horizon;
    cfg.sample_dt = o.sample_dt;
    cfg.seed = o.seed;
    cfg.record_imax = o.imax;
    if (o.init == "empty")
        cfg.init = SimConfig::Init::Empty;
    else if (o.init == "allii")
        cfg.init = SimConfig::Init::AllTypeII;
    else
        throw std::invalid_argument("simulate: unknown init '" + o.init + "'");

    Trajectory traj = run(cfg);
    {
        auto out = open_out(o.out);
        traj.write_csv(out);
    }
    json summary = {
        {"model", o.model},
        {"n", cfg.family.n_servers()},
        {"mu1", o.mu1},
        {"mu2", o.mu2},
        {"horizon", o.horizon},
        {"seed", o.seed},
        {"sample_dt", o.sample_dt},
        {"n_samples", traj.n_samples()},
        {"trajectory_csv", o.out},
        {"final_t", traj.times.back()},
        {"final_qbar", qbar_json(traj.rows.back())},
    };
    emit(o.summary_out, summary.dump(2) + "\n");
    return 0;
}

// ------------------------------------------------------------------- fluid

struct FluidOpts {
    int d1 = 2;
    double lambda = 0.8, mu1 = 1.0, mu2 = 0.5, eps0 = 1e-15;
    int imax = 12;
    double horizon = 100.0, dt = 1e-3, sample_dt = 0.1;
    std::string init = "empty";
    std::string init_file;
    std::string out = "fluid_trajectory.csv";
};

int run_fluid(const FluidOpts& o) {
    FluidParams p;
    p.d1 = o.d1;
    p.lambda = o.lambda;
    p.mu1 = o.mu1;
    p.mu2 = o.mu2;
    p.eps0 = o.eps0;

    FluidState init = [&] {
        if (!o.init_file.empty()) {
            std::ifstream in(o.init_file);
            if (!in) throw std::invalid_argument("fluid: cannot open '" + o.init_file + "'");
            json doc = json::parse(in);
            FluidState s;
            s.params = p;
            s.imax = o.imax;
            s.qbar = doc.get<std::vector<double>>();
            s.validate();
            return s;
        }
        if (o.init == "empty") return FluidState::empty(p, o.imax);
        if (o.init == "allii") return FluidState::all_type_ii(p, o.imax);
        throw std::invalid_argument("fluid: unknown init '" + o.init + "'");
    }();

    FluidRunResult res = integrate(init, o.horizon, o.dt, o.sample_dt);
    {
        auto out = open_out(o.out);
        res.trajectory.write_csv(out);
    }
    if (res.chattering)
        std::cerr << "warning: idle-indicator chattering detected (" << res.indicator_flips
                  << " flips)\n";
    json summary = {
        {"trajectory_csv", o.out},
        {"indicator_flips", res.indicator_flips},
        {"chattering", res.chattering},
        {"final_qbar", qbar_json(res.final_state.qbar)},
    };
    std::cout << summary.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------- fixpoint

struct FixpointOpts {
    int d1 = 2;
    double lambda = 0.8, mu1 = 1.0, mu2 = 0.5;
    int imax = 12;
    std::string sweep; // lo:hi:step -> CSV mode
    std::string out;
};

json root_json(const NoQueueingRoot& r) {
    return {
        {"x", r.x},
        {"q00", r.q00},
        {"q01", r.q01},
        {"q10", r.q10},
        {"alpha_minus", r.eig.alpha_minus},
        {"alpha_plus", r.eig.alpha_plus},
        {"stable", r.eig.stable},
        {"inconclusive", r.eig.inconclusive},
        {"degenerate", r.degenerate},
    };
}

int run_fixpoint(const FixpointOpts& o) {
    if (!o.sweep.empty()) {
        const auto parts = split_spec(o.sweep, ':');
        if (parts.size() != 3) throw std::invalid_argument("fixpoint: --sweep wants lo:hi:step");
        const double lo = std::stod(parts[0]), hi = std::stod(parts[1]),
                     step = std::stod(parts[2]);
        if (!(step > 0.0) || !(lo <= hi)) throw std::invalid_argument("fixpoint: bad sweep range");
        std::string csv = "lambda,EQ_cm,EQ_jsq,EQ_ra,EW_I,EW_II,EW_ra,EW_jsq\n";
        for (double lam = lo; lam <= hi + 1e-12; lam += step) {
            const MetricsReport m = metrics(o.d1, lam, o.mu1, o.mu2);
            csv += fmt(lam) + "," + fmt(m.eq_cm) + "," + fmt(m.eq_jsq) + "," + fmt(m.eq_ra) +
                   "," + fmt(m.ew_i) + "," + fmt(m.ew_ii) + "," + fmt(m.ew_ra) + "," +
                   fmt(m.ew_jsq) + "\n";
        }
        emit(o.out, csv);
        return 0;
    }

    const bool queueing_regime = o.lambda > o.mu2 && o.lambda < o.mu1;
    json doc;
    if (queueing_regime) {
        json seq = json::array();
        for (double v : queueing_fixed_point(o.d1, o.lambda, o.mu1, o.mu2, o.imax))
            seq.push_back(v);
        doc["queueing_fp"] = seq;
        doc["d1_star"] = d1_star(o.lambda, o.mu1, o.mu2);
        const MetricsReport m = metrics(o.d1, o.lambda, o.mu1, o.mu2);
        doc["metrics"] = {
            {"eq_cm", m.eq_cm},         {"eq_i", m.eq_i},
            {"eq_ii", m.eq_ii},         {"eq_jsq", m.eq_jsq},
            {"eq_ra", m.eq_ra},         {"ew_i", m.ew_i},
            {"ew_ii", m.ew_ii},         {"ew", m.ew},
            {"ew_jsq", m.ew_jsq},       {"ew_ra", m.ew_ra},
            {"lambda_tilde", m.lambda_tilde},
            {"switch_fraction", m.switch_fraction},
        };
    } else {
        doc["queueing_fp"] = nullptr;
        doc["d1_star"] = nullptr;
        doc["metrics"] = nullptr;
    }
    json fps = json::array();
    for (const auto& r : no_queueing_fixed_points(o.d1, o.lambda, o.mu1, o.mu2))
        fps.push_back(root_json(r));
    doc["no_queueing_fps"] = fps;
    doc["x_tilde"] = o.d1 >= 2 ? json(x_tilde(o.d1, o.lambda, o.mu1, o.mu2)) : json(nullptr);
    emit(o.out, doc.dump(2) + "\n");
    return 0;
}

// ------------------------------------------------------------------ tables

struct TablesOpts {
    std::string which;
    int n = 50;
    std::vector<int> k = {2, 3, 4, 5, 10, 15, 25};
    double mu1 = 1.0;
    std::vector<double> mu2 = {0.5, 0.3333333};
    std::vector<double> lambdas = {0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::string out;
};

int run_tables(const TablesOpts& o) {
    if (o.which == "dmin") {
        std::string csv = "k,d_min\n";
        for (int k : o.k)
            csv += std::to_string(k) + "," + std::to_string(min_regular_degree(o.n, k)) + "\n";
        emit(o.out, csv);
        return 0;
    }
    if (o.which == "d1star") {
        std::string csv = "mu2";
        for (double lam : o.lambdas) csv += "," + fmt(lam);
        csv += "\n";
        for (double mu2 : o.mu2) {
            csv += fmt(mu2);
            for (double lam : o.lambdas) {
                if (lam > mu2 && lam < o.mu1)
                    csv += "," + std::to_string(d1_star(lam, o.mu1, mu2));
                else
                    csv += ",/"; // outside the queueing regime
            }
            csv += "\n";
        }
        emit(o.out, csv);
        return 0;
    }
    throw std::invalid_argument("tables: --which must be dmin or d1star");
}

// ----------------------------------------------------------------- lambda0

struct Lambda0Opts {
    std::string family;
    std::vector<double> rates;
    std::string out;
};

int run_lambda0(const Lambda0Opts& o) {
    const SelectionFamily family = make_family(o.family, o.rates);
    const SplitSolution sol = lambda0(family);
    json splits = json::array();
    for (const auto& row : sol.splits) {
        json r = json::array();
        for (double v : row) r.push_back(v);
        splits.push_back(r);
    }
    json load = json::array();
    for (double v : sol.server_load) load.push_back(v);
    json doc = {{"lambda0", sol.lambda0}, {"splits", splits}, {"server_load", load}};
    emit(o.out, doc.dump(2) + "\n");
    return 0;
}

// ------------------------------------------------------------------ couple

struct CoupleOpts {
    std::string ref;
    int seeds = 1;
    long events = 10000;
    std::uint64_t seed = 1;
    double mu1 = 1.0, mu2 = 0.5;
    // ra
    std::string family = "path:10";
    std::vector<double> rates;
    // mjsq
    std::string graph = "complete:10";
    int k = 0;
    // jsqk
    int n = 50;
    int d = 31;
    double lambda = 0.7;
    std::string log;
};

int run_couple(const CoupleOpts& o) {
    if (o.seeds < 1) throw std::invalid_argument("couple: --seeds must be >= 1");
    if (o.events < 1) throw std::invalid_argument("couple: --events must be >= 1");

    std::optional<SelectionFamily> family;
    std::optional<SplitSolution> splits;
    std::optional<SelectionFamily> graph_family;
    if (o.ref == "ra") {
        family = make_family(o.family, o.rates);
        splits = lambda0(*family);
    } else if (o.ref == "mjsq") {
        graph_family = SelectionFamily::graph(make_graph(o.graph), o.lambda);
    } else if (o.ref != "jsqk") {
        throw std::invalid_argument("couple: --ref must be ra, mjsq or jsqk");
    }

    auto build = [&](std::uint64_t seed) {
        if (o.ref == "ra") return CoupledSystem::ra(*family, *splits, o.mu1, o.mu2, seed);
        if (o.ref == "mjsq")
            return CoupledSystem::mjsq(*graph_family, o.k, o.mu1, o.mu2, seed);
        return CoupledSystem::jsqk(o.n, o.d, o.k, o.lambda, o.mu1, o.mu2, seed);
    };
    // constructor-time validation (bad graph/k, invalid dominance): fail now
    // with a config error rather than inside a worker thread
    (void)build(o.seed);

    auto run_one = [&](std::uint64_t seed, std::ostream* log) {
        CoupledSystem sys = build(seed);
        return run_coupling(sys, o.events, log);
    };

    std::vector<CouplingRunResult> results;
    results.reserve(static_cast<size_t>(o.seeds));
    {
        std::ofstream log_out;
        std::ostream* log = nullptr;
        if (!o.log.empty()) {
            log_out = open_out(o.log);
            log = &log_out;
        }
        results.push_back(run_one(o.seed, log)); // first seed carries the event log
    }
    std::vector<std::future<CouplingRunResult>> futures;
    for (int s = 1; s < o.seeds; ++s)
        futures.push_back(std::async(std::launch::async, run_one, o.seed + static_cast<std::uint64_t>(s),
                                     nullptr));
    for (auto& f : futures) results.push_back(f.get());

    long violations = 0, events = 0;
    for (const auto& r : results) {
        violations += r.violations;
        events += r.events;
    }
    std::cout << "majorization held: " << (violations == 0 ? "yes" : "no") << "\n";
    std::cout << "ref=" << o.ref << " seeds=" << o.seeds << " events=" << events
              << " violations=" << violations << "\n";
    return violations == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulator and numerical toolkit for affinity-based load balancing"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from an INI/TOML file (flags take precedence)");
    int rc = 0;

    SimulateOpts sim;
    auto* cs = app.add_subcommand("simulate", "event-driven simulation of the occupancy process");
    cs->add_option("--model", sim.model, "combinatorial | graph | general");
    cs->add_option("--n", sim.n, "number of servers (combinatorial)");
    cs->add_option("--d1", sim.d1, "primary selection size (combinatorial)");
    cs->add_option("--lambda", sim.lambda, "per-server arrival rate");
    cs->add_option("--graph", sim.graph, "cycle:n | complete:n | regular:n:d | file:path");
    cs->add_option("--family-file", sim.family_file, "JSON selection family (general)");
    cs->add_option("--mu1", sim.mu1, "primary service rate");
    cs->add_option("--mu2", sim.mu2, "secondary service rate");
    cs->add_option("--horizon", sim.horizon, "simulated time");
    cs->add_option("--sample-dt", sim.sample_dt, "snapshot interval");
    cs->add_option("--seed", sim.seed, "random seed");
    cs->add_option("--imax", sim.imax, "highest recorded occupancy level");
    cs->add_option("--init", sim.init, "empty | allii");
    cs->add_option("--out", sim.out, "trajectory CSV path");
    cs->add_option("--summary-out", sim.summary_out, "summary JSON path (default stdout)");
    cs->callback([&] { rc = run_simulate(sim); });

    FluidOpts fl;
    auto* cf = app.add_subcommand("fluid", "integrate the fluid-limit dynamics");
    cf->add_option("--d1", fl.d1, "primary selection size");
    cf->add_option("--lambda", fl.lambda, "arrival rate");
    cf->add_option("--mu1", fl.mu1, "primary service rate");
    cf->add_option("--mu2", fl.mu2, "secondary service rate");
    cf->add_option("--eps0", fl.eps0, "idle-fraction zero threshold");
    cf->add_option("--imax", fl.imax, "truncation level");
    cf->add_option("--horizon", fl.horizon, "integration time");
    cf->add_option("--dt", fl.dt, "integrator step");
    cf->add_option("--sample-dt", fl.sample_dt, "snapshot interval");
    cf->add_option("--init", fl.init, "empty | allii");
    cf->add_option("--init-file", fl.init_file, "JSON array of cumulative fractions");
    cf->add_option("--out", fl.out, "trajectory CSV path");
    cf->callback([&] { rc = run_fluid(fl); });

    FixpointOpts fp;
    auto* cp = app.add_subcommand("fixpoint", "fixed points, stability and performance metrics");
    cp->add_option("--d1", fp.d1, "primary selection size");
    cp->add_option("--lambda", fp.lambda, "arrival rate");
    cp->add_option("--mu1", fp.mu1, "primary service rate");
    cp->add_option("--mu2", fp.mu2, "secondary service rate");
    cp->add_option("--imax", fp.imax, "levels reported for the queueing fixed point");
    cp->add_option("--sweep", fp.sweep, "lo:hi:step over lambda -> metrics CSV");
    cp->add_option("--out", fp.out, "output path (default stdout)");
    cp->callback([&] { rc = run_fixpoint(fp); });

    TablesOpts tb;
    auto* ct = app.add_subcommand("tables", "reference tables (dominance degrees, d1* thresholds)");
    ct->add_option("--which", tb.which, "dmin | d1star")->required();
    ct->add_option("--n", tb.n, "number of servers (dmin)");
    ct->add_option("--k", tb.k, "k values (dmin)")->delimiter(',');
    ct->add_option("--mu1", tb.mu1, "primary service rate");
    ct->add_option("--mu2", tb.mu2, "mu2 values (d1star)")->delimiter(',');
    ct->add_option("--lambdas", tb.lambdas, "lambda grid (d1star)")->delimiter(',');
    ct->add_option("--out", tb.out, "output path (default stdout)");
    ct->callback([&] { rc = run_tables(tb); });

    Lambda0Opts l0;
    auto* cl = app.add_subcommand("lambda0", "min-max per-server load and optimal splits");
    cl->add_option("--family", l0.family, "path:n | file:selections.json")->required();
    cl->add_option("--rates", l0.rates, "per-selection rates (path families)")->delimiter(',');
    cl->add_option("--out", l0.out, "output path (default stdout)");
    cl->callback([&] { rc = run_lambda0(l0); });

    CoupleOpts co;
    auto* cc = app.add_subcommand("couple", "coupled run against a reference policy");
    cc->add_option("--ref", co.ref, "ra | mjsq | jsqk")->required();
    cc->add_option("--seeds", co.seeds, "number of replications");
    cc->add_option("--events", co.events, "events per replication");
    cc->add_option("--seed", co.seed, "base seed");
    cc->add_option("--mu1", co.mu1, "primary service rate");
    cc->add_option("--mu2", co.mu2, "secondary service rate");
    cc->add_option("--family", co.family, "selection family (ra): path:n | file:...");
    cc->add_option("--rates", co.rates, "per-selection rates (ra)")->delimiter(',');
    cc->add_option("--graph", co.graph, "graph spec (mjsq)");
    cc->add_option("--k", co.k, "reference order statistic (mjsq/jsqk)");
    cc->add_option("--n", co.n, "number of servers (jsqk)");
    cc->add_option("--d", co.d, "regular degree (jsqk)");
    cc->add_option("--lambda", co.lambda, "arrival rate per server (mjsq/jsqk)");
    cc->add_option("--log", co.log, "event-log CSV for the first seed");
    cc->callback([&] { rc = run_couple(co); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const internal_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    } catch (const integration_error& e) {
        std::cerr << "integration error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
