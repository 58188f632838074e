#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypising/gibbs.hpp"
#include "hypising/tiling.hpp"

// Chain coverings of Cayley trees, dimer sets and their ground states,
// exhaustive Peierls-ratio enumeration over root-anchored enclosures, and
// the magnetization / stability measurements.

namespace hypising::tree {

using lat::LatticeGraph;

struct KEven : std::runtime_error {
    explicit KEven(const std::string& w) : std::runtime_error(w) {}
};
struct BadOffsets : std::runtime_error {
    explicit BadOffsets(const std::string& w) : std::runtime_error(w) {}
};
struct DepthTooSmall : std::runtime_error {
    explicit DepthTooSmall(const std::string& w) : std::runtime_error(w) {}
};

// ---------------------------------------------------------------------------
// Chains and coverings.

struct Chain {
    std::vector<int> vertices;  // x_0 .. x_k, consecutive neighbors
    bool complete = true;       // false when truncated at the region edge
};

struct Covering {
    const LatticeGraph* tree = nullptr;
    int k = 0;
    std::vector<Chain> chains;
    int truncated = 0;
};

// Deterministic covering: each chain starts at the smallest uncovered vertex
// (vertex ids are breadth-first with planar tie order) and descends through
// leftmost children.
inline Covering left_greedy_covering(const LatticeGraph& g, int k) {
    if (g.kind != LatticeGraph::Kind::tree)
        throw std::invalid_argument("left_greedy_covering: not a tree");
    if (k < 1) throw std::invalid_argument("left_greedy_covering: k must be positive");
    if (g.generations < k) throw DepthTooSmall("left_greedy_covering: no complete chain fits");
    Covering cov;
    cov.tree = &g;
    cov.k = k;
    std::vector<char> covered(g.vertex_count(), 0);
    for (int v = 0; v < g.vertex_count(); ++v) {
        if (covered[v]) continue;
        Chain c;
        c.vertices.push_back(v);
        covered[v] = 1;
        int cur = v;
        for (int step = 0; step < k; ++step) {
            if (g.children[cur].empty()) {
                c.complete = false;
                break;
            }
            cur = g.children[cur][0];  // the left bond
            c.vertices.push_back(cur);
            covered[cur] = 1;
        }
        if (!c.complete) ++cov.truncated;
        cov.chains.push_back(std::move(c));
    }
    return cov;
}

// ---------------------------------------------------------------------------
// Dimer sets.

struct DimerSet {
    const LatticeGraph* tree = nullptr;
    std::vector<std::pair<int, int>> dimers;  // vertex pairs, u < v
    std::string provenance;                   // "middle" or "offset(l:n)"

    std::vector<int> dimer_partner() const {  // -1 where unmatched
        std::vector<int> partner(tree->vertex_count(), -1);
        for (auto [u, v] : dimers) {
            partner[u] = v;
            partner[v] = u;
        }
        return partner;
    }
};

inline DimerSet middle_dimers(const Covering& cov) {
    if (cov.k % 2 == 0) throw KEven("middle_dimers: k must be odd");
    int m = (cov.k - 1) / 2;
    DimerSet d;
    d.tree = cov.tree;
    d.provenance = "middle";
    for (const Chain& c : cov.chains) {
        if (!c.complete) continue;  // truncated chains carry no dimer
        int u = c.vertices[m], v = c.vertices[m + 1];
        d.dimers.push_back({std::min(u, v), std::max(u, v)});
    }
    return d;
}

// Ground state of a dimer set: antiparallel across dimers, parallel across
// every other bond; the two solutions differ by a global flip.
inline std::vector<std::int8_t> sigma_from_dimers(const LatticeGraph& g, const DimerSet& d,
                                                  int root_sign) {
    std::vector<std::int8_t> spin(g.vertex_count(), 0);
    std::vector<int> partner = d.dimer_partner();
    spin[0] = static_cast<std::int8_t>(root_sign);
    // vertex ids are topologically sorted (parents precede children)
    for (int v = 1; v < g.vertex_count(); ++v) {
        int p = g.parent[v];
        bool dimer = partner[v] == p;
        spin[v] = static_cast<std::int8_t>(dimer ? -spin[p] : spin[p]);
    }
    return spin;
}

// Dimers at bond distance l from the (+)-end of each chain (n from the
// (-)-end), ends labeled by the middle-dimer ground state.
inline DimerSet offset_dimers(const Covering& cov, int l, int n) {
    int k = cov.k;
    bool is_middle = (k % 2 == 1) && l == n && l == (k + 1) / 2;
    if (!is_middle) {
        if (!(l > n && n > 0)) throw BadOffsets("offset_dimers: need l > n > 0");
        if (l + n - 1 != k) throw BadOffsets("offset_dimers: need l + n - 1 = k");
    }
    DimerSet mid = middle_dimers(cov);
    std::vector<std::int8_t> sigma = sigma_from_dimers(*cov.tree, mid, +1);
    DimerSet d;
    d.tree = cov.tree;
    d.provenance = "offset(" + std::to_string(l) + ":" + std::to_string(n) + ")";
    for (const Chain& c : cov.chains) {
        if (!c.complete) continue;
        bool front_plus = sigma[c.vertices.front()] > 0;
        // bond #l counted from the (+)-end, one-indexed
        int u, v;
        if (front_plus) {
            u = c.vertices[l - 1];
            v = c.vertices[l];
        } else {
            u = c.vertices[k - l + 1];
            v = c.vertices[k - l];
        }
        d.dimers.push_back({std::min(u, v), std::max(u, v)});
    }
    return d;
}

// ---------------------------------------------------------------------------
// Exhaustive Peierls ratio over connected enclosures containing the anchor
// (the contours of the stability argument surround the root).

struct RatioBySize {
    int size = 0;
    long count = 0;
    double max_ratio = 0;
};

struct PeierlsReport {
    double sup_ratio = 0;
    std::vector<int> argmax;         // enclosed vertex set achieving the sup
    std::vector<RatioBySize> table;  // per enclosure size
    long enumerated = 0;
};

inline PeierlsReport peierls_ratio(const LatticeGraph& g, const DimerSet& d, int max_interior,
                                   int anchor = 0) {
    if (g.kind != LatticeGraph::Kind::tree)
        throw std::invalid_argument("peierls_ratio: not a tree");
    if (max_interior < 1) throw std::invalid_argument("peierls_ratio: max_interior must be >= 1");
    const int full = g.nominal_degree();
    std::vector<char> eligible(g.vertex_count(), 0);
    for (int v = 0; v < g.vertex_count(); ++v) eligible[v] = g.degree(v) == full;
    if (!eligible[anchor])
        throw DepthTooSmall("peierls_ratio: anchor is truncated by the region edge");
    std::vector<int> partner = d.dimer_partner();

    PeierlsReport rep;
    rep.table.resize(max_interior);
    for (int s = 0; s < max_interior; ++s) rep.table[s].size = s + 1;

    std::vector<char> in_set(g.vertex_count(), 0);
    std::vector<int> set_stack{anchor};
    in_set[anchor] = 1;
    int crossing_dimers = partner[anchor] >= 0 ? 1 : 0;

    auto record = [&]() {
        int s = static_cast<int>(set_stack.size());
        double boundary = (g.n - 1) * static_cast<double>(s) + 2;
        double ratio = crossing_dimers / boundary;
        auto& row = rep.table[s - 1];
        ++row.count;
        ++rep.enumerated;
        row.max_ratio = std::max(row.max_ratio, ratio);
        if (ratio > rep.sup_ratio) {
            rep.sup_ratio = ratio;
            rep.argmax = set_stack;
        }
    };

    // unique enumeration: extend only with vertices discovered at or after
    // the current extension index (each set has one canonical build order)
    std::function<void(const std::vector<int>&, std::size_t)> grow =
        [&](const std::vector<int>& ext, std::size_t start) {
            record();
            if (static_cast<int>(set_stack.size()) == max_interior) return;
            for (std::size_t i = start; i < ext.size(); ++i) {
                int v = ext[i];
                std::vector<int> next(ext.begin() + i + 1, ext.end());
                for (int w : g.adjacency[v])
                    if (eligible[w] && !in_set[w] &&
                        std::find(ext.begin(), ext.end(), w) == ext.end())
                        next.push_back(w);
                set_stack.push_back(v);
                in_set[v] = 1;
                int delta = 0;
                if (partner[v] >= 0) delta = in_set[partner[v]] ? -1 : +1;
                crossing_dimers += delta;
                grow(next, 0);
                crossing_dimers -= delta;
                in_set[v] = 0;
                set_stack.pop_back();
            }
        };
    std::vector<int> ext0;
    for (int w : g.adjacency[anchor])
        if (eligible[w]) ext0.push_back(w);
    grow(ext0, 0);
    return rep;
}

inline void write_ratio_csv(std::ostream& os, const PeierlsReport& rep) {
    os << "size,count,max_ratio,argmax_set\n";
    for (const auto& row : rep.table) {
        os << row.size << ',' << row.count << ',' << row.max_ratio << ',';
        os << '"';
        bool first = true;
        for (int v : rep.argmax) {
            if (!first) os << ' ';
            os << v;
            first = false;
        }
        os << '"' << '\n';
    }
}

// ---------------------------------------------------------------------------
// Path witness: an ordered list of dimers a simple curve can cross
// consecutively (the complement of a planar tree is connected, so any
// distinct bonds work once listed in contour-walk order).

struct PathWitness {
    std::vector<std::pair<int, int>> bonds;
};

inline std::optional<PathWitness> path_ratio_witness(const LatticeGraph& g, const DimerSet& d,
                                                     int length) {
    if (length < 1 || static_cast<int>(d.dimers.size()) < length) return std::nullopt;
    // order dimers by the preorder position of their deeper endpoint
    std::vector<int> pre(g.vertex_count(), 0);
    int counter = 0;
    std::function<void(int)> dfs = [&](int v) {
        pre[v] = counter++;
        for (int c : g.children[v]) dfs(c);
    };
    dfs(0);
    std::vector<std::pair<int, int>> sorted = d.dimers;
    std::sort(sorted.begin(), sorted.end(), [&](auto& a, auto& b) {
        return std::max(pre[a.first], pre[a.second]) < std::max(pre[b.first], pre[b.second]);
    });
    PathWitness w;
    w.bonds.assign(sorted.begin(), sorted.begin() + length);
    return w;
}

// ---------------------------------------------------------------------------
// Magnetization and the sampling stability check.

inline double tree_magnetization(const std::vector<std::int8_t>& spin, const LatticeGraph& g,
                                 int depth) {
    long sum = 0, count = 0;
    for (int v = 0; v < g.vertex_count(); ++v)
        if (g.generation[v] <= depth) {
            sum += spin[v];
            ++count;
        }
    if (count == 0) throw std::invalid_argument("tree_magnetization: empty ball");
    return static_cast<double>(sum) / count;
}

// Mean overlap with sigma_D over the inner ball, per beta; the boundary
// shell of the generated tree is frozen to sigma_D.
inline std::vector<mc::StatRow> tree_stability_experiment(const LatticeGraph& g, const DimerSet& d,
                                                          const mc::SamplerConfig& base_cfg,
                                                          int inner_depth,
                                                          const std::vector<double>& beta_grid,
                                                          const std::string& run_id = "tree") {
    if (inner_depth >= g.generations)
        throw std::invalid_argument("tree_stability_experiment: inner depth too large");
    std::vector<std::int8_t> sigma = sigma_from_dimers(g, d, +1);
    std::vector<int> inner;
    for (int v = 0; v < g.vertex_count(); ++v)
        if (g.generation[v] <= inner_depth) inner.push_back(v);

    std::vector<mc::StatRow> rows;
    for (double beta : beta_grid) {
        mc::SamplerConfig cfg = base_cfg;
        cfg.beta = beta;
        struct Tally {
            long samples = 0;
            double overlap_sum = 0, overlap_sq = 0;
        };
        auto run_replica = [&](int rep) {
            Tally t;
            mc::SpinState s;
            s.graph = &g;
            s.spins = sigma;
            s.frozen.assign(g.vertex_count(), 0);
            for (int v = 0; v < g.vertex_count(); ++v)
                if (g.generation[v] == g.generations) s.frozen[v] = 1;
            mc::run_chain_with(s, cfg, static_cast<std::uint64_t>(rep), [&](int) {
                double o = 0;
                for (int v : inner) o += s.spins[v] * sigma[v];
                o /= inner.size();
                ++t.samples;
                t.overlap_sum += o;
                t.overlap_sq += o * o;
            });
            return t;
        };
        std::vector<std::future<Tally>> futs;
        for (int rep = 0; rep < cfg.replicas; ++rep)
            futs.push_back(std::async(std::launch::async, run_replica, rep));
        Tally total;
        for (auto& f : futs) {
            Tally t = f.get();
            total.samples += t.samples;
            total.overlap_sum += t.overlap_sum;
            total.overlap_sq += t.overlap_sq;
        }
        mc::StatRow row;
        row.run_id = run_id;
        row.beta = beta;
        row.m = inner_depth;
        row.replicas = cfg.replicas;
        row.sweeps = cfg.sweeps;
        double mean = total.samples ? total.overlap_sum / total.samples : 0;
        double var = total.samples ? std::max(total.overlap_sq / total.samples - mean * mean, 0.0)
                                   : 0;
        row.mean_spin_ur = mean;
        row.mean_spin_ur_stderr = total.samples ? std::sqrt(var / total.samples) : 0;
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// JSON: {k, chains:[[v...]], dimers:[[u,v]], provenance}.

inline nlohmann::json covering_to_json(const Covering& cov, const DimerSet& d) {
    nlohmann::json chains = nlohmann::json::array();
    for (const Chain& c : cov.chains) chains.push_back(c.vertices);
    nlohmann::json dimers = nlohmann::json::array();
    for (auto [u, v] : d.dimers) dimers.push_back({u, v});
    return nlohmann::json{{"k", cov.k},
                          {"chains", chains},
                          {"dimers", dimers},
                          {"provenance", d.provenance},
                          {"truncated_chains", cov.truncated}};
}

}  // namespace hypising::tree
