#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <future>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hypising/families.hpp"
#include "hypising/geometry.hpp"
#include "hypising/tiling.hpp"

// Ising Gibbs sampling under frozen boundary conditions, interface
// extraction in the dual, tube containment, and the rigidity / phase-probe
// experiments.

namespace hypising::mc {

using geom::Geodesic;
using geom::ModelPoint;
using lat::BoxRegion;
using lat::LatticeGraph;

struct InconsistentBoundary : std::runtime_error {
    explicit InconsistentBoundary(const std::string& w) : std::runtime_error(w) {}
};

// ---------------------------------------------------------------------------
// RNG streams: deterministic per (seed, stream index).

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0xD1B54A32D192ED03ULL * (stream + 1));
    std::uint64_t a = splitmix64(s), b = splitmix64(s), c = splitmix64(s), d = splitmix64(s);
    std::seed_seq seq{a, b, c, d};
    return std::mt19937_64(seq);
}

inline double uniform01(std::mt19937_64& g) { return (g() >> 11) * 0x1.0p-53; }

inline int worker_count() {
    if (const char* env = std::getenv("HYPISING_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Spin states and single-site dynamics.

struct SpinState {
    const LatticeGraph* graph = nullptr;
    std::vector<std::int8_t> spins;
    std::vector<char> frozen;
};

enum class Dynamics { metropolis, heat_bath };

struct SamplerConfig {
    double beta = 1.0;
    int sweeps = 1000;
    int burn_in = 200;
    int replicas = 1;
    std::uint64_t seed = 1;
    Dynamics dynamics = Dynamics::metropolis;
    int measure_every = 10;
};

inline double energy(const SpinState& s) {
    double e = 0;
    for (auto [u, v] : s.graph->edges) e -= s.spins[u] * s.spins[v];
    return e;
}

inline double magnetization_free(const SpinState& s) {
    long sum = 0;
    long count = 0;
    for (int v = 0; v < s.graph->vertex_count(); ++v)
        if (!s.frozen[v]) {
            sum += s.spins[v];
            ++count;
        }
    return count == 0 ? 0.0 : static_cast<double>(sum) / count;
}

// All-vertex state from a boundary assignment, frozen outside the interior.
inline SpinState make_state(const LatticeGraph& g, const lat::BoundarySpinAssignment& signs,
                            const BoxRegion& box) {
    SpinState s;
    s.graph = &g;
    s.spins.assign(signs.sign.begin(), signs.sign.end());
    s.frozen.assign(g.vertex_count(), 1);
    for (int v : box.interior) s.frozen[v] = 0;
    return s;
}

inline SpinState constant_state(const LatticeGraph& g, const BoxRegion& box, std::int8_t value) {
    SpinState s;
    s.graph = &g;
    s.spins.assign(g.vertex_count(), value);
    s.frozen.assign(g.vertex_count(), 1);
    for (int v : box.interior) s.frozen[v] = 0;
    return s;
}

struct ChainTrace {
    std::vector<int> sweep;
    std::vector<double> energy;
    std::vector<double> magnetization;
};

// One sweep = one deterministic pass over the free vertices.
inline void sweep_once(SpinState& s, double beta, Dynamics dyn, const std::vector<int>& free_sites,
                       std::mt19937_64& rng) {
    for (int v : free_sites) {
        int h = 0;
        for (int w : s.graph->adjacency[v]) h += s.spins[w];
        if (dyn == Dynamics::heat_bath) {
            double p_plus = 1.0 / (1.0 + std::exp(-2.0 * beta * h));
            s.spins[v] = detail::uniform01(rng) < p_plus ? 1 : -1;
        } else {
            double dE = 2.0 * s.spins[v] * h;
            if (dE <= 0 || detail::uniform01(rng) < std::exp(-beta * dE))
                s.spins[v] = -s.spins[v];
        }
    }
}

inline std::vector<int> free_sites_of(const SpinState& s) {
    std::vector<int> out;
    for (int v = 0; v < s.graph->vertex_count(); ++v)
        if (!s.frozen[v]) out.push_back(v);
    return out;
}

// Runs burn-in plus measured sweeps; on_measure(sweep_index) fires every
// config.measure_every sweeps of the measurement phase.
template <class F>
void run_chain_with(SpinState& s, const SamplerConfig& cfg, std::uint64_t stream, F&& on_measure) {
    std::mt19937_64 rng = detail::make_stream(cfg.seed, stream);
    std::vector<int> free_sites = free_sites_of(s);
    for (int i = 0; i < cfg.burn_in; ++i) sweep_once(s, cfg.beta, cfg.dynamics, free_sites, rng);
    for (int i = 0; i < cfg.sweeps; ++i) {
        sweep_once(s, cfg.beta, cfg.dynamics, free_sites, rng);
        if ((i + 1) % cfg.measure_every == 0) on_measure(i + 1);
    }
}

inline ChainTrace run_chain(SpinState& s, const SamplerConfig& cfg, std::uint64_t stream = 0) {
    ChainTrace trace;
    run_chain_with(s, cfg, stream, [&](int sweep) {
        trace.sweep.push_back(sweep);
        trace.energy.push_back(energy(s));
        trace.magnetization.push_back(magnetization_free(s));
    });
    return trace;
}

// ---------------------------------------------------------------------------
// Boundary arcs: the frozen ring in cyclic order, its sign transitions, and
// the family geodesic responsible for each transition.

struct BoundaryArcs {
    std::vector<int> ring;                  // boundary vertices, cyclic order
    std::vector<int> transition_pos;        // i: sign(ring[i]) != sign(ring[i+1])
    std::vector<int> transition_curve;      // family curve separating the pair
    std::vector<std::pair<int, int>> ground_pairs;  // transition indices paired by curve
};

namespace detail {

inline std::vector<int> ring_in_cyclic_order(const BoxRegion& box) {
    const LatticeGraph& g = *box.graph;
    ModelPoint c = geom::to_disk(g.coords[box.center]);
    std::complex<double> zc(c.x, c.y);
    std::vector<std::pair<double, int>> order;
    for (int v : box.boundary) {
        ModelPoint p = geom::to_disk(g.coords[v]);
        std::complex<double> w = (std::complex<double>(p.x, p.y) - zc) /
                                 (1.0 - std::conj(zc) * std::complex<double>(p.x, p.y));
        order.push_back({std::atan2(w.imag(), w.real()), v});
    }
    std::sort(order.begin(), order.end());
    std::vector<int> ring;
    for (auto& [a, v] : order) ring.push_back(v);
    return ring;
}

}  // namespace detail

inline BoundaryArcs make_boundary_arcs(const BoxRegion& box,
                                       const lat::BoundarySpinAssignment& signs,
                                       const fam::SignedGeodesicFamily& family_used) {
    BoundaryArcs arcs;
    arcs.ring = detail::ring_in_cyclic_order(box);
    const LatticeGraph& g = *box.graph;
    const int n = static_cast<int>(arcs.ring.size());
    for (int i = 0; i < n; ++i) {
        int u = arcs.ring[i], v = arcs.ring[(i + 1) % n];
        if (signs.sign[u] == signs.sign[v]) continue;
        if (g.edge_index(u, v) < 0)
            throw InconsistentBoundary("boundary ring is not a cycle at a sign transition");
        ModelPoint pu = geom::to_halfplane(g.coords[u]);
        ModelPoint pv = geom::to_halfplane(g.coords[v]);
        int curve = -1;
        int count = 0;
        for (int ci = 0; ci < static_cast<int>(family_used.geodesics.size()); ++ci)
            if (geom::separates(family_used.geodesics[ci], pu, pv)) {
                curve = ci;
                ++count;
            }
        if (count != 1)
            throw InconsistentBoundary("boundary transition not caused by exactly one geodesic");
        arcs.transition_pos.push_back(i);
        arcs.transition_curve.push_back(curve);
    }
    // ground pairing by curve identity
    std::vector<std::vector<int>> by_curve(family_used.geodesics.size());
    for (int t = 0; t < static_cast<int>(arcs.transition_curve.size()); ++t)
        by_curve[arcs.transition_curve[t]].push_back(t);
    for (const auto& ts : by_curve) {
        if (ts.empty()) continue;
        if (ts.size() != 2)
            throw InconsistentBoundary("geodesic does not cross the boundary exactly twice");
        arcs.ground_pairs.push_back({ts[0], ts[1]});
    }
    return arcs;
}

// ---------------------------------------------------------------------------
// Interface extraction in the dual.

struct ContourSet {
    std::vector<int> edge_ids;              // disagreement edges inside the box
    std::vector<int> component;             // per listed edge
    int n_components = 0;
    std::vector<char> open;                 // per component
    std::vector<std::vector<int>> comp_transitions;  // transition indices per component
    int closed_count = 0;
};

struct Partition {
    std::vector<std::pair<int, int>> pairs;  // transition index pairs, ordered

    bool operator==(const Partition&) const = default;
};

namespace detail {

struct UnionFind {
    std::vector<int> up;
    explicit UnionFind(int n) : up(n) { std::iota(up.begin(), up.end(), 0); }
    int find(int a) {
        while (up[a] != a) a = up[a] = up[up[a]];
        return a;
    }
    void unite(int a, int b) { up[find(a)] = find(b); }
};

}  // namespace detail

inline std::vector<int> disagreement_edges(const SpinState& s, const BoxRegion& box) {
    std::vector<int> out;
    const LatticeGraph& g = *s.graph;
    for (int e = 0; e < g.edge_count(); ++e) {
        auto [u, v] = g.edges[e];
        if (box.dist[u] < 0 || box.dist[v] < 0) continue;
        if (s.spins[u] != s.spins[v]) out.push_back(e);
    }
    return out;
}

inline std::pair<ContourSet, Partition> extract_interfaces(const SpinState& s, const BoxRegion& box,
                                                           const BoundaryArcs& arcs) {
    const LatticeGraph& g = *s.graph;
    ContourSet cs;
    cs.edge_ids = disagreement_edges(s, box);
    const int ne = static_cast<int>(cs.edge_ids.size());
    std::vector<int> edge_slot(g.edge_count(), -1);
    for (int i = 0; i < ne; ++i) edge_slot[cs.edge_ids[i]] = i;

    auto face_in_box = [&](int f) {
        if (f < 0) return false;
        for (int v : g.faces[f])
            if (box.dist[v] < 0) return false;
        return true;
    };

    detail::UnionFind uf(ne);
    std::vector<int> open_ends(ne, 0);
    // pair disagreement edges inside each fully included face
    std::vector<char> face_done(g.faces.size(), 0);
    for (int i = 0; i < ne; ++i) {
        for (int side : g.edge_faces(cs.edge_ids[i])) {
            if (!face_in_box(side)) {
                ++open_ends[i];
                continue;
            }
            if (face_done[side]) continue;
            face_done[side] = 1;
            const auto& cyc = g.faces[side];
            std::vector<int> slots;
            for (std::size_t k = 0; k < cyc.size(); ++k) {
                int e = g.edge_index(cyc[k], cyc[(k + 1) % cyc.size()]);
                if (e >= 0 && edge_slot[e] >= 0) slots.push_back(edge_slot[e]);
            }
            // consecutive pairing around the face (even count by parity)
            for (std::size_t k = 0; k + 1 < slots.size(); k += 2) uf.unite(slots[k], slots[k + 1]);
        }
    }

    // open ends at boundary-ring transitions
    const int nring = static_cast<int>(arcs.ring.size());
    std::vector<int> ring_pos(g.vertex_count(), -1);
    for (int i = 0; i < nring; ++i) ring_pos[arcs.ring[i]] = i;

    std::vector<int> root_of(ne);
    std::vector<int> comp_of_root;
    std::vector<int> comp_index(ne, -1);
    for (int i = 0; i < ne; ++i) root_of[i] = uf.find(i);
    for (int i = 0; i < ne; ++i) {
        int r = root_of[i];
        if (comp_index[r] < 0) {
            comp_index[r] = cs.n_components++;
        }
    }
    cs.component.resize(ne);
    for (int i = 0; i < ne; ++i) cs.component[i] = comp_index[root_of[i]];
    cs.open.assign(cs.n_components, 0);
    cs.comp_transitions.assign(cs.n_components, {});

    for (int t = 0; t < static_cast<int>(arcs.transition_pos.size()); ++t) {
        int i = arcs.transition_pos[t];
        int u = arcs.ring[i], v = arcs.ring[(i + 1) % nring];
        int e = g.edge_index(u, v);
        int slot = e >= 0 ? edge_slot[e] : -1;
        if (slot < 0)
            throw InconsistentBoundary("transition edge carries no disagreement");
        int c = cs.component[slot];
        cs.open[c] = 1;
        cs.comp_transitions[c].push_back(t);
    }
    for (int c = 0; c < cs.n_components; ++c)
        if (!cs.open[c]) ++cs.closed_count;

    Partition part;
    for (int c = 0; c < cs.n_components; ++c) {
        if (!cs.open[c]) continue;
        if (cs.comp_transitions[c].size() != 2)
            throw InconsistentBoundary("open interface does not join exactly two arcs");
        int a = cs.comp_transitions[c][0], b = cs.comp_transitions[c][1];
        part.pairs.push_back({std::min(a, b), std::max(a, b)});
    }
    std::sort(part.pairs.begin(), part.pairs.end());
    return {cs, part};
}

inline Partition ground_partition(const BoundaryArcs& arcs) {
    Partition p;
    for (auto [a, b] : arcs.ground_pairs) p.pairs.push_back({std::min(a, b), std::max(a, b)});
    std::sort(p.pairs.begin(), p.pairs.end());
    return p;
}

// ---------------------------------------------------------------------------
// Containment in the neighborhood C_m(gamma, z) built from balls of radius
// max(m, dist(y, z)) around sampled points y of gamma.

inline bool point_in_tube(const ModelPoint& w, const Geodesic& gamma, const ModelPoint& z,
                          double m, double t_lo, double t_hi, double step = 0.1) {
    for (double t = t_lo; t <= t_hi; t += step) {
        ModelPoint y = geom::point_on_geodesic(gamma, t);
        double r = std::max(m, geom::point_distance(y, z));
        if (geom::point_distance(w, y) <= r) return true;
    }
    return false;
}

inline bool containment_check(const std::vector<ModelPoint>& dual_points, const Geodesic& gamma,
                              const ModelPoint& z, double m, double step = 0.1) {
    if (dual_points.empty()) return true;
    double reach = 0;
    ModelPoint zh = geom::to_halfplane(z);
    for (const ModelPoint& w : dual_points)
        reach = std::max(reach, geom::point_distance(geom::to_halfplane(w), zh));
    Geodesic gh = geom::to_halfplane(gamma);
    geom::Isometry ax = geom::map_to_axis(gh);
    double t_z = std::log(ax.apply(zh).y);  // parameter of z's foot
    double span = reach + m + 6;
    for (const ModelPoint& w : dual_points)
        if (!point_in_tube(geom::to_halfplane(w), gh, zh, m, t_z - span, t_z + span, step))
            return false;
    return true;
}

// Precomputed per-edge tube membership for one (gamma, z): an edge midpoint
// w lies in C_m iff min_dist <= m or min_slack <= 0.
struct TubeTable {
    std::vector<double> min_dist;   // per edge id: min_y d(w, y)
    std::vector<double> min_slack;  // per edge id: min_y (d(w, y) - d(y, z))

    bool contained(int edge_id, double m) const {
        return min_dist[edge_id] <= m || min_slack[edge_id] <= 0;
    }
};

inline TubeTable make_tube_table(const LatticeGraph& g, const BoxRegion& box,
                                 const Geodesic& gamma, const ModelPoint& z, double m_max,
                                 double step = 0.1) {
    TubeTable tt;
    tt.min_dist.assign(g.edge_count(), std::numeric_limits<double>::infinity());
    tt.min_slack.assign(g.edge_count(), std::numeric_limits<double>::infinity());
    Geodesic gh = geom::to_halfplane(gamma);
    ModelPoint zh = geom::to_halfplane(z);
    geom::Isometry ax = geom::map_to_axis(gh);
    double t_z = std::log(ax.apply(zh).y);

    std::vector<int> edges_in_box;
    std::vector<ModelPoint> mids;
    double reach = 0;
    for (int e = 0; e < g.edge_count(); ++e) {
        auto [u, v] = g.edges[e];
        if (box.dist[u] < 0 || box.dist[v] < 0) continue;
        edges_in_box.push_back(e);
        ModelPoint mid = geom::hyperbolic_midpoint(geom::to_halfplane(g.coords[u]),
                                                   geom::to_halfplane(g.coords[v]));
        mids.push_back(mid);
        reach = std::max(reach, geom::point_distance(mid, zh));
    }
    double span = reach + m_max + 6;
    for (double t = t_z - span; t <= t_z + span; t += step) {
        ModelPoint y = geom::point_on_geodesic(gh, t);
        double dz = geom::point_distance(y, zh);
        for (std::size_t i = 0; i < edges_in_box.size(); ++i) {
            double d = geom::point_distance(mids[i], y);
            int e = edges_in_box[i];
            tt.min_dist[e] = std::min(tt.min_dist[e], d);
            tt.min_slack[e] = std::min(tt.min_slack[e], d - dz);
        }
    }
    return tt;
}

// ---------------------------------------------------------------------------
// Unified statistics row (one CSV schema for every experiment).

struct StatRow {
    std::string run_id;
    double beta = 0;
    double m = 0;  // tube radius, probe radius, or inner depth depending on experiment
    int replicas = 0;
    int sweeps = 0;
    double escapes = std::numeric_limits<double>::quiet_NaN();
    double wrong_partition = std::numeric_limits<double>::quiet_NaN();
    double lambda_hits = std::numeric_limits<double>::quiet_NaN();
    double mean_spin_ur = std::numeric_limits<double>::quiet_NaN();
    double mean_spin_plus = std::numeric_limits<double>::quiet_NaN();  // all-plus reference
    double escapes_stderr = std::numeric_limits<double>::quiet_NaN();
    double wrong_partition_stderr = std::numeric_limits<double>::quiet_NaN();
    double lambda_hits_stderr = std::numeric_limits<double>::quiet_NaN();
    double mean_spin_ur_stderr = std::numeric_limits<double>::quiet_NaN();
};

inline void write_stats_csv(std::ostream& os, const std::vector<StatRow>& rows) {
    os << "run_id,beta,m,replicas,sweeps,escapes,wrong_partition,lambda_hits,mean_spin_Ur,"
          "mean_spin_plus,escapes_stderr,wrong_partition_stderr,lambda_hits_stderr,"
          "mean_spin_Ur_stderr\n";
    auto cell = [&](double v) {
        if (std::isnan(v)) return std::string();
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return std::string(buf);
    };
    for (const auto& r : rows) {
        os << r.run_id << ',' << cell(r.beta) << ',' << cell(r.m) << ',' << r.replicas << ','
           << r.sweeps << ',' << cell(r.escapes) << ',' << cell(r.wrong_partition) << ','
           << cell(r.lambda_hits) << ',' << cell(r.mean_spin_ur) << ',' << cell(r.mean_spin_plus)
           << ',' << cell(r.escapes_stderr) << ',' << cell(r.wrong_partition_stderr) << ','
           << cell(r.lambda_hits_stderr) << ',' << cell(r.mean_spin_ur_stderr) << '\n';
    }
}

inline double binomial_stderr(double freq, long n) {
    return n > 0 ? std::sqrt(std::max(freq * (1 - freq), 0.0) / n) : 0.0;
}

// ---------------------------------------------------------------------------
// Rigidity experiment: escape frequencies from C_m per geodesic (conditional
// on the ground partition) and wrong-partition frequencies.

struct RigidityResult {
    std::vector<StatRow> rows;  // one per (beta, m); wrong_partition repeated
};

inline std::vector<ModelPoint> anchor_points(const fam::SignedGeodesicFamily& family) {
    std::vector<ModelPoint> zs;
    ModelPoint origin = ModelPoint::halfplane(0, 1);
    if (family.geodesics.size() == 2) {
        auto cp = geom::common_perpendicular(family.geodesics[0], family.geodesics[1]);
        zs.push_back(cp.foot1);
        zs.push_back(cp.foot2);
    } else {
        for (const Geodesic& g : family.geodesics) zs.push_back(geom::closest_point(g, origin));
    }
    return zs;
}

inline RigidityResult rigidity_experiment(const LatticeGraph& g,
                                          const fam::SignedGeodesicFamily& family,
                                          const BoxRegion& box, const SamplerConfig& base_cfg,
                                          const std::vector<double>& m_values,
                                          const std::vector<double>& beta_grid,
                                          const std::string& run_id = "rigidity") {
    auto signs = lat::assign_signs(g, family);
    auto used = family.transformed(geom::Isometry::translation(signs.applied_shift));
    BoundaryArcs arcs = make_boundary_arcs(box, signs, used);
    Partition pi0 = ground_partition(arcs);
    std::vector<ModelPoint> zs = anchor_points(used);
    double m_max = m_values.empty() ? 1.0 : *std::max_element(m_values.begin(), m_values.end());
    std::vector<TubeTable> tubes;
    for (std::size_t i = 0; i < used.geodesics.size(); ++i)
        tubes.push_back(make_tube_table(g, box, used.geodesics[i], zs[i], m_max));
    // transition -> curve gives each open component its reference tube
    RigidityResult out;
    for (double beta : beta_grid) {
        SamplerConfig cfg = base_cfg;
        cfg.beta = beta;
        struct Tally {
            long samples = 0, pi0 = 0, wrong = 0;
            std::vector<long> escapes;  // per m value
            double mag_sum = 0;
        };
        auto run_replica = [&](int rep) {
            Tally t;
            t.escapes.assign(m_values.size(), 0);
            SpinState s = make_state(g, signs, box);
            run_chain_with(s, cfg, static_cast<std::uint64_t>(rep), [&](int) {
                ++t.samples;
                t.mag_sum += magnetization_free(s);
                auto [contours, part] = extract_interfaces(s, box, arcs);
                if (!(part == pi0)) {
                    ++t.wrong;
                    return;
                }
                ++t.pi0;
                for (std::size_t mi = 0; mi < m_values.size(); ++mi) {
                    bool escaped = false;
                    for (int c = 0; c < contours.n_components && !escaped; ++c) {
                        if (!contours.open[c]) continue;
                        int curve = arcs.transition_curve[contours.comp_transitions[c][0]];
                        for (std::size_t i = 0; i < contours.edge_ids.size(); ++i) {
                            if (contours.component[i] != c) continue;
                            if (!tubes[curve].contained(contours.edge_ids[i], m_values[mi])) {
                                escaped = true;
                                break;
                            }
                        }
                    }
                    if (escaped) ++t.escapes[mi];
                }
            });
            return t;
        };
        std::vector<std::future<Tally>> futs;
        for (int rep = 0; rep < cfg.replicas; ++rep)
            futs.push_back(std::async(std::launch::async, run_replica, rep));
        Tally total;
        total.escapes.assign(m_values.size(), 0);
        for (auto& f : futs) {
            Tally t = f.get();
            total.samples += t.samples;
            total.pi0 += t.pi0;
            total.wrong += t.wrong;
            total.mag_sum += t.mag_sum;
            for (std::size_t mi = 0; mi < m_values.size(); ++mi)
                total.escapes[mi] += t.escapes[mi];
        }
        double wrong_freq = total.samples ? static_cast<double>(total.wrong) / total.samples : 0;
        for (std::size_t mi = 0; mi < m_values.size(); ++mi) {
            StatRow row;
            row.run_id = run_id;
            row.beta = beta;
            row.m = m_values[mi];
            row.replicas = cfg.replicas;
            row.sweeps = cfg.sweeps;
            row.escapes = total.pi0 ? static_cast<double>(total.escapes[mi]) / total.pi0 : 0;
            row.escapes_stderr = binomial_stderr(row.escapes, total.pi0);
            row.wrong_partition = wrong_freq;
            row.wrong_partition_stderr = binomial_stderr(wrong_freq, total.samples);
            row.mean_spin_ur = total.samples ? total.mag_sum / total.samples : 0;
            out.rows.push_back(row);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Phase probe around a point Z: frequency of the contour symmetric
// difference entering U_r(Z), and the local mean spin against an all-plus
// boundary reference.

inline std::vector<StatRow> phase_probe(const LatticeGraph& g,
                                        const fam::SignedGeodesicFamily& family,
                                        const BoxRegion& box, const SamplerConfig& base_cfg,
                                        const ModelPoint& Z, double r,
                                        const std::vector<double>& beta_grid,
                                        const std::string& run_id = "phase") {
    auto signs = lat::assign_signs(g, family);
    auto used = family.transformed(geom::Isometry::translation(signs.applied_shift));
    BoundaryArcs arcs = make_boundary_arcs(box, signs, used);
    ModelPoint zh = geom::to_halfplane(Z);

    std::vector<int> ur_vertices;
    for (int v : box.interior)
        if (geom::point_distance(geom::to_halfplane(g.coords[v]), zh) <= r)
            ur_vertices.push_back(v);
    if (ur_vertices.empty())
        throw std::invalid_argument("phase_probe: U_r(Z) contains no interior vertex");
    for (int v : ur_vertices)
        if (signs.sign[v] != +1)
            throw std::invalid_argument("phase_probe: ground state is not +1 on U_r(Z)");

    SpinState ground = make_state(g, signs, box);
    std::vector<int> ground_edges = disagreement_edges(ground, box);
    std::vector<char> in_ground(g.edge_count(), 0);
    for (int e : ground_edges) in_ground[e] = 1;
    std::vector<char> edge_near_z(g.edge_count(), 0);
    for (int e = 0; e < g.edge_count(); ++e) {
        auto [u, v] = g.edges[e];
        if (box.dist[u] < 0 || box.dist[v] < 0) continue;
        if (geom::point_distance(geom::to_halfplane(g.coords[u]), zh) <= r ||
            geom::point_distance(geom::to_halfplane(g.coords[v]), zh) <= r)
            edge_near_z[e] = 1;
    }

    std::vector<StatRow> rows;
    for (double beta : beta_grid) {
        SamplerConfig cfg = base_cfg;
        cfg.beta = beta;
        struct Tally {
            long samples = 0, hits = 0;
            double spin_sum = 0, plus_sum = 0;
        };
        auto run_replica = [&](int rep) {
            Tally t;
            SpinState s = make_state(g, signs, box);
            run_chain_with(s, cfg, static_cast<std::uint64_t>(rep), [&](int) {
                ++t.samples;
                bool hit = false;
                for (int e : disagreement_edges(s, box)) {
                    bool differs = !in_ground[e];
                    if (differs && edge_near_z[e]) { hit = true; break; }
                }
                // edges present in the ground set but absent now also belong
                // to the symmetric difference
                if (!hit) {
                    for (int e : ground_edges) {
                        auto [u, v] = s.graph->edges[e];
                        if (s.spins[u] == s.spins[v] && edge_near_z[e]) { hit = true; break; }
                    }
                }
                if (hit) ++t.hits;
                double local = 0;
                for (int v : ur_vertices) local += s.spins[v];
                t.spin_sum += local / ur_vertices.size();
            });
            SpinState plus = constant_state(g, box, +1);
            SamplerConfig pc = cfg;
            run_chain_with(plus, pc, static_cast<std::uint64_t>(rep) + 1000003, [&](int) {
                double local = 0;
                for (int v : ur_vertices) local += plus.spins[v];
                t.plus_sum += local / ur_vertices.size();
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
            total.hits += t.hits;
            total.spin_sum += t.spin_sum;
            total.plus_sum += t.plus_sum;
        }
        StatRow row;
        row.run_id = run_id;
        row.beta = beta;
        row.m = r;
        row.replicas = cfg.replicas;
        row.sweeps = cfg.sweeps;
        row.lambda_hits = total.samples ? static_cast<double>(total.hits) / total.samples : 0;
        row.lambda_hits_stderr = binomial_stderr(row.lambda_hits, total.samples);
        row.mean_spin_ur = total.samples ? total.spin_sum / total.samples : 0;
        row.mean_spin_plus = total.samples ? total.plus_sum / total.samples : 0;
        row.mean_spin_ur_stderr =
            total.samples ? 1.0 / std::sqrt(static_cast<double>(total.samples)) : 0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace hypising::mc
