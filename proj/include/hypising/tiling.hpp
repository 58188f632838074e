#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "hypising/families.hpp"
#include "hypising/geometry.hpp"

// Embedded hyperbolic tessellations and Cayley trees in the Poincare disk,
// graph balls, and projection of a signed geodesic family onto vertex spins.

namespace hypising::lat {

using geom::Geodesic;
using geom::Model;
using geom::ModelPoint;

struct NotHyperbolic : std::runtime_error {
    explicit NotHyperbolic(const std::string& w) : std::runtime_error(w) {}
};
struct RadiusExceedsGeneration : std::runtime_error {
    explicit RadiusExceedsGeneration(const std::string& w) : std::runtime_error(w) {}
};
struct DegenerateIncidence : std::runtime_error {
    explicit DegenerateIncidence(const std::string& w) : std::runtime_error(w) {}
};

struct LatticeGraph {
    enum class Kind { tessellation, tree };
    Kind kind = Kind::tessellation;
    int p = 0, q = 0;      // tessellation parameters
    int n = 0;             // tree branching (interior degree n + 1)
    int generations = 0;

    std::vector<ModelPoint> coords;            // disk model
    std::vector<int> generation;               // graph distance from the seed
    std::vector<std::vector<int>> adjacency;   // sorted neighbor lists
    std::vector<std::pair<int, int>> edges;    // u < v
    std::vector<std::vector<int>> faces;       // cyclic vertex lists (tessellations)
    std::vector<int> parent;                   // trees: -1 at the root
    std::vector<std::vector<int>> children;    // trees: left-to-right order

    int vertex_count() const { return static_cast<int>(coords.size()); }
    int edge_count() const { return static_cast<int>(edges.size()); }
    int degree(int v) const { return static_cast<int>(adjacency[v].size()); }
    int nominal_degree() const { return kind == Kind::tessellation ? q : n + 1; }

    int edge_index(int u, int v) const {
        if (u > v) std::swap(u, v);
        auto it = edge_ids_.find(pack(u, v));
        return it == edge_ids_.end() ? -1 : it->second;
    }
    // faces flanking an edge; -1 where the patch has none
    const std::array<int, 2>& edge_faces(int edge_id) const { return edge_faces_[edge_id]; }

    void finalize() {
        for (auto& a : adjacency) std::sort(a.begin(), a.end());
        edge_ids_.clear();
        for (int e = 0; e < edge_count(); ++e) edge_ids_[pack(edges[e].first, edges[e].second)] = e;
        edge_faces_.assign(edge_count(), {-1, -1});
        for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
            const auto& cyc = faces[f];
            for (std::size_t i = 0; i < cyc.size(); ++i) {
                int e = edge_index(cyc[i], cyc[(i + 1) % cyc.size()]);
                if (e < 0) continue;
                if (edge_faces_[e][0] < 0) edge_faces_[e][0] = f;
                else edge_faces_[e][1] = f;
            }
        }
    }

  private:
    static std::int64_t pack(int u, int v) {
        return (static_cast<std::int64_t>(u) << 32) | static_cast<std::uint32_t>(v);
    }
    std::unordered_map<std::int64_t, int> edge_ids_;
    std::vector<std::array<int, 2>> edge_faces_;
};

// ---------------------------------------------------------------------------
// Tessellation L_{p,q} by reflection closure of the seed face.

namespace detail {

using Complex = std::complex<double>;

// geodesic through two disk points, as data for reflecting: either a
// diameter (line through the origin) or a circle orthogonal to the unit one
struct DiskMirror {
    bool is_line = false;
    Complex center;  // circle case
    double radius = 0;
    double nx = 0, ny = 0;  // line case: unit normal

    static DiskMirror through(Complex a, Complex b) {
        DiskMirror m;
        double cross = a.real() * b.imag() - a.imag() * b.real();
        double scale = std::max(std::abs(a), std::abs(b));
        if (std::abs(cross) <= 1e-14 * scale * scale) {
            m.is_line = true;
            Complex d = b - a;
            double len = std::abs(d);
            m.nx = -d.imag() / len;
            m.ny = d.real() / len;
            return m;
        }
        // circle through a, b orthogonal to the unit circle:
        // center c satisfies |z-c|^2 = |c|^2 - 1 on the circle
        double a2 = std::norm(a), b2 = std::norm(b);
        // 2 Re(conj(c) a) = a2 + 1 ; 2 Re(conj(c) b) = b2 + 1
        double det = 2 * (a.real() * b.imag() - a.imag() * b.real());
        double r1 = a2 + 1, r2 = b2 + 1;
        double cx = (r1 * b.imag() - r2 * a.imag()) / det;
        double cy = (r2 * a.real() - r1 * b.real()) / det;
        m.center = {cx, cy};
        m.radius = std::sqrt(std::max(cx * cx + cy * cy - 1, 1e-300));
        return m;
    }

    Complex reflect(Complex z) const {
        if (is_line) {
            double d = z.real() * nx + z.imag() * ny;
            return z - 2.0 * d * Complex(nx, ny);
        }
        Complex w = z - center;
        return center + radius * radius / std::conj(w);
    }
};

struct PointKey {
    std::int64_t x, y;
    bool operator==(const PointKey&) const = default;
};
struct PointKeyHash {
    std::size_t operator()(const PointKey& k) const {
        return std::hash<std::int64_t>()(k.x * 1000003 ^ k.y);
    }
};

class PointIndex {
  public:
    explicit PointIndex(double tol) : tol_(tol) {}

    // returns the id of the point within tol, or -1
    int find(Complex z) const {
        std::int64_t qx = quantize(z.real()), qy = quantize(z.imag());
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = cells_.find(PointKey{qx + dx, qy + dy});
                if (it == cells_.end()) continue;
                for (int id : it->second)
                    if (std::abs(points_[id] - z) <= tol_) return id;
            }
        return -1;
    }
    int insert(Complex z) {
        int id = static_cast<int>(points_.size());
        points_.push_back(z);
        cells_[PointKey{quantize(z.real()), quantize(z.imag())}].push_back(id);
        return id;
    }
    int find_or_insert(Complex z) {
        int id = find(z);
        return id >= 0 ? id : insert(z);
    }
    const std::vector<Complex>& points() const { return points_; }

  private:
    std::int64_t quantize(double v) const { return std::llround(v / (2 * tol_)); }
    double tol_;
    std::vector<Complex> points_;
    std::unordered_map<PointKey, std::vector<int>, PointKeyHash> cells_;
};

}  // namespace detail

inline LatticeGraph build_tiling(int p, int q, int generations) {
    if (p < 3 || q < 3) throw NotHyperbolic("build_tiling: p and q must be at least 3");
    if (1.0 / p + 1.0 / q >= 0.5)
        throw NotHyperbolic("build_tiling: 1/p + 1/q must be below 1/2");
    if (generations < 0) throw std::invalid_argument("build_tiling: negative generations");

    using detail::Complex;
    const double kp = geom::kPi / p, kq = geom::kPi / q;
    // circumradius of the face: cosh R = cot(pi/p) cot(pi/q)
    const double coshR = (std::cos(kp) / std::sin(kp)) * (std::cos(kq) / std::sin(kq));
    const double rv = std::tanh(std::acosh(coshR) / 2);

    struct Face {
        Complex center;
        std::vector<Complex> verts;
    };
    Face seed;
    seed.center = 0;
    for (int k = 0; k < p; ++k) {
        double phi = 2 * geom::kPi * k / p + geom::kPi / p;
        seed.verts.push_back(Complex(rv * std::cos(phi), rv * std::sin(phi)));
    }

    detail::PointIndex face_centers(1e-8);
    std::vector<Face> all_faces;
    std::vector<int> corona;
    auto add_face = [&](const Face& f) -> int {
        int found = face_centers.find(f.center);
        if (found >= 0) return -1;
        face_centers.insert(f.center);
        all_faces.push_back(f);
        corona.push_back(-1);
        return static_cast<int>(all_faces.size()) - 1;
    };
    add_face(seed);
    corona[0] = 0;

    detail::PointIndex vertex_index(1e-8);
    auto face_vertex_ids = [&](const Face& f) {
        std::vector<int> ids;
        for (const Complex& v : f.verts) ids.push_back(vertex_index.find_or_insert(v));
        return ids;
    };
    std::vector<std::vector<int>> face_vertices{face_vertex_ids(seed)};

    std::vector<char> vertex_inner(vertex_index.points().size(), 0);
    auto mark_vertices = [&](int face_id) {
        for (int v : face_vertices[face_id]) {
            if (v >= static_cast<int>(vertex_inner.size())) vertex_inner.resize(v + 1, 0);
            vertex_inner[v] = 1;
        }
    };
    mark_vertices(0);

    // discovered but unassigned faces
    std::vector<int> pool;
    std::vector<char> expanded{0};
    auto expand = [&](int face_id) {
        if (expanded[face_id]) return;
        expanded[face_id] = 1;
        const Face f = all_faces[face_id];  // by value: all_faces grows below
        for (int e = 0; e < p; ++e) {
            detail::DiskMirror m =
                detail::DiskMirror::through(f.verts[e], f.verts[(e + 1) % p]);
            Face g;
            g.center = m.reflect(f.center);
            for (const Complex& v : f.verts) g.verts.push_back(m.reflect(v));
            int id = add_face(g);
            if (id >= 0) {
                face_vertices.push_back(face_vertex_ids(g));
                expanded.push_back(0);
                pool.push_back(id);
            }
        }
    };

    for (int k = 1; k <= generations; ++k) {
        // vertex set of coronas <= k-1 is in vertex_inner; fixpoint over the pool
        bool changed = true;
        while (changed) {
            changed = false;
            for (int fi = 0; fi < static_cast<int>(all_faces.size()); ++fi)
                if (corona[fi] >= 0) expand(fi);
            std::vector<int> rest;
            for (int id : pool) {
                bool touches = false;
                for (int v : face_vertices[id])
                    if (v < static_cast<int>(vertex_inner.size()) && vertex_inner[v]) {
                        touches = true;
                        break;
                    }
                if (touches) {
                    corona[id] = k;
                    changed = true;
                } else {
                    rest.push_back(id);
                }
            }
            pool.swap(rest);
        }
        for (int fi = 0; fi < static_cast<int>(all_faces.size()); ++fi)
            if (corona[fi] == k) mark_vertices(fi);
    }

    // assemble the graph from assigned faces
    LatticeGraph g;
    g.kind = LatticeGraph::Kind::tessellation;
    g.p = p;
    g.q = q;
    g.generations = generations;
    std::unordered_map<int, int> vmap;  // index-space id -> graph id
    auto graph_vertex = [&](int vid, Complex z) {
        auto it = vmap.find(vid);
        if (it != vmap.end()) return it->second;
        int id = g.vertex_count();
        vmap[vid] = id;
        g.coords.push_back(ModelPoint::disk(z.real(), z.imag()));
        g.adjacency.emplace_back();
        return id;
    };
    std::unordered_map<std::int64_t, char> edge_seen;
    for (int fi = 0; fi < static_cast<int>(all_faces.size()); ++fi) {
        if (corona[fi] < 0) continue;
        std::vector<int> cyc;
        for (int e = 0; e < p; ++e)
            cyc.push_back(graph_vertex(face_vertices[fi][e], all_faces[fi].verts[e]));
        for (int e = 0; e < p; ++e) {
            int u = cyc[e], v = cyc[(e + 1) % p];
            std::int64_t key = (static_cast<std::int64_t>(std::min(u, v)) << 32) |
                               static_cast<std::uint32_t>(std::max(u, v));
            if (!edge_seen.count(key)) {
                edge_seen[key] = 1;
                g.edges.push_back({std::min(u, v), std::max(u, v)});
                g.adjacency[u].push_back(v);
                g.adjacency[v].push_back(u);
            }
        }
        g.faces.push_back(cyc);
    }

    // per-vertex generation: BFS from the seed face's vertices
    g.generation.assign(g.vertex_count(), -1);
    std::deque<int> bfs;
    for (int e = 0; e < p; ++e) {
        int id = vmap.at(face_vertices[0][e]);
        g.generation[id] = 0;
        bfs.push_back(id);
    }
    while (!bfs.empty()) {
        int u = bfs.front();
        bfs.pop_front();
        for (int v : g.adjacency[u])
            if (g.generation[v] < 0) {
                g.generation[v] = g.generation[u] + 1;
                bfs.push_back(v);
            }
    }
    g.finalize();
    return g;
}

// ---------------------------------------------------------------------------
// Cayley tree T_n: rooted planar embedding, interior degree n + 1, children
// kept in left-to-right order (descending disk angle within the sector).

inline LatticeGraph build_cayley_tree(int n, int depth) {
    if (n < 2) throw std::invalid_argument("build_cayley_tree: n must be at least 2");
    if (depth < 0) throw std::invalid_argument("build_cayley_tree: negative depth");
    LatticeGraph g;
    g.kind = LatticeGraph::Kind::tree;
    g.n = n;
    g.generations = depth;
    const double step = 1.0;  // hyperbolic edge length

    struct Slot {
        int parent;
        double lo, hi;  // angular sector
        int gen;
    };
    ModelPoint origin = ModelPoint::disk(0, 0);
    g.coords.push_back(origin);
    g.generation.push_back(0);
    g.adjacency.emplace_back();
    g.parent.push_back(-1);
    g.children.emplace_back();

    std::deque<Slot> todo;
    for (int j = n; j >= 0 && depth >= 1; --j) {
        double lo = 2 * geom::kPi * j / (n + 1);
        todo.push_back({0, lo, lo + 2 * geom::kPi / (n + 1), 1});
    }
    while (!todo.empty()) {
        Slot s = todo.front();
        todo.pop_front();
        double mid = 0.5 * (s.lo + s.hi);
        int id = g.vertex_count();
        g.coords.push_back(geom::disk_point_at(origin, mid, s.gen * step));
        g.generation.push_back(s.gen);
        g.adjacency.emplace_back();
        g.parent.push_back(s.parent);
        g.children.emplace_back();
        g.adjacency[s.parent].push_back(id);
        g.adjacency[id].push_back(s.parent);
        g.children[s.parent].push_back(id);
        g.edges.push_back({std::min(s.parent, id), std::max(s.parent, id)});
        if (s.gen < depth) {
            double width = (s.hi - s.lo) / n;
            // children enqueued left-to-right (descending sector angle); the
            // FIFO pop order makes each children list planar left-to-right
            for (int j = n - 1; j >= 0; --j)
                todo.push_back({id, s.lo + j * width, s.lo + (j + 1) * width, s.gen + 1});
        }
    }
    g.finalize();
    return g;
}

// ---------------------------------------------------------------------------
// Graph balls.

struct BoxRegion {
    const LatticeGraph* graph = nullptr;
    int center = 0;
    int radius = 0;
    std::vector<int> interior;  // distance <= radius
    std::vector<int> boundary;  // distance == radius + 1, adjacent to interior
    std::vector<int> dist;      // -1 beyond radius + 1
};

inline BoxRegion graph_ball(const LatticeGraph& g, int center, int radius) {
    if (center < 0 || center >= g.vertex_count())
        throw std::invalid_argument("graph_ball: no such vertex");
    if (radius < 0) throw std::invalid_argument("graph_ball: negative radius");
    BoxRegion box;
    box.graph = &g;
    box.center = center;
    box.radius = radius;
    box.dist.assign(g.vertex_count(), -1);
    std::deque<int> bfs{center};
    box.dist[center] = 0;
    while (!bfs.empty()) {
        int u = bfs.front();
        bfs.pop_front();
        if (box.dist[u] > radius) continue;
        for (int v : g.adjacency[u])
            if (box.dist[v] < 0) {
                box.dist[v] = box.dist[u] + 1;
                bfs.push_back(v);
            }
    }
    for (int v = 0; v < g.vertex_count(); ++v) {
        if (box.dist[v] < 0) continue;
        if (box.dist[v] <= radius) box.interior.push_back(v);
        else if (box.dist[v] == radius + 1) box.boundary.push_back(v);
    }
    // the ball is only valid if no interior vertex was truncated by the patch
    for (int v : box.interior)
        if (g.degree(v) < g.nominal_degree())
            throw RadiusExceedsGeneration("graph_ball: patch too small for this radius");
    if (box.boundary.empty() && radius >= 0 && g.vertex_count() > static_cast<int>(box.interior.size()))
        throw RadiusExceedsGeneration("graph_ball: boundary missing");
    return box;
}

// ---------------------------------------------------------------------------
// Projecting a family onto vertex signs.

struct BoundarySpinAssignment {
    std::vector<std::int8_t> sign;  // per vertex
    double applied_shift = 0.0;     // perturbation used to clear incidences
};

inline BoundarySpinAssignment assign_signs(const LatticeGraph& g,
                                           const fam::SignedGeodesicFamily& family,
                                           double incidence_tol = 1e-9) {
    const double shifts[] = {0.0, 1e-6, 2e-6, -1.5e-6};
    for (double shift : shifts) {
        fam::SignedGeodesicFamily f =
            shift == 0.0 ? family : family.transformed(geom::Isometry::translation(shift));
        bool clean = true;
        BoundarySpinAssignment out;
        out.applied_shift = shift;
        out.sign.resize(g.vertex_count());
        for (int v = 0; v < g.vertex_count() && clean; ++v) {
            ModelPoint h = geom::to_halfplane(g.coords[v]);
            if (!f.geodesics.empty() && f.distance_to_nearest_curve(h) < incidence_tol)
                clean = false;
            else
                out.sign[v] = static_cast<std::int8_t>(f.geodesics.empty() ? f.base_sign
                                                                           : f.sign_at(h));
        }
        if (clean) return out;
    }
    throw DegenerateIncidence("assign_signs: vertices persist on family geodesics");
}

// ---------------------------------------------------------------------------
// JSON: {kind, p, q or n, generations, vertices:[{x,y,gen}], edges, faces}.

inline nlohmann::json graph_to_json(const LatticeGraph& g) {
    nlohmann::json verts = nlohmann::json::array();
    for (int v = 0; v < g.vertex_count(); ++v)
        verts.push_back({{"x", g.coords[v].x}, {"y", g.coords[v].y}, {"gen", g.generation[v]}});
    nlohmann::json edges = nlohmann::json::array();
    for (auto [u, v] : g.edges) edges.push_back({u, v});
    nlohmann::json faces = nlohmann::json::array();
    for (const auto& f : g.faces) faces.push_back(f);
    nlohmann::json j{{"kind", g.kind == LatticeGraph::Kind::tessellation ? "tessellation" : "tree"},
                     {"generations", g.generations},
                     {"vertices", verts},
                     {"edges", edges},
                     {"faces", faces}};
    if (g.kind == LatticeGraph::Kind::tessellation) {
        j["p"] = g.p;
        j["q"] = g.q;
    } else {
        j["n"] = g.n;
    }
    return j;
}

inline LatticeGraph graph_from_json(const nlohmann::json& j) {
    LatticeGraph g;
    bool tess = j.at("kind").get<std::string>() == "tessellation";
    g.kind = tess ? LatticeGraph::Kind::tessellation : LatticeGraph::Kind::tree;
    g.generations = j.at("generations").get<int>();
    if (tess) {
        g.p = j.at("p").get<int>();
        g.q = j.at("q").get<int>();
    } else {
        g.n = j.at("n").get<int>();
    }
    for (const auto& v : j.at("vertices")) {
        g.coords.push_back(ModelPoint::disk(v.at("x").get<double>(), v.at("y").get<double>()));
        g.generation.push_back(v.at("gen").get<int>());
        g.adjacency.emplace_back();
    }
    for (const auto& e : j.at("edges")) {
        int u = e.at(0).get<int>(), v = e.at(1).get<int>();
        g.edges.push_back({std::min(u, v), std::max(u, v)});
        g.adjacency[u].push_back(v);
        g.adjacency[v].push_back(u);
    }
    for (const auto& f : j.at("faces")) g.faces.push_back(f.get<std::vector<int>>());
    if (!tess) {
        // rebuild parent/children from generations and planar angles
        g.parent.assign(g.vertex_count(), -1);
        g.children.assign(g.vertex_count(), {});
        for (int v = 0; v < g.vertex_count(); ++v)
            for (int w : g.adjacency[v])
                if (g.generation[w] == g.generation[v] + 1) {
                    g.parent[w] = v;
                    g.children[v].push_back(w);
                }
        for (int v = 0; v < g.vertex_count(); ++v)
            std::sort(g.children[v].begin(), g.children[v].end(), [&](int a, int b) {
                return std::atan2(g.coords[a].y, g.coords[a].x) >
                       std::atan2(g.coords[b].y, g.coords[b].x);
            });
    }
    g.finalize();
    return g;
}

}  // namespace hypising::lat
