#pragma once

#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include "hypising/families.hpp"
#include "hypising/geometry.hpp"
#include "hypising/tiling.hpp"
#include "hypising/treestates.hpp"

// Poincare-disk SVG scenes: geodesics as circular arcs, chess-board region
// tints, lattice edges, spins and coverings.

namespace hypising::svg {

using geom::Geodesic;
using geom::ModelPoint;

class DiskScene {
  public:
    explicit DiskScene(int size = 800) : size_(size), c_(size / 2.0), s_(size / 2.0 - 10.0) {}

    void add_disk(const std::string& fill = "none") {
        body_ << "<circle cx=\"" << c_ << "\" cy=\"" << c_ << "\" r=\"" << s_ << "\" fill=\""
              << fill << "\" stroke=\"#222\" stroke-width=\"1.5\"/>\n";
    }

    void add_geodesic(const Geodesic& g, const std::string& stroke = "#333",
                      double width = 1.2) {
        body_ << "<path d=\"" << geodesic_path(g) << "\" fill=\"none\" stroke=\"" << stroke
              << "\" stroke-width=\"" << width << "\" class=\"geodesic\"/>\n";
    }

    // fill the side of g whose ideal boundary is the ccw arc e1 -> e2 (the
    // lens side) or its complement
    void add_region(const Geodesic& g, bool lens_side, const std::string& fill) {
        Geodesic d = geom::to_disk(g);
        double t1 = d.e1.value, t2 = d.e2.value;
        auto [x1, y1] = to_px(std::cos(t1), std::sin(t1));
        auto [x2, y2] = to_px(std::cos(t2), std::sin(t2));
        double span = t2 - t1;  // ccw ideal arc of the lens side
        if (span < 0) span += 2 * geom::kPi;
        bool large = lens_side ? span > geom::kPi : (2 * geom::kPi - span) > geom::kPi;
        // path: geodesic arc from P1 to P2, then along the absolute back to P1
        std::ostringstream p;
        if (lens_side) {
            p << "M" << x1 << ' ' << y1 << ' ' << geodesic_arc_from(g, /*from_e1=*/true)
              << " A" << s_ << ' ' << s_ << " 0 " << (large ? 1 : 0) << ' ' << 1 << ' ' << x1
              << ' ' << y1;
        } else {
            p << "M" << x2 << ' ' << y2 << ' ' << geodesic_arc_from(g, /*from_e1=*/false)
              << " A" << s_ << ' ' << s_ << " 0 " << (large ? 1 : 0) << ' ' << 0 << ' ' << x2
              << ' ' << y2;
        }
        body_ << "<path d=\"" << p.str() << "\" fill=\"" << fill
              << "\" stroke=\"none\" class=\"region\"/>\n";
    }

    void add_point(const ModelPoint& p, double radius_px, const std::string& fill) {
        ModelPoint d = geom::to_disk(p);
        auto [x, y] = to_px(d.x, d.y);
        body_ << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"" << radius_px
              << "\" fill=\"" << fill << "\"/>\n";
    }

    void add_segment(const ModelPoint& a, const ModelPoint& b, const std::string& stroke,
                     double width = 0.8) {
        ModelPoint da = geom::to_disk(a), db = geom::to_disk(b);
        auto [x1, y1] = to_px(da.x, da.y);
        auto [x2, y2] = to_px(db.x, db.y);
        body_ << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2
              << "\" stroke=\"" << stroke << "\" stroke-width=\"" << width << "\"/>\n";
    }

    std::string str() const {
        std::ostringstream out;
        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size_ << "\" height=\""
            << size_ << "\" viewBox=\"0 0 " << size_ << ' ' << size_ << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << body_.str() << "</svg>\n";
        return out.str();
    }

  private:
    std::pair<double, double> to_px(double x, double y) const {
        return {c_ + s_ * x, c_ - s_ * y};  // y up
    }

    // arc of the geodesic from one ideal endpoint to the other
    std::string geodesic_arc_from(const Geodesic& g, bool from_e1) const {
        Geodesic d = geom::to_disk(g);
        double t1 = d.e1.value, t2 = d.e2.value;
        if (!from_e1) std::swap(t1, t2);
        std::complex<double> u(std::cos(t1), std::sin(t1)), v(std::cos(t2), std::sin(t2));
        auto [x2, y2] = to_px(v.real(), v.imag());
        std::ostringstream p;
        std::complex<double> sum = u + v;
        if (std::abs(sum) < 1e-9) {  // diameter
            p << "L" << x2 << ' ' << y2;
            return p.str();
        }
        std::complex<double> cc = 2.0 * sum / std::norm(sum);
        double r = std::sqrt(std::max(std::norm(cc) - 1.0, 0.0));
        double a1 = std::arg(u - cc), a2 = std::arg(v - cc);
        double delta = a2 - a1;
        while (delta > geom::kPi) delta -= 2 * geom::kPi;
        while (delta < -geom::kPi) delta += 2 * geom::kPi;
        int sweep = delta > 0 ? 0 : 1;  // y-flip reverses orientation
        p << "A" << r * s_ << ' ' << r * s_ << " 0 0 " << sweep << ' ' << x2 << ' ' << y2;
        return p.str();
    }

    std::string geodesic_path(const Geodesic& g) const {
        Geodesic d = geom::to_disk(g);
        auto [x1, y1] = to_px(std::cos(d.e1.value), std::sin(d.e1.value));
        std::ostringstream p;
        p << "M" << x1 << ' ' << y1 << ' ' << geodesic_arc_from(g, true);
        return p.str();
    }

    int size_;
    double c_, s_;
    std::ostringstream body_;
};

// ---------------------------------------------------------------------------
// Scene builders.

inline std::string render_family(const fam::SignedGeodesicFamily& f) {
    DiskScene scene;
    // base tint covers the disk; deeper regions repaint their far side
    scene.add_disk(f.base_sign > 0 ? "#f5e0c3" : "#c6d8ef");
    struct Item {
        int idx;
        int depth;
        bool lens_away;
    };
    std::vector<Item> items;
    for (int i = 0; i < static_cast<int>(f.geodesics.size()); ++i) {
        Geodesic h = geom::to_halfplane(f.geodesics[i]);
        // curves beyond sub-pixel angular separation are invisible; skip them
        try {
            geom::to_disk(h);
        } catch (const geom::DegenerateQuadruple&) {
            continue;
        }
        bool lens_away = !geom::on_lens_side(h, f.base_point);
        int depth = 0;
        for (int j = 0; j < static_cast<int>(f.geodesics.size()); ++j) {
            if (i == j) continue;
            Geodesic hj = geom::to_halfplane(f.geodesics[j]);
            bool away_j = !geom::on_lens_side(hj, f.base_point);
            // does j's away side contain curve i?
            bool c1 = geom::cyclic_before(hj.e1, h.e1, hj.e2);
            bool c2 = geom::cyclic_before(hj.e1, h.e2, hj.e2);
            bool inside_lens = c1 && c2;
            if (inside_lens == away_j) ++depth;
        }
        items.push_back({i, depth, lens_away});
    }
    std::sort(items.begin(), items.end(),
              [](const Item& a, const Item& b) { return a.depth < b.depth; });
    for (const Item& it : items) {
        int sign = (it.depth + 1) % 2 == 0 ? f.base_sign : -f.base_sign;
        scene.add_region(f.geodesics[it.idx], it.lens_away, sign > 0 ? "#f5e0c3" : "#c6d8ef");
    }
    for (const Item& it : items) scene.add_geodesic(f.geodesics[it.idx]);
    scene.add_disk("none");
    return scene.str();
}

inline std::string render_graph(const lat::LatticeGraph& g,
                                const std::vector<std::int8_t>* spins = nullptr) {
    DiskScene scene;
    scene.add_disk();
    for (auto [u, v] : g.edges) scene.add_segment(g.coords[u], g.coords[v], "#999", 0.6);
    if (spins) {
        for (int v = 0; v < g.vertex_count(); ++v)
            scene.add_point(g.coords[v], 2.0, (*spins)[v] > 0 ? "#c23b21" : "#2155a3");
    } else {
        for (int v = 0; v < g.vertex_count(); ++v) scene.add_point(g.coords[v], 1.5, "#444");
    }
    return scene.str();
}

inline std::string render_covering(const lat::LatticeGraph& g, const tree::Covering& cov,
                                   const tree::DimerSet& d) {
    DiskScene scene;
    scene.add_disk();
    const char* palette[] = {"#7db1e8", "#e8a87d", "#9fd6a0", "#d6a0cf", "#c9c97d", "#7dc9c9"};
    for (std::size_t ci = 0; ci < cov.chains.size(); ++ci) {
        const auto& vs = cov.chains[ci].vertices;
        for (std::size_t i = 0; i + 1 < vs.size(); ++i)
            scene.add_segment(g.coords[vs[i]], g.coords[vs[i + 1]], palette[ci % 6], 1.6);
    }
    for (auto [u, v] : g.edges) scene.add_segment(g.coords[u], g.coords[v], "#bbb", 0.3);
    for (auto [u, v] : d.dimers) scene.add_segment(g.coords[u], g.coords[v], "#111", 2.5);
    std::vector<std::int8_t> sigma = tree::sigma_from_dimers(g, d, +1);
    for (int v = 0; v < g.vertex_count(); ++v)
        scene.add_point(g.coords[v], 2.0, sigma[v] > 0 ? "#c23b21" : "#2155a3");
    return scene.str();
}

}  // namespace hypising::svg
