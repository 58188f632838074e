#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include "json.hpp"

// Hyperbolic plane geometry in the upper half-plane and Poincare disk
// models: boundary points, geodesics, isometries, cross-ratios, distances,
// perpendiculars and reflections.  The half-plane is the canonical model;
// the disk is a view used for rendering and cyclic-order bookkeeping.

namespace hypising::geom {

inline constexpr double kBoundaryEps = 1e-12;  // degeneracy guard
inline constexpr double kGeomTol = 1e-9;       // geometric identity tolerance
inline constexpr double kPi = 3.14159265358979323846;

struct DegenerateQuadruple : std::runtime_error {
    explicit DegenerateQuadruple(const std::string& what) : std::runtime_error(what) {}
};
struct ModelMismatch : std::runtime_error {
    explicit ModelMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct CrossingGeodesics : std::runtime_error {
    explicit CrossingGeodesics(const std::string& what) : std::runtime_error(what) {}
};

enum class Model { halfplane, disk };

// A point of the absolute.  Half-plane: an extended real, with infinity an
// explicit flag (never a large sentinel value).  Disk: an angle in [0,2pi).
struct BoundaryPoint {
    Model model = Model::halfplane;
    double value = 0.0;
    bool infinite = false;

    static BoundaryPoint halfplane(double x) { return {Model::halfplane, x, false}; }
    static BoundaryPoint halfplane_infinity() { return {Model::halfplane, 0.0, true}; }
    static BoundaryPoint disk(double theta) {
        theta = std::fmod(theta, 2 * kPi);
        if (theta < 0) theta += 2 * kPi;
        return {Model::disk, theta, false};
    }

    friend bool operator==(const BoundaryPoint& a, const BoundaryPoint& b) {
        return a.model == b.model && a.infinite == b.infinite &&
               (a.infinite || a.value == b.value);
    }
};

// Interior point of a model domain.
struct ModelPoint {
    double x = 0.0;
    double y = 1.0;
    Model model = Model::halfplane;

    std::complex<double> z() const { return {x, y}; }
    static ModelPoint halfplane(double x, double y) { return {x, y, Model::halfplane}; }
    static ModelPoint disk(double x, double y) { return {x, y, Model::disk}; }
};

inline void require_same_model(Model a, Model b, const char* where) {
    if (a != b) throw ModelMismatch(std::string(where) + ": mixed models");
}

// ---------------------------------------------------------------------------
// Model conversion (Cayley transform w = (z - i)/(z + i)).

inline ModelPoint to_disk(const ModelPoint& p) {
    if (p.model == Model::disk) return p;
    std::complex<double> z = p.z();
    std::complex<double> w = (z - std::complex<double>(0, 1)) / (z + std::complex<double>(0, 1));
    return ModelPoint::disk(w.real(), w.imag());
}

inline ModelPoint to_halfplane(const ModelPoint& p) {
    if (p.model == Model::halfplane) return p;
    std::complex<double> w = p.z();
    std::complex<double> z =
        std::complex<double>(0, 1) * (1.0 + w) / (1.0 - w);
    return ModelPoint::halfplane(z.real(), z.imag());
}

// Angle of a boundary point on the disk circle, in [0, 2pi).  Monotone in
// the half-plane coordinate (x = -inf..inf sweeps (0, 2pi) increasing);
// infinity maps to 0.  All cyclic-order logic runs through this map.
inline double boundary_angle(const BoundaryPoint& b) {
    if (b.model == Model::disk) return b.value;
    if (b.infinite) return 0.0;
    double x = b.value;
    double theta = std::atan2(-2 * x, x * x - 1);  // arg((x-i)/(x+i))
    if (theta < 0) theta += 2 * kPi;
    if (theta >= 2 * kPi) theta -= 2 * kPi;
    return theta;
}

inline BoundaryPoint to_disk(const BoundaryPoint& b) {
    if (b.model == Model::disk) return b;
    return BoundaryPoint::disk(boundary_angle(b));
}

inline BoundaryPoint to_halfplane(const BoundaryPoint& b) {
    if (b.model == Model::halfplane) return b;
    double t = b.value;
    double s = std::sin(t / 2);
    if (std::abs(s) < 1e-154) return BoundaryPoint::halfplane_infinity();
    return BoundaryPoint::halfplane(-std::cos(t / 2) / s);
}

// Extended-real comparison with infinity greatest.
inline bool boundary_less(const BoundaryPoint& a, const BoundaryPoint& b) {
    require_same_model(a.model, b.model, "boundary_less");
    if (a.model == Model::disk) return a.value < b.value;
    if (a.infinite) return false;
    if (b.infinite) return true;
    return a.value < b.value;
}

inline bool boundary_close(const BoundaryPoint& a, const BoundaryPoint& b, double tol = kBoundaryEps) {
    if (a.model != b.model) return false;
    if (a.model == Model::halfplane) {
        if (a.infinite || b.infinite) return a.infinite && b.infinite;
        // relative separation: coordinates legitimately span many decades
        double scale = std::max(std::abs(a.value), std::abs(b.value));
        return std::abs(a.value - b.value) <= tol * scale;
    }
    double d = std::abs(a.value - b.value);
    d = std::min(d, 2 * kPi - d);
    return d <= tol;
}

// ---------------------------------------------------------------------------
// Geodesic: unordered endpoint pair, canonically oriented (half-plane:
// e1 < e2 with infinity greatest; disk: increasing angle).

struct Geodesic {
    BoundaryPoint e1, e2;

    Geodesic(BoundaryPoint a, BoundaryPoint b) : e1(a), e2(b) {
        require_same_model(a.model, b.model, "Geodesic");
        if (boundary_close(a, b))
            throw DegenerateQuadruple("Geodesic: coincident endpoints");
        if (boundary_less(e2, e1)) std::swap(e1, e2);
    }

    Model model() const { return e1.model; }
    bool has_infinite_end() const { return e1.infinite || e2.infinite; }

    static Geodesic halfplane(double a, double b) {
        return {BoundaryPoint::halfplane(a), BoundaryPoint::halfplane(b)};
    }
    static Geodesic halfplane_vertical(double a) {
        return {BoundaryPoint::halfplane(a), BoundaryPoint::halfplane_infinity()};
    }
};

inline Geodesic to_halfplane(const Geodesic& g) {
    if (g.model() == Model::halfplane) return g;
    return {to_halfplane(g.e1), to_halfplane(g.e2)};
}
inline Geodesic to_disk(const Geodesic& g) {
    if (g.model() == Model::disk) return g;
    return {to_disk(g.e1), to_disk(g.e2)};
}

// ---------------------------------------------------------------------------
// Cross-ratios.  Rbar is the literal four-point form and R = Rbar - 1; both
// evaluate the ordered quadruple, with single infinite points handled by the
// standard limit.  cross_ratio_r(g1, g2) fixes the cyclic arrangement so
// that disjoint pairs always give R > 0, with R < 1 iff the pair is "far".

namespace detail {

struct XPt {
    double v = 0.0;
    bool inf = false;
};

inline XPt xpt(const BoundaryPoint& b) {
    BoundaryPoint h = to_halfplane(b);
    return {h.value, h.infinite};
}

inline void check_distinct(const XPt* p, int n, const char* where) {
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (p[i].inf && p[j].inf)
                throw DegenerateQuadruple(std::string(where) + ": repeated infinity");
            if (p[i].inf || p[j].inf) continue;
            double scale = std::max(std::abs(p[i].v), std::abs(p[j].v));
            if (std::abs(p[i].v - p[j].v) <= kBoundaryEps * scale)
                throw DegenerateQuadruple(std::string(where) + ": coincident points");
        }
}

inline int infinite_index(const XPt* q) {
    for (int i = 0; i < 4; ++i)
        if (q[i].inf) return i;
    return -1;
}

}  // namespace detail

// Rbar(x1',x1''; x2',x2'') = ((x2'-x1')(x2''-x1'')) / ((x2'-x1'')(x2''-x1'))
inline double cross_ratio_rbar(const BoundaryPoint& x1p, const BoundaryPoint& x1pp,
                               const BoundaryPoint& x2p, const BoundaryPoint& x2pp) {
    detail::XPt q[4] = {detail::xpt(x1p), detail::xpt(x1pp), detail::xpt(x2p), detail::xpt(x2pp)};
    detail::check_distinct(q, 4, "cross_ratio_rbar");
    double a = q[0].v, b = q[1].v, c = q[2].v, d = q[3].v;
    switch (detail::infinite_index(q)) {
        case -1: return ((c - a) * (d - b)) / ((c - b) * (d - a));
        case 0: return (d - b) / (c - b);   // x1' at infinity
        case 1: return (c - a) / (d - a);   // x1''
        case 2: return (d - b) / (d - a);   // x2'
        default: return (c - a) / (c - b);  // x2''
    }
}

// R(x1',x1''; x2',x2'') = -((x1''-x1')(x2''-x2')) / ((x1''-x2')(x2''-x1'))
inline double cross_ratio_r_quadruple(const BoundaryPoint& x1p, const BoundaryPoint& x1pp,
                                      const BoundaryPoint& x2p, const BoundaryPoint& x2pp) {
    detail::XPt q[4] = {detail::xpt(x1p), detail::xpt(x1pp), detail::xpt(x2p), detail::xpt(x2pp)};
    detail::check_distinct(q, 4, "cross_ratio_r");
    double a = q[0].v, b = q[1].v, c = q[2].v, d = q[3].v;
    switch (detail::infinite_index(q)) {
        case -1: return -((b - a) * (d - c)) / ((b - c) * (d - a));
        case 0: return -(d - c) / (b - c);   // x1' at infinity
        case 1: return -(d - c) / (d - a);   // x1''
        case 2: return -(b - a) / (d - a);   // x2'
        default: return -(b - a) / (b - c);  // x2''
    }
}

// Counterclockwise offset of angle t from angle start, in [0, 2pi).
inline double ccw_offset(double start, double t) {
    double o = t - start;
    while (o < 0) o += 2 * kPi;
    while (o >= 2 * kPi) o -= 2 * kPi;
    return o;
}

// Cyclic-order predicate on the absolute: does p come strictly before q when
// traveling counterclockwise from start?  Counterclockwise order is
// increasing extended reals (infinity greatest), evaluated exactly; angle
// arithmetic would round off near the wrap.
inline bool cyclic_before(const BoundaryPoint& start, const BoundaryPoint& p,
                          const BoundaryPoint& q) {
    BoundaryPoint s = to_halfplane(start), a = to_halfplane(p), b = to_halfplane(q);
    int lap_a = boundary_less(s, a) ? 0 : 1;
    int lap_b = boundary_less(s, b) ? 0 : 1;
    if (lap_a != lap_b) return lap_a < lap_b;
    return boundary_less(a, b);
}

// Do the endpoint pairs interleave on the absolute (i.e. the geodesics cross)?
inline bool geodesics_cross(const Geodesic& g1, const Geodesic& g2) {
    bool in1 = cyclic_before(g1.e1, g2.e1, g1.e2);
    bool in2 = cyclic_before(g1.e1, g2.e2, g1.e2);
    return in1 != in2;
}

inline bool same_geodesic(const Geodesic& g1, const Geodesic& g2, double tol = kBoundaryEps) {
    Geodesic a = to_halfplane(g1), b = to_halfplane(g2);
    return boundary_close(a.e1, b.e1, tol) && boundary_close(a.e2, b.e2, tol);
}

// Endpoints of a disjoint pair arranged in cyclic (ccw) order p1 p2 q1 q2.
inline std::array<BoundaryPoint, 4> canonical_quadruple(const Geodesic& g1, const Geodesic& g2) {
    BoundaryPoint p1 = g1.e1, p2 = g1.e2, q1 = g2.e1, q2 = g2.e2;
    if (cyclic_before(p1, q1, p2)) std::swap(p1, p2);
    if (cyclic_before(p1, q2, q1)) std::swap(q1, q2);
    return {p1, p2, q1, q2};
}

inline double cross_ratio_r(const Geodesic& g1, const Geodesic& g2) {
    require_same_model(g1.model(), g2.model(), "cross_ratio_r");
    if (geodesics_cross(g1, g2))
        return cross_ratio_r_quadruple(g1.e1, g1.e2, g2.e1, g2.e2);
    auto q = canonical_quadruple(g1, g2);
    return cross_ratio_r_quadruple(q[0], q[1], q[2], q[3]);
}

// ---------------------------------------------------------------------------
// Isometries: real Moebius maps z -> (az+b)/(cz+d) of the upper half-plane,
// normalized to det 1; `reflecting` composes with z -> -conj(z) first.

struct Isometry {
    double a = 1, b = 0, c = 0, d = 1;
    bool reflecting = false;

    Isometry() = default;
    Isometry(double a_, double b_, double c_, double d_, bool refl = false)
        : a(a_), b(b_), c(c_), d(d_), reflecting(refl) {
        double det = a * d - b * c;
        if (det <= 0) throw std::invalid_argument("Isometry: determinant must be positive");
        double s = std::sqrt(det);
        a /= s; b /= s; c /= s; d /= s;
    }

    static Isometry identity() { return {}; }
    static Isometry translation(double t) { return {1, t, 0, 1}; }
    static Isometry dilation(double lambda) { return {lambda, 0, 0, 1}; }
    static Isometry rotation_about_i(double phi) {
        return {std::cos(phi / 2), std::sin(phi / 2), -std::sin(phi / 2), std::cos(phi / 2)};
    }

    Isometry inverse() const {
        if (!reflecting) return {d, -b, -c, a};
        return {d, b, c, a, true};
    }

    // Composition: result(z) = (*this)(other(z)).
    Isometry compose(const Isometry& other) const {
        double oa = other.a, ob = other.b, oc = other.c, od = other.d;
        bool refl = reflecting != other.reflecting;
        if (reflecting) { ob = -ob; oc = -oc; }
        return {a * oa + b * oc, a * ob + b * od, c * oa + d * oc, c * ob + d * od, refl};
    }

    BoundaryPoint apply(const BoundaryPoint& p) const {
        BoundaryPoint h = to_halfplane(p);
        BoundaryPoint out = BoundaryPoint::halfplane(0);
        if (h.infinite) {
            out = std::abs(c) < 1e-300 ? BoundaryPoint::halfplane_infinity()
                                       : BoundaryPoint::halfplane(a / c);
        } else {
            double x = reflecting ? -h.value : h.value;
            double den = c * x + d;
            if (std::abs(den) <= 1e-300 * std::max(1.0, std::abs(a * x + b)))
                out = BoundaryPoint::halfplane_infinity();
            else
                out = BoundaryPoint::halfplane((a * x + b) / den);
        }
        return p.model == Model::disk ? to_disk(out) : out;
    }

    ModelPoint apply(const ModelPoint& p) const {
        ModelPoint h = to_halfplane(p);
        std::complex<double> z = h.z();
        if (reflecting) z = -std::conj(z);
        std::complex<double> w = (a * z + b) / (c * z + d);
        ModelPoint out = ModelPoint::halfplane(w.real(), w.imag());
        return p.model == Model::disk ? to_disk(out) : out;
    }

    Geodesic apply(const Geodesic& g) const { return {apply(g.e1), apply(g.e2)}; }
};

// Isometry sending g to the imaginary axis (e1 -> 0, e2 -> infinity).
inline Isometry map_to_axis(const Geodesic& g) {
    Geodesic h = to_halfplane(g);
    if (h.e2.infinite) return Isometry::translation(-h.e1.value);
    double a = h.e1.value, b = h.e2.value;  // a < b
    return {1, -a, -1, b};
}

// ---------------------------------------------------------------------------
// Distances.

inline double point_distance(const ModelPoint& p, const ModelPoint& q) {
    require_same_model(p.model, q.model, "point_distance");
    ModelPoint a = to_halfplane(p), b = to_halfplane(q);
    if (a.y <= 0 || b.y <= 0) throw std::invalid_argument("point_distance: point not interior");
    double dx = a.x - b.x, dy = a.y - b.y;
    double s2 = (dx * dx + dy * dy) / (4 * a.y * b.y);
    return 2 * std::asinh(std::sqrt(s2));
}

struct DistanceResult {
    double value = 0.0;
    bool crossing = false;
};

// Infimum distance between two complete geodesics; crossing pairs give a
// flagged zero rather than an error.
inline DistanceResult geodesic_distance(const Geodesic& g1, const Geodesic& g2) {
    require_same_model(g1.model(), g2.model(), "geodesic_distance");
    if (same_geodesic(g1, g2)) return {0.0, false};
    if (geodesics_cross(g1, g2)) return {0.0, true};
    double r = cross_ratio_r(g1, g2);
    if (r <= 0) return {0.0, true};  // shared-endpoint limit
    return {2 * std::asinh(1 / std::sqrt(r)), false};
}

// Distance unit: the distance of a disjoint pair with cross-ratio R = 1,
// evaluated once from such a pair and cached.
inline double scale_distance_unit() {
    static const double d0 = [] {
        double k = 3 + 2 * std::sqrt(2.0);  // concentric pair with radii 1, k has R = 1
        return geodesic_distance(Geodesic::halfplane(-1, 1), Geodesic::halfplane(-k, k)).value;
    }();
    return d0;
}

inline DistanceResult scaled_distance(const Geodesic& g1, const Geodesic& g2) {
    DistanceResult r = geodesic_distance(g1, g2);
    return {r.value / scale_distance_unit(), r.crossing};
}

// ---------------------------------------------------------------------------
// Reflections (circle inversion in the mirror's defining circle).

inline BoundaryPoint reflect_boundary(const BoundaryPoint& p, const Geodesic& mirror) {
    Geodesic m = to_halfplane(mirror);
    BoundaryPoint h = to_halfplane(p);
    BoundaryPoint out = BoundaryPoint::halfplane(0);
    if (m.e2.infinite) {
        double c = m.e1.value;  // vertical mirror x = c
        out = h.infinite ? BoundaryPoint::halfplane_infinity()
                         : BoundaryPoint::halfplane(2 * c - h.value);
    } else {
        double c = 0.5 * (m.e1.value + m.e2.value);
        double r = 0.5 * (m.e2.value - m.e1.value);
        if (h.infinite)
            out = BoundaryPoint::halfplane(c);
        else if (std::abs(h.value - c) < 1e-300)
            out = BoundaryPoint::halfplane_infinity();
        else
            out = BoundaryPoint::halfplane(c + r * r / (h.value - c));
    }
    return p.model == Model::disk ? to_disk(out) : out;
}

inline ModelPoint reflect_point(const ModelPoint& p, const Geodesic& mirror) {
    Geodesic m = to_halfplane(mirror);
    ModelPoint h = to_halfplane(p);
    ModelPoint out = h;
    if (m.e2.infinite) {
        out.x = 2 * m.e1.value - h.x;
    } else {
        double c = 0.5 * (m.e1.value + m.e2.value);
        double r = 0.5 * (m.e2.value - m.e1.value);
        std::complex<double> z = h.z() - c;
        std::complex<double> w = r * r / std::conj(z);
        out.x = c + w.real();
        out.y = w.imag();
    }
    return p.model == Model::disk ? to_disk(out) : out;
}

inline Geodesic reflect_geodesic(const Geodesic& g, const Geodesic& mirror) {
    require_same_model(g.model(), mirror.model(), "reflect_geodesic");
    return {reflect_boundary(g.e1, mirror), reflect_boundary(g.e2, mirror)};
}

// ---------------------------------------------------------------------------
// Perpendiculars, feet, closest points.

// Point at arc-length parameter t on g (t = 0 at the preimage of (0,1)
// under the axis map).
inline ModelPoint point_on_geodesic(const Geodesic& g, double t) {
    Isometry m = map_to_axis(g);
    ModelPoint p = m.inverse().apply(ModelPoint::halfplane(0, std::exp(t)));
    return g.model() == Model::disk ? to_disk(p) : p;
}

inline ModelPoint closest_point(const Geodesic& g, const ModelPoint& p) {
    Isometry m = map_to_axis(g);
    ModelPoint w = m.apply(to_halfplane(p));
    ModelPoint foot = m.inverse().apply(ModelPoint::halfplane(0, std::hypot(w.x, w.y)));
    return p.model == Model::disk ? to_disk(foot) : foot;
}

inline double point_to_geodesic_distance(const ModelPoint& p, const Geodesic& g) {
    Isometry m = map_to_axis(g);
    ModelPoint w = m.apply(to_halfplane(p));
    return std::asinh(std::abs(w.x) / w.y);
}

// Geodesic through two interior points (circle centered on the real axis).
inline Geodesic geodesic_through(const ModelPoint& p, const ModelPoint& q) {
    ModelPoint a = to_halfplane(p), b = to_halfplane(q);
    double scale = std::max({1.0, std::abs(a.x), std::abs(b.x)});
    if (std::abs(a.x - b.x) <= 1e-13 * scale)
        return Geodesic::halfplane_vertical(0.5 * (a.x + b.x));
    double c = (b.x * b.x + b.y * b.y - a.x * a.x - a.y * a.y) / (2 * (b.x - a.x));
    double r = std::hypot(a.x - c, a.y);
    Geodesic out = Geodesic::halfplane(c - r, c + r);
    return p.model == Model::disk ? to_disk(out) : out;
}

// Unique geodesic through p meeting g orthogonally (direct circle algebra;
// conjugation to the axis is avoided because boundary preimages are unstable
// near the map's pole).
inline Geodesic perpendicular_through(const ModelPoint& p, const Geodesic& g) {
    Geodesic h = to_halfplane(g);
    ModelPoint w = to_halfplane(p);
    Geodesic out = [&]() -> Geodesic {
        if (h.e2.infinite) {
            double a = h.e1.value;
            double rho = std::hypot(w.x - a, w.y);
            return Geodesic::halfplane(a - rho, a + rho);
        }
        double m = 0.5 * (h.e1.value + h.e2.value);
        double r = 0.5 * (h.e2.value - h.e1.value);
        double scale = std::max({1.0, std::abs(m), r});
        if (std::abs(w.x - m) <= 1e-13 * scale) return Geodesic::halfplane_vertical(m);
        double mp = (r * r + w.x * w.x + w.y * w.y - m * m) / (2 * (w.x - m));
        double rp = std::hypot(w.x - mp, w.y);
        return Geodesic::halfplane(mp - rp, mp + rp);
    }();
    return g.model() == Model::disk ? to_disk(out) : out;
}

struct CommonPerpendicular {
    Geodesic perpendicular;
    ModelPoint foot1, foot2;  // feet on g1 and g2
};

inline CommonPerpendicular common_perpendicular(const Geodesic& g1, const Geodesic& g2) {
    require_same_model(g1.model(), g2.model(), "common_perpendicular");
    if (geodesics_cross(g1, g2))
        throw CrossingGeodesics("common_perpendicular: endpoints interleave");
    Isometry m = map_to_axis(to_halfplane(g1));
    Geodesic h2 = m.apply(to_halfplane(g2));
    if (h2.e2.infinite || h2.e1.value * h2.e2.value <= 0)
        throw CrossingGeodesics("common_perpendicular: geodesics touch at the absolute");
    double a = h2.e1.value, b = h2.e2.value;
    double rho = std::sqrt(a * b);  // radius of the circle orthogonal to both
    Isometry inv = m.inverse();
    // feet are interior points; map them back stably and rebuild the
    // perpendicular through them rather than through boundary preimages
    ModelPoint f1 = inv.apply(ModelPoint::halfplane(0, rho));
    double c = 0.5 * (a + b);
    double x = (a * b) / c;  // |z|^2 = ab intersected with the circle over (a,b)
    double y2 = a * b - x * x;
    ModelPoint f2 = inv.apply(ModelPoint::halfplane(x, std::sqrt(std::max(y2, 0.0))));
    Geodesic perp = geodesic_through(f1, f2);
    if (g1.model() == Model::disk) return {to_disk(perp), to_disk(f1), to_disk(f2)};
    return {perp, f1, f2};
}

// ---------------------------------------------------------------------------
// Small helpers used by constructions and sampling.

// Side test: is p on the side of g whose ideal boundary is the ccw arc from
// angle(e1) to angle(e2)?  For a finite semicircle that is the bounded lens
// under the arc; for a vertical line (a, inf) it is the half-plane x > a.
inline bool on_lens_side(const Geodesic& g, const ModelPoint& p) {
    Geodesic h = to_halfplane(g);
    ModelPoint w = to_halfplane(p);
    if (h.e2.infinite) return w.x > h.e1.value;
    double c = 0.5 * (h.e1.value + h.e2.value);
    double r = 0.5 * (h.e2.value - h.e1.value);
    double dx = w.x - c;
    return dx * dx + w.y * w.y < r * r;
}

inline bool separates(const Geodesic& g, const ModelPoint& p, const ModelPoint& q) {
    return on_lens_side(g, p) != on_lens_side(g, q);
}

inline ModelPoint hyperbolic_midpoint(const ModelPoint& p, const ModelPoint& q) {
    ModelPoint a = to_halfplane(p), b = to_halfplane(q);
    Isometry m = map_to_axis(geodesic_through(a, b));
    double ta = std::log(m.apply(a).y);
    double tb = std::log(m.apply(b).y);
    ModelPoint mid = m.inverse().apply(ModelPoint::halfplane(0, std::exp(0.5 * (ta + tb))));
    return p.model == Model::disk ? to_disk(mid) : mid;
}

// Point at hyperbolic distance r from `center` in disk-direction phi.
inline ModelPoint disk_point_at(const ModelPoint& center, double phi, double r) {
    ModelPoint c = to_disk(center);
    double rho = std::tanh(r / 2);
    std::complex<double> w(rho * std::cos(phi), rho * std::sin(phi));
    std::complex<double> z0(c.x, c.y);
    std::complex<double> out = (w + z0) / (1.0 + std::conj(z0) * w);
    ModelPoint p = ModelPoint::disk(out.real(), out.imag());
    return center.model == Model::halfplane ? to_halfplane(p) : p;
}

// ---------------------------------------------------------------------------
// JSON serialization: {model, e1, e2}, infinity encoded as "inf".

inline nlohmann::json boundary_to_json(const BoundaryPoint& b) {
    if (b.model == Model::halfplane && b.infinite) return "inf";
    return b.value;
}

inline BoundaryPoint boundary_from_json(const nlohmann::json& j, Model model) {
    if (j.is_string()) {
        if (j.get<std::string>() != "inf")
            throw std::invalid_argument("boundary_from_json: bad token");
        return BoundaryPoint::halfplane_infinity();
    }
    double v = j.get<double>();
    return model == Model::halfplane ? BoundaryPoint::halfplane(v) : BoundaryPoint::disk(v);
}

inline nlohmann::json geodesic_to_json(const Geodesic& g) {
    return nlohmann::json{{"model", g.model() == Model::halfplane ? "halfplane" : "disk"},
                          {"e1", boundary_to_json(g.e1)},
                          {"e2", boundary_to_json(g.e2)}};
}

inline Geodesic geodesic_from_json(const nlohmann::json& j) {
    Model m = j.at("model").get<std::string>() == "disk" ? Model::disk : Model::halfplane;
    return Geodesic(boundary_from_json(j.at("e1"), m), boundary_from_json(j.at("e2"), m));
}

}  // namespace hypising::geom
