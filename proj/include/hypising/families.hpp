#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypising/geometry.hpp"

// Signed geodesic families: the two inductive constructions, the pairwise
// cross-ratio verifier, surgery length increments, wrong-pairing surplus,
// density sampling and the semicircle decay profile.

namespace hypising::fam {

using geom::BoundaryPoint;
using geom::Geodesic;
using geom::Isometry;
using geom::Model;
using geom::ModelPoint;

struct ParameterOutOfRange : std::runtime_error {
    explicit ParameterOutOfRange(const std::string& w) : std::runtime_error(w) {}
};
struct ConvergenceFailure : std::runtime_error {
    explicit ConvergenceFailure(const std::string& w) : std::runtime_error(w) {}
};
struct NoSolution : std::runtime_error {
    explicit NoSolution(const std::string& w) : std::runtime_error(w) {}
};
struct MalformedSpec : std::runtime_error {
    explicit MalformedSpec(const std::string& w) : std::runtime_error(w) {}
};
struct EmptyFamily : std::runtime_error {
    explicit EmptyFamily(const std::string& w) : std::runtime_error(w) {}
};
struct HypothesisViolated : std::runtime_error {
    explicit HypothesisViolated(const std::string& w) : std::runtime_error(w) {}
};

// ---------------------------------------------------------------------------
// Arcs of the absolute, oriented clockwise (decreasing boundary angle).

struct BoundaryArc {
    BoundaryPoint from, to;

    double from_angle() const { return geom::boundary_angle(from); }
    double span() const {  // clockwise width in (0, 2pi)
        double s = from_angle() - geom::boundary_angle(to);
        while (s <= 0) s += 2 * geom::kPi;
        while (s > 2 * geom::kPi) s -= 2 * geom::kPi;
        return s;
    }
    double angle_at(double s) const {  // s in (0,1), clockwise interpolation
        double t = from_angle() - s * span();
        while (t < 0) t += 2 * geom::kPi;
        return t;
    }
    bool contains_angle(double theta) const {
        double off = from_angle() - theta;
        while (off < 0) off += 2 * geom::kPi;
        while (off >= 2 * geom::kPi) off -= 2 * geom::kPi;
        return off > 0 && off < span();
    }
    double midpoint_angle() const { return angle_at(0.5); }
};

inline BoundaryPoint boundary_at_angle(double theta) {
    return geom::to_halfplane(BoundaryPoint::disk(theta));
}

// ---------------------------------------------------------------------------
// Family parameters and the signed family itself.

struct FamilyParams {
    double alpha = 0.05;
    double eta = 0.05;
    int depth_or_steps = 1;
};

inline void validate_params(double alpha, double eta) {
    if (!(alpha > 0 && alpha < 1) || !(eta > 0 && eta < 1))
        throw ParameterOutOfRange("family parameters must lie in (0,1)");
    if (alpha > 0.2 || eta > 0.2)
        std::cerr << "warning: family parameter above 0.2; constructions assume small values\n";
}

// Chess-board signed family.  The sign of a point is the base sign flipped
// once for every family geodesic separating the point from the base point.
struct SignedGeodesicFamily {
    FamilyParams params;
    std::vector<Geodesic> geodesics;  // half-plane model, construction order
    ModelPoint base_point = ModelPoint::halfplane(0, 1);
    int base_sign = +1;
    std::string construction = "c1";
    std::optional<BoundaryArc> seed_arc;  // construction 2 selected-arc state

    int sign_at(const ModelPoint& p) const {
        ModelPoint h = geom::to_halfplane(p);
        int parity = 0;
        for (const Geodesic& g : geodesics)
            if (geom::separates(g, h, base_point)) parity ^= 1;
        return parity ? -base_sign : base_sign;
    }

    double distance_to_nearest_curve(const ModelPoint& p) const {
        ModelPoint h = geom::to_halfplane(p);
        double best = std::numeric_limits<double>::infinity();
        for (const Geodesic& g : geodesics)
            best = std::min(best, geom::point_to_geodesic_distance(h, g));
        return best;
    }

    SignedGeodesicFamily transformed(const Isometry& m) const {
        SignedGeodesicFamily out = *this;
        for (Geodesic& g : out.geodesics) g = m.apply(g);
        out.base_point = m.apply(base_point);
        if (out.seed_arc)
            out.seed_arc = BoundaryArc{m.apply(out.seed_arc->from), m.apply(out.seed_arc->to)};
        return out;
    }

    // Sign of the region whose ideal boundary contains the arc.
    int sign_of_arc_region(const BoundaryArc& arc) const {
        double mid = arc.midpoint_angle();
        int parity = 0;
        for (const Geodesic& g : geodesics) {
            Geodesic h = geom::to_halfplane(g);
            BoundaryArc lens{h.e2, h.e1};  // clockwise from e2 to e1 = ccw e1..e2
            bool arc_on_lens = lens.contains_angle(mid);
            if (arc_on_lens != geom::on_lens_side(h, base_point)) parity ^= 1;
        }
        return parity ? -base_sign : base_sign;
    }
};

// Separation of a disjoint pair with cross-ratio R = alpha.
inline double distance_for_cross_ratio(double alpha) { return 2 * std::asinh(1 / std::sqrt(alpha)); }

// ---------------------------------------------------------------------------
// Root solvers for endpoint placement.  Solvers conjugate the host arc to
// the positive real half-line (arc.from -> infinity, arc.to -> 0) and work
// in log coordinates there; angle-space parameterizations lose all precision
// once an arc sinks deeply into a cusp.

namespace detail {

// Isometry sending arc.from to infinity and arc.to to 0.  The clockwise arc
// interior then maps onto the positive reals.
inline Isometry frame_for_arc(const BoundaryArc& arc) {
    BoundaryPoint f = geom::to_halfplane(arc.from), t = geom::to_halfplane(arc.to);
    if (f.infinite) return Isometry::translation(-t.value);
    if (t.infinite) return Isometry(0, 1, -1, f.value);  // z -> 1/(f - z)
    if (f.value > t.value) return Isometry(1, -t.value, -1, f.value);
    return Isometry(1, -t.value, 1, -f.value);
}

inline double candidate_r(double u, double v, const Geodesic& g) {
    try {
        Geodesic cand(BoundaryPoint::halfplane(u), BoundaryPoint::halfplane(v));
        return geom::cross_ratio_r(cand, g);
    } catch (const geom::DegenerateQuadruple&) {
        return 0.0;  // vanishing candidate: infinitely far
    }
}

constexpr double kLogSpan = 280.0;  // log-coordinate search window

}  // namespace detail

// Place (u, v) inside `arc` with R((u,v), g_from) = R((u,v), g_to) = a.
// The arc runs clockwise from an endpoint of g_from to an endpoint of g_to
// and contains no other family endpoints.
inline Geodesic solve_double_crossratio(const Geodesic& g_from, const Geodesic& g_to,
                                        double a, const BoundaryArc& arc) {
    if (!(a > 0 && a < 1)) throw ParameterOutOfRange("solve_double_crossratio: a outside (0,1)");
    Isometry w = detail::frame_for_arc(arc);
    // endpoints equal to an arc end map to the frame's 0 / infinity exactly;
    // numeric pole cancellation cannot be trusted that far
    auto frame_image = [&](const Geodesic& g) {
        auto map_end = [&](const BoundaryPoint& e) {
            if (geom::boundary_close(e, geom::to_halfplane(arc.from)))
                return BoundaryPoint::halfplane_infinity();
            if (geom::boundary_close(e, geom::to_halfplane(arc.to)))
                return BoundaryPoint::halfplane(0);
            return w.apply(e);
        };
        Geodesic h = geom::to_halfplane(g);
        return Geodesic(map_end(h.e1), map_end(h.e2));
    };
    Geodesic gf = frame_image(g_from);
    Geodesic gt = frame_image(g_to);
    const double S = detail::kLogSpan;

    auto v_for_u = [&](double su) -> double {
        // R((u,v), gt) grows without bound as v approaches the arc's 0-end
        double lo = -S, hi = su;
        for (int i = 0; i < 110; ++i) {
            double mid = 0.5 * (lo + hi);
            double r = detail::candidate_r(std::exp(su), std::exp(mid), gt);
            if (r > a) lo = mid; else hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    auto residual = [&](double su) {
        double sv = v_for_u(su);
        return detail::candidate_r(std::exp(su), std::exp(sv), gf) - a;
    };
    double lo = -S, hi = S;
    if (!(residual(hi) > 0) || !(residual(lo) < 0))
        throw NoSolution("solve_double_crossratio: conditions cannot be bracketed in the arc");
    for (int i = 0; i < 110; ++i) {
        double mid = 0.5 * (lo + hi);
        if (residual(mid) > 0) hi = mid; else lo = mid;
    }
    double su = 0.5 * (lo + hi), sv = v_for_u(su);
    if (std::abs(detail::candidate_r(std::exp(su), std::exp(sv), gf) - a) > 1e-9 * a ||
        std::abs(detail::candidate_r(std::exp(su), std::exp(sv), gt) - a) > 1e-9 * a)
        throw NoSolution("solve_double_crossratio: residual tolerance not met");
    Isometry back = w.inverse();
    try {
        return Geodesic(back.apply(BoundaryPoint::halfplane(std::exp(su))),
                        back.apply(BoundaryPoint::halfplane(std::exp(sv))));
    } catch (const geom::DegenerateQuadruple&) {
        throw NoSolution("solve_double_crossratio: solution below representable separation");
    }
}

// Place (u, v) inside `arc` (both ends of which belong to g) with
// R((u,v), g) = a and with the perpendicular from `origin` to g also
// perpendicular to the result.  The result is the next member of the pencil
// of geodesics orthogonal to that perpendicular, one spacing d(a) further
// from the origin, so it is available in closed form.
inline Geodesic solve_crossratio_perpendicular(const Geodesic& g, double a,
                                               const ModelPoint& origin, const BoundaryArc& arc) {
    if (!(a > 0 && a < 1))
        throw ParameterOutOfRange("solve_crossratio_perpendicular: a outside (0,1)");
    Geodesic h = geom::to_halfplane(g);
    ModelPoint o = geom::to_halfplane(origin);
    Geodesic mirror = geom::perpendicular_through(o, h);
    Isometry axm = geom::map_to_axis(mirror);
    double t0 = std::log(axm.apply(geom::closest_point(h, o)).y);
    double tor = std::log(axm.apply(o).y);
    double d = distance_for_cross_ratio(a);
    Isometry w = detail::frame_for_arc(arc);

    auto in_arc = [&](const Geodesic& cand) {
        BoundaryPoint a1 = w.apply(cand.e1), a2 = w.apply(cand.e2);
        return !a1.infinite && !a2.infinite && a1.value > 0 && a2.value > 0;
    };
    auto attempt = [&](double dir) -> std::optional<Geodesic> {
        ModelPoint foot = geom::point_on_geodesic(mirror, t0 + dir * d);
        try {
            Geodesic cand = geom::perpendicular_through(foot, mirror);
            if (!in_arc(cand)) return std::nullopt;
            return cand;
        } catch (const geom::DegenerateQuadruple&) {
            return std::nullopt;
        }
    };
    std::optional<Geodesic> out = attempt(t0 >= tor ? +1.0 : -1.0);
    if (!out) out = attempt(t0 >= tor ? -1.0 : +1.0);
    if (!out)
        throw NoSolution("solve_crossratio_perpendicular: arc cannot host the pair");
    // verify the cross-ratio in the arc frame, where it is well conditioned
    Geodesic img(w.apply(out->e1), w.apply(out->e2));
    Geodesic gimg = Geodesic::halfplane_vertical(0);  // g maps to the frame axis
    if (std::abs(geom::cross_ratio_r(img, gimg) - a) > 1e-8 * a)
        throw NoSolution("solve_crossratio_perpendicular: residual tolerance not met");
    return geom::to_halfplane(*out);
}

// Convenience overload: the arc is g's far side from the origin.
inline Geodesic solve_crossratio_perpendicular(const Geodesic& g, double a,
                                               const ModelPoint& origin) {
    Geodesic h = geom::to_halfplane(g);
    ModelPoint o = geom::to_halfplane(origin);
    // far-side ideal arc: the lens arc if the origin is outside it, else the complement
    BoundaryArc lens{h.e2, h.e1};
    BoundaryArc outer{h.e1, h.e2};
    return solve_crossratio_perpendicular(h, a, o, geom::on_lens_side(h, o) ? outer : lens);
}

// ---------------------------------------------------------------------------
// Construction 1: symmetric initial pair, pencil by reflections, recursive
// in-fill.  Canonical frame: the pencil axis is the imaginary axis, the
// construction origin is (0,1); the initial pair sits at axis positions
// +-d(alpha)/2.  depth counts refinement passes over the gaps between
// neighboring endpoints; curves are kept while their closest approach to the
// origin stays within `scaled_horizon` scale units.

namespace detail {

// Endpoint separations below ~1e-6 relative leave no headroom for 1e-9
// accurate cross-ratios in double precision; such curves are not emitted.
inline bool comfortably_representable(const Geodesic& g) {
    Geodesic h = geom::to_halfplane(g);
    if (h.has_infinite_end()) return true;
    double scale = std::max(std::abs(h.e1.value), std::abs(h.e2.value));
    return std::abs(h.e2.value - h.e1.value) >= 1e-6 * scale;
}

}  // namespace detail

inline SignedGeodesicFamily construct1(double alpha, int depth, double scaled_horizon = 25.0) {
    validate_params(alpha, alpha);
    if (depth < 0) throw ParameterOutOfRange("construct1: depth must be >= 0");
    const ModelPoint origin = ModelPoint::halfplane(0, 1);
    const double horizon = scaled_horizon * geom::scale_distance_unit();
    const double d = distance_for_cross_ratio(alpha);

    SignedGeodesicFamily fam;
    fam.params = {alpha, alpha, depth};
    fam.construction = "c1";
    fam.base_point = origin;
    fam.base_sign = +1;
    fam.geodesics.push_back(Geodesic::halfplane(-std::exp(-d / 2), std::exp(-d / 2)));
    fam.geodesics.push_back(Geodesic::halfplane(-std::exp(d / 2), std::exp(d / 2)));

    struct End {
        int owner;
        BoundaryPoint bp;
    };
    auto within_horizon = [&](const Geodesic& g) {
        return geom::point_to_geodesic_distance(origin, g) <= horizon;
    };

    for (int pass = 0; pass < depth; ++pass) {
        std::vector<End> ends;
        for (int i = 0; i < static_cast<int>(fam.geodesics.size()); ++i) {
            const Geodesic& g = fam.geodesics[i];
            ends.push_back({i, g.e1});
            ends.push_back({i, g.e2});
        }
        std::sort(ends.begin(), ends.end(),
                  [](const End& a, const End& b) { return geom::boundary_less(a.bp, b.bp); });
        std::vector<Geodesic> fresh;
        const int n = static_cast<int>(ends.size());
        for (int i = 0; i < n; ++i) {
            const End& lo = ends[i];
            const End& hi = ends[(i + 1) % n];
            BoundaryArc arc{hi.bp, lo.bp};  // clockwise from hi down to lo = ccw gap (lo, hi)
            if (lo.owner == hi.owner) {
                // inside arc of a single curve: extend its perpendicular pencil
                Geodesic host = fam.geodesics[lo.owner];
                BoundaryArc cur = arc;
                while (true) {
                    Geodesic next = [&]() -> std::optional<Geodesic> {
                        try {
                            return solve_crossratio_perpendicular(host, alpha, origin, cur);
                        } catch (const NoSolution&) {
                            return std::nullopt;
                        }
                    }().value_or(host);
                    if (geom::same_geodesic(next, host)) break;
                    if (!within_horizon(next) || !detail::comfortably_representable(next)) break;
                    fresh.push_back(next);
                    // continue into the sub-arc of `next` (clockwise orientation
                    // determined in the arc frame, stable at any depth)
                    Isometry w = detail::frame_for_arc(cur);
                    BoundaryPoint i1 = w.apply(next.e1), i2 = w.apply(next.e2);
                    cur = (!i1.infinite && !i2.infinite && i1.value > i2.value)
                              ? BoundaryArc{next.e1, next.e2}
                              : BoundaryArc{next.e2, next.e1};
                    host = next;
                }
            } else {
                Geodesic left = fam.geodesics[hi.owner];   // owns the clockwise start
                Geodesic right = fam.geodesics[lo.owner];  // owns the clockwise end
                try {
                    Geodesic mid = solve_double_crossratio(left, right, alpha, arc);
                    if (within_horizon(mid) && detail::comfortably_representable(mid))
                        fresh.push_back(mid);
                } catch (const NoSolution&) {
                    // arcs that cannot host a curve at this alpha stay empty
                }
            }
        }
        for (const Geodesic& g : fresh) {
            bool dup = false;
            for (const Geodesic& h : fam.geodesics)
                if (geom::same_geodesic(g, h, 1e-9)) { dup = true; break; }
            if (!dup) fam.geodesics.push_back(g);
        }
    }
    return fam;
}

// ---------------------------------------------------------------------------
// Construction 2: one geodesic per step, inserted into the selected arc and
// signed chess-board fashion; the selected arc advances clockwise.  First
// geodesic is the imaginary axis, the initial selected arc is the positive
// real half-line, the region to its side carries sign +1.

inline SignedGeodesicFamily construct2(double alpha, double eta, int steps) {
    validate_params(alpha, eta);
    if (steps < 1) throw ParameterOutOfRange("construct2: steps must be >= 1");
    const ModelPoint origin = ModelPoint::halfplane(0, 1);

    SignedGeodesicFamily fam;
    fam.params = {alpha, eta, steps};
    fam.construction = "c2";
    fam.base_point = ModelPoint::halfplane(1, 1);  // inside the initial (+) region
    fam.base_sign = +1;

    struct ArcState {
        BoundaryArc arc;
        int from_owner, to_owner;
    };
    fam.geodesics.push_back(Geodesic::halfplane_vertical(0));
    std::vector<ArcState> arcs;
    BoundaryPoint zero = BoundaryPoint::halfplane(0);
    BoundaryPoint inf = BoundaryPoint::halfplane_infinity();
    arcs.push_back({BoundaryArc{inf, zero}, 0, 0});  // positive reals, clockwise
    arcs.push_back({BoundaryArc{zero, inf}, 0, 0});  // negative reals
    std::size_t selected = 0;

    for (int k = 1; k < steps; ++k) {
        ArcState host = arcs[selected];
        int phase = fam.sign_of_arc_region(host.arc);
        double a = phase > 0 ? alpha : eta;
        Geodesic fresh = (host.from_owner == host.to_owner)
                             ? solve_crossratio_perpendicular(fam.geodesics[host.from_owner], a,
                                                              origin, host.arc)
                             : solve_double_crossratio(fam.geodesics[host.from_owner],
                                                       fam.geodesics[host.to_owner], a, host.arc);
        int id = static_cast<int>(fam.geodesics.size());
        fam.geodesics.push_back(fresh);
        // clockwise order of the new endpoints inside the host arc
        double o1 = host.arc.from_angle() - geom::boundary_angle(fresh.e1);
        double o2 = host.arc.from_angle() - geom::boundary_angle(fresh.e2);
        while (o1 < 0) o1 += 2 * geom::kPi;
        while (o2 < 0) o2 += 2 * geom::kPi;
        BoundaryPoint first = o1 < o2 ? fresh.e1 : fresh.e2;
        BoundaryPoint second = o1 < o2 ? fresh.e2 : fresh.e1;
        ArcState a1{BoundaryArc{host.arc.from, first}, host.from_owner, id};
        ArcState a2{BoundaryArc{first, second}, id, id};
        ArcState a3{BoundaryArc{second, host.arc.to}, id, host.to_owner};
        arcs[selected] = a1;
        arcs.insert(arcs.begin() + selected + 1, {a2, a3});
        selected = (selected + 3) % arcs.size();
    }
    fam.seed_arc = arcs[selected].arc;
    return fam;
}

// ---------------------------------------------------------------------------
// Verification: pairwise disjointness and cross-ratio bound.

struct VerifyReport {
    double max_pairwise_r = 0.0;
    int crossings = 0;
    bool pass = false;
    int worst_i = -1, worst_j = -1;
};

inline VerifyReport verify_geodesical(const SignedGeodesicFamily& fam, double threshold) {
    VerifyReport rep;
    const auto& gs = fam.geodesics;
    for (std::size_t i = 0; i < gs.size(); ++i)
        for (std::size_t j = i + 1; j < gs.size(); ++j) {
            if (geom::geodesics_cross(gs[i], gs[j])) {
                ++rep.crossings;
                continue;
            }
            double r = geom::cross_ratio_r(gs[i], gs[j]);
            if (r > rep.max_pairwise_r) {
                rep.max_pairwise_r = r;
                rep.worst_i = static_cast<int>(i);
                rep.worst_j = static_cast<int>(j);
            }
        }
    rep.pass = rep.crossings == 0 && rep.max_pairwise_r < threshold;
    return rep;
}

// ---------------------------------------------------------------------------
// Surgery: remove segments, reconnect their endpoints by a permutation,
// measure the length increment.

struct SurgerySegment {
    Geodesic curve;
    ModelPoint a, b;  // segment endpoints, on the curve
};

struct SurgerySpec {
    std::vector<SurgerySegment> segments;
    std::vector<int> pairing;  // 2k endpoint indices: new segment i joins pairing[2i], pairing[2i+1]
};

inline double surgery_increment(const SurgerySpec& spec) {
    const int k = static_cast<int>(spec.segments.size());
    if (k == 0) throw MalformedSpec("surgery_increment: no segments");
    if (static_cast<int>(spec.pairing.size()) != 2 * k)
        throw MalformedSpec("surgery_increment: pairing size mismatch");
    std::vector<int> seen(spec.pairing.begin(), spec.pairing.end());
    std::sort(seen.begin(), seen.end());
    for (int i = 0; i < 2 * k; ++i)
        if (seen[i] != i) throw MalformedSpec("surgery_increment: pairing is not a bijection");
    std::vector<ModelPoint> pts;
    for (const auto& s : spec.segments) {
        if (geom::point_to_geodesic_distance(s.a, s.curve) > 1e-6 ||
            geom::point_to_geodesic_distance(s.b, s.curve) > 1e-6)
            throw MalformedSpec("surgery_increment: segment endpoint off its curve");
        pts.push_back(geom::to_halfplane(s.a));
        pts.push_back(geom::to_halfplane(s.b));
    }
    double removed = 0, added = 0;
    for (int i = 0; i < k; ++i) {
        removed += geom::point_distance(pts[2 * i], pts[2 * i + 1]);
        added += geom::point_distance(pts[spec.pairing[2 * i]], pts[spec.pairing[2 * i + 1]]);
    }
    return added - removed;
}

// ---------------------------------------------------------------------------
// Wrong-pairing surplus: extra length of the crossed ideal pairing
// (p1 q2), (p2 q1) over (p1 p2), (q1 q2), measured inside a growing ball and
// stabilized in its radius.

namespace detail {

// Arc length of geodesic g inside the ball of hyperbolic radius T centered
// at c (half-plane model).
inline double length_in_ball(const Geodesic& g, const ModelPoint& c, double T) {
    Isometry m = geom::map_to_axis(g);
    ModelPoint w = m.apply(c);
    double ct = std::cosh(T);
    double disc = w.y * w.y * ct * ct - (w.x * w.x + w.y * w.y);
    if (disc <= 0) return 0.0;
    double root = std::sqrt(disc);
    double hi = w.y * ct + root;
    double lo = (w.x * w.x + w.y * w.y) / hi;  // product of roots = |w|^2
    return std::log(hi / lo);
}

}  // namespace detail

inline double wrong_pairing_surplus(const Geodesic& g1, const Geodesic& g2) {
    if (geom::geodesics_cross(g1, g2))
        throw geom::CrossingGeodesics("wrong_pairing_surplus: geodesics cross");
    Geodesic h1 = geom::to_halfplane(g1), h2 = geom::to_halfplane(g2);
    auto q = geom::canonical_quadruple(h1, h2);
    Geodesic t1(q[0], q[3]), t2(q[1], q[2]);
    auto cp = geom::common_perpendicular(h1, h2);
    ModelPoint center = geom::hyperbolic_midpoint(cp.foot1, cp.foot2);
    double prev = std::numeric_limits<double>::quiet_NaN();
    double d12 = geom::geodesic_distance(h1, h2).value;
    for (double T = std::max(8.0, d12); T <= 320; T += 4) {
        double s = detail::length_in_ball(t1, center, T) + detail::length_in_ball(t2, center, T) -
                   detail::length_in_ball(h1, center, T) - detail::length_in_ball(h2, center, T);
        if (!std::isnan(prev) && std::abs(s - prev) < 1e-6) return s;
        prev = s;
    }
    throw ConvergenceFailure("wrong_pairing_surplus: truncated lengths did not stabilize");
}

// ---------------------------------------------------------------------------
// Positive-density measurement: empirical covering radius over a window.

inline double density_radius(const SignedGeodesicFamily& fam, const ModelPoint& center,
                             double window_radius, int samples) {
    if (fam.geodesics.empty()) throw EmptyFamily("density_radius: no geodesics");
    if (samples < 1) throw ParameterOutOfRange("density_radius: samples must be positive");
    const double golden = geom::kPi * (3 - std::sqrt(5.0));
    double worst = fam.distance_to_nearest_curve(center);
    double coshW = std::cosh(window_radius);
    for (int i = 0; i < samples; ++i) {
        double frac = (i + 0.5) / samples;
        double r = std::acosh(1 + (coshW - 1) * frac);
        ModelPoint p = geom::disk_point_at(center, std::fmod(i * golden, 2 * geom::kPi), r);
        worst = std::max(worst, fam.distance_to_nearest_curve(p));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Decay profile for disjoint small semicircles against the unit semicircle
// centered at -X.

struct DecayEntry {
    int index;
    double rho_formula;   // -ln of the cross-ratio expression
    double rho_distance;  // metric distance to the reference semicircle
};

struct DecayProfile {
    std::vector<DecayEntry> entries;
    double beta = 0;
    double bound = 0;  // X^(1-2beta)
    double sum = 0;    // sum of exp(-beta * rho_distance)
};

struct Semicircle {
    double center;
    double radius;
};

inline DecayProfile decay_profile(const std::vector<Semicircle>& circles, double X, double beta) {
    if (!(beta > 1)) throw HypothesisViolated("decay_profile: beta must exceed 1");
    if (circles.empty()) throw HypothesisViolated("decay_profile: no semicircles");
    for (std::size_t i = 0; i < circles.size(); ++i) {
        const auto& c = circles[i];
        if (!(c.radius > 0 && c.radius <= 0.5 + 1e-12))
            throw HypothesisViolated("decay_profile: radius outside (0, 1/2]");
        if (!(c.center > 0 && c.center < X))
            throw HypothesisViolated("decay_profile: center outside (0, X)");
        if (i > 0 && !(c.center < circles[i - 1].center))
            throw HypothesisViolated("decay_profile: centers must decrease");
        if (i > 0 && circles[i - 1].center - c.center < circles[i - 1].radius + c.radius)
            throw HypothesisViolated("decay_profile: semicircles overlap");
    }
    Geodesic ref = Geodesic::halfplane(-X - 1, -X + 1);
    DecayProfile out;
    out.beta = beta;
    out.bound = std::pow(X, 1 - 2 * beta);
    for (std::size_t i = 0; i < circles.size(); ++i) {
        double x = circles[i].center, r = circles[i].radius;
        double rho_f = -std::log(4 * r / ((X + 1 + x + r) * (X - 1 + x - r)));
        Geodesic gi = Geodesic::halfplane(x - r, x + r);
        double rho_d = geom::geodesic_distance(ref, gi).value;
        out.entries.push_back({static_cast<int>(i), rho_f, rho_d});
        out.sum += std::exp(-beta * rho_d);
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON: {params:{alpha,eta,depth}, model, geodesics:[{e1,e2}], base_sign,
// construction, seed_arc} plus the base point needed to evaluate signs.

inline nlohmann::json family_to_json(const SignedGeodesicFamily& fam) {
    nlohmann::json gs = nlohmann::json::array();
    for (const Geodesic& g : fam.geodesics) {
        nlohmann::json j = geom::geodesic_to_json(g);
        gs.push_back(nlohmann::json{{"e1", j["e1"]}, {"e2", j["e2"]}});
    }
    nlohmann::json j{{"params", {{"alpha", fam.params.alpha},
                                 {"eta", fam.params.eta},
                                 {"depth", fam.params.depth_or_steps}}},
                     {"model", "halfplane"},
                     {"geodesics", gs},
                     {"base_sign", fam.base_sign},
                     {"base_point", {fam.base_point.x, fam.base_point.y}},
                     {"construction", fam.construction}};
    if (fam.seed_arc) {
        j["seed_arc"] = {{"from", geom::boundary_to_json(fam.seed_arc->from)},
                         {"to", geom::boundary_to_json(fam.seed_arc->to)}};
    } else {
        j["seed_arc"] = nullptr;
    }
    return j;
}

inline SignedGeodesicFamily family_from_json(const nlohmann::json& j) {
    SignedGeodesicFamily fam;
    fam.params.alpha = j.at("params").at("alpha").get<double>();
    fam.params.eta = j.at("params").at("eta").get<double>();
    fam.params.depth_or_steps = j.at("params").at("depth").get<int>();
    fam.construction = j.at("construction").get<std::string>();
    fam.base_sign = j.at("base_sign").get<int>();
    auto bpnt = j.at("base_point");
    fam.base_point = ModelPoint::halfplane(bpnt.at(0).get<double>(), bpnt.at(1).get<double>());
    for (const auto& ge : j.at("geodesics"))
        fam.geodesics.push_back(Geodesic(geom::boundary_from_json(ge.at("e1"), Model::halfplane),
                                         geom::boundary_from_json(ge.at("e2"), Model::halfplane)));
    if (j.contains("seed_arc") && !j.at("seed_arc").is_null())
        fam.seed_arc = BoundaryArc{
            geom::boundary_from_json(j.at("seed_arc").at("from"), Model::halfplane),
            geom::boundary_from_json(j.at("seed_arc").at("to"), Model::halfplane)};
    return fam;
}

}  // namespace hypising::fam
