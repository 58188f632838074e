#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include "hypising/geometry.hpp"

// Shared test oracles: brute-force minimizers, chi-square tail, RNG helpers.

namespace testsupport {

using hypising::geom::Geodesic;
using hypising::geom::ModelPoint;

inline double golden_min(const std::function<double(double)>& f, double lo, double hi,
                         int iters = 200) {
    const double phi = (std::sqrt(5.0) - 1) / 2;
    double a = lo, b = hi;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    return std::min(fc, fd);
}

// Bracket the minimum with a grid scan, then refine with golden section.
inline double scan_min(const std::function<double(double)>& f, double lo, double hi, int grid) {
    double best = f(lo), best_t = lo;
    for (int i = 1; i <= grid; ++i) {
        double t = lo + (hi - lo) * i / grid;
        double v = f(t);
        if (v < best) { best = v; best_t = t; }
    }
    double h = (hi - lo) / grid;
    return golden_min(f, best_t - 2 * h, best_t + 2 * h);
}

// Infimum distance between two geodesics by 1-D minimization along g1.
inline double geodesic_distance_oracle(const Geodesic& g1, const Geodesic& g2) {
    auto f = [&](double t) {
        return hypising::geom::point_to_geodesic_distance(
            hypising::geom::point_on_geodesic(g1, t), g2);
    };
    return scan_min(f, -80, 80, 4000);
}

// Distance from p to its nearest point on g by arc-length scan.
inline double closest_distance_oracle(const Geodesic& g, const ModelPoint& p) {
    auto f = [&](double t) {
        return hypising::geom::point_distance(hypising::geom::point_on_geodesic(g, t), p);
    };
    return scan_min(f, -80, 80, 4000);
}

// Regularized upper incomplete gamma Q(a, x) (series + continued fraction),
// used for chi-square p-values: p = Q(df/2, stat/2).
inline double gamma_q(double a, double x) {
    if (x < 0 || a <= 0) return 1.0;
    if (x == 0) return 1.0;
    double gln = std::lgamma(a);
    if (x < a + 1) {
        // lower series
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        double p = sum * std::exp(-x + a * std::log(x) - gln);
        return 1.0 - p;
    }
    // continued fraction (Lentz)
    double fpmin = 1e-300;
    double b = x + 1 - a, c = 1 / fpmin, d = 1 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -1.0 * i * (i - a);
        b += 2;
        d = an * d + b;
        if (std::abs(d) < fpmin) d = fpmin;
        c = b + an / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

inline double chi2_pvalue(double stat, double df) { return gamma_q(df / 2, stat / 2); }

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * ((gen() >> 11) * 0x1.0p-53);
    }
    hypising::geom::Isometry random_isometry() {
        using hypising::geom::Isometry;
        Isometry m = Isometry::rotation_about_i(uniform(0, 2 * hypising::geom::kPi));
        m = Isometry::dilation(std::exp(uniform(-1.5, 1.5))).compose(m);
        m = Isometry::translation(uniform(-3, 3)).compose(m);
        return m;
    }
};

}  // namespace testsupport
