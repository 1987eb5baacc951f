#include "pani/quadrature.hpp"

#include <cmath>
#include <limits>

#include "pani/errors.hpp"

namespace pani {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double simpson(double fa, double fm, double fb, double h) {
    return (fa + 4.0 * fm + fb) * (h / 6.0);
}

double simpson_rec(const Integrand& f, double a, double m, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
    if (!std::isfinite(whole)) return whole;
    double lm = 0.5 * (a + m);
    double rm = 0.5 * (m + b);
    double flm = f(lm);
    double frm = f(rm);
    if (!std::isfinite(flm)) return flm;
    if (!std::isfinite(frm)) return frm;
    double left = simpson(fa, flm, fm, m - a);
    double right = simpson(fm, frm, fb, b - m);
    double delta = left + right - whole;
    if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth <= 0) throw QuadratureError("adaptive Simpson: depth exhausted");
    double l = simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
    if (!std::isfinite(l)) return l;
    double r = simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    if (!std::isfinite(r)) return r;
    return l + r;
}

}  // namespace

double adaptive_simpson(const Integrand& f, double a, double b, double tol,
                        int max_depth) {
    if (b <= a) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a);
    double fm = f(m);
    double fb = f(b);
    if (!std::isfinite(fa)) return fa;
    if (!std::isfinite(fm)) return fm;
    if (!std::isfinite(fb)) return fb;
    double whole = simpson(fa, fm, fb, b - a);
    return simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, max_depth);
}

double integrate_with_top_singularity(const Integrand& f, double a, double b,
                                      const QuadratureOptions& opts) {
    if (b <= a) return 0.0;
    const double width = b - a;
    const double panel_tol = opts.abs_tol / 64.0;
    double acc = 0.0;
    double prev = std::numeric_limits<double>::quiet_NaN();
    double last = 0.0;
    double last_r = 0.0;
    double lo = a;
    int stall = 0;
    for (int k = 0; k <= opts.max_panels; ++k) {
        double hi = b - std::ldexp(width, -(k + 1));
        if (hi <= lo) break;  // sliver no longer representable
        double c = adaptive_simpson(f, lo, hi, panel_tol, opts.max_depth);
        if (!std::isfinite(c)) return kInf;
        acc += c;
        if (!std::isfinite(acc) || std::fabs(acc) > opts.divergence_cap) return kInf;
        double ac = std::fabs(c);
        if (k >= 1) {
            double ap = std::fabs(prev);
            double r = ap > 0.0 ? ac / ap : 0.0;
            last = c;
            last_r = r;
            if (ac <= panel_tol) return acc;  // dead tail
            if (r > 0.0 && r < 0.95) {
                double rem = ac * r / (1.0 - r);
                if (rem < opts.abs_tol)
                    return acc + (c > 0.0 ? rem : -rem);
            }
            if (r >= 0.98 && ac > opts.abs_tol) {
                if (++stall >= 12) return kInf;  // log-type divergence
            } else {
                stall = 0;
            }
        }
        prev = c;
        lo = hi;
    }
    // Panels exhausted; accept a cleanly decaying geometric tail.
    if (last_r > 0.0 && last_r < 0.97) {
        double rem = std::fabs(last) * last_r / (1.0 - last_r);
        return acc + (last > 0.0 ? rem : -rem);
    }
    if (std::fabs(last) <= opts.abs_tol) return acc;
    throw QuadratureError("top-singular integral did not settle");
}

}  // namespace pani
