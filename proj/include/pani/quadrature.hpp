#pragma once

#include <functional>

namespace pani {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    double divergence_cap = 1e12;
    int max_depth = 48;
    int max_panels = 52;
};

using Integrand = std::function<double(double)>;

// Adaptive Simpson on [a, b]. Non-finite function values propagate (the
// caller decides whether +inf means divergence). Throws QuadratureError when
// the depth budget runs out before the tolerance is met.
double adaptive_simpson(const Integrand& f, double a, double b, double tol,
                        int max_depth = 48);

// Integral of f over [a, b) where f may blow up at b. Dyadic panels shrink
// toward b and the unresolved sliver is closed by geometric extrapolation of
// the panel contributions. Returns +inf when the contributions fail to decay
// (log-type divergence) or the running sum passes the divergence cap.
double integrate_with_top_singularity(const Integrand& f, double a, double b,
                                      const QuadratureOptions& opts = {});

}  // namespace pani
