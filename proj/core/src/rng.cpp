#include "bfvar/rng.hpp"

#include <cmath>

namespace bfvar {

double standard_normal(Engine& eng) {
    const double u1 = uniform01(eng), u2 = uniform01(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

double log_gamma_variate(Engine& eng, double shape) {
    if (shape < 1.0) return log_gamma_variate(eng, shape + 1.0) + std::log(uniform01(eng)) / shape;
    const double d = shape - 1.0 / 3.0, c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
        const double x = standard_normal(eng);
        const double t = 1.0 + c * x;
        if (t <= 0) continue;
        const double v = t * t * t;
        const double u = uniform01(eng);
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return std::log(d) + std::log(v);
    }
}

}  // namespace bfvar
