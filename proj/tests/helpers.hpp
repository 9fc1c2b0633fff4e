#pragma once

#include "laxqsl/ring.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace laxqsl::testing {

// Random eigenvector satisfying <x|x> = <y|y> = 1/2, <x|y> = 0 (Gram-Schmidt).
inline LaxEigenvector random_eigenvector(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    VecR x(n), y(n);
    for (int i = 0; i < n; ++i) x[i] = g(rng);
    for (int i = 0; i < n; ++i) y[i] = g(rng);
    x.normalize();
    y -= x.dot(y) * x;
    y.normalize();
    return {x * std::sqrt(0.5), y * std::sqrt(0.5)};
}

}  // namespace laxqsl::testing
