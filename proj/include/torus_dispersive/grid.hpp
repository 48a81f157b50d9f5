#pragma once

#include <stdexcept>

#include "torus_dispersive/trig_poly.hpp"

namespace td {

/// Uniform n x n grid on the torus [0, 2*pi)^2, row-major with the first
/// coordinate as the row. Frequencies follow the usual DFT layout: index k
/// carries mode k for k <= n/2 and k - n above.
struct Grid {
    int n = 0;

    explicit Grid(int n_) : n(n_) {
        if (n < 8 || n % 2 != 0)
            throw std::invalid_argument("grid size must be even and at least 8");
    }

    int size() const { return n * n; }
    double node(int j) const { return two_pi * j / n; }
    int mode(int k) const { return k <= n / 2 ? k : k - n; }
    int index_of(int mode) const { return mode >= 0 ? mode : mode + n; }
    int flat(int j, int k) const { return j * n + k; }

    bool resolves(int degree) const { return 2 * degree < n; }
};

}  // namespace td
