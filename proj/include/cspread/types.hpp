#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cspread {

using cplx = std::complex<double>;

// European spread option on (S1, S2): payoff (S2 - c*S1 - K)^+ at maturity T.
struct Contract {
    double K = 1.0;
    double c = 1.0 / 42.0;
    double T = 0.5;
    std::array<double, 2> s0{100.0, 2.0};

    void validate() const {
        if (K < 0.0) throw std::invalid_argument("Contract: K must be nonnegative");
        if (c <= 0.0) throw std::invalid_argument("Contract: c must be positive");
        if (T <= 0.0) throw std::invalid_argument("Contract: T must be positive");
        if (s0[0] <= 0.0 || s0[1] <= 0.0)
            throw std::invalid_argument("Contract: spot prices must be positive");
    }
};

// Uniform square tensor mesh on the outer domain [x_lo, x_lo + L]^2.
// Interior nodes are x^(j) = x_lo + j*h for j = 1 .. n_int per dimension,
// indexed lexicographically with x1 fastest (x2 selects the block).
struct Grid2D {
    double L;
    int level;
    double h;
    int n_int;
    double x_lo;

    Grid2D(double L_, int level_, double x_lo_ = 0.0)
        : L(L_), level(level_), h(0.0), n_int(0), x_lo(x_lo_) {
        if (L <= 0.0) throw std::invalid_argument("Grid2D: L must be positive");
        if (level < 2) throw std::invalid_argument("Grid2D: level must be at least 2");
        int cells = 1 << level;
        h = L / cells;
        n_int = cells - 1;
        if (n_int < 3) throw std::invalid_argument("Grid2D: fewer than 3 interior nodes");
    }

    std::size_t size() const { return static_cast<std::size_t>(n_int) * n_int; }

    // j1, j2 in 1..n_int
    std::size_t index(int j1, int j2) const {
        if (j1 < 1 || j1 > n_int || j2 < 1 || j2 > n_int)
            throw std::invalid_argument("Grid2D::index: node outside interior");
        return static_cast<std::size_t>(j2 - 1) * n_int + (j1 - 1);
    }
    double node1(int j1) const { return x_lo + j1 * h; }
    double node2(int j2) const { return x_lo + j2 * h; }
};

// Generating array of a 2-level Toeplitz (BTTB) matrix: entry of the matrix at
// [block i, block j][pos r, pos s] is g(i - j, r - s). p indexes block
// differences (x2 axis), q position differences within a block (x1 axis).
struct GeneratingArray {
    int m = 0;
    int n = 0;
    std::vector<double> values; // (2m-1) x (2n-1), row-major over (p, q)

    GeneratingArray() = default;
    GeneratingArray(int m_, int n_) : m(m_), n(n_) {
        if (m < 1 || n < 1) throw std::invalid_argument("GeneratingArray: m, n must be positive");
        values.assign(static_cast<std::size_t>(2 * m - 1) * (2 * n - 1), 0.0);
    }

    double& at(int p, int q) {
        return values[idx(p, q)];
    }
    double at(int p, int q) const {
        return values[idx(p, q)];
    }
    // zero outside the stored band
    double get(int p, int q) const {
        if (p <= -m || p >= m || q <= -n || q >= n) return 0.0;
        return values[idx(p, q)];
    }

    std::size_t idx(int p, int q) const {
        if (p <= -m || p >= m || q <= -n || q >= n)
            throw std::invalid_argument("GeneratingArray: difference out of range");
        return static_cast<std::size_t>(p + m - 1) * (2 * n - 1) + (q + n - 1);
    }

    GeneratingArray& axpy(double a, const GeneratingArray& other) {
        if (other.m != m || other.n != n)
            throw std::invalid_argument("GeneratingArray::axpy: shape mismatch");
        for (std::size_t i = 0; i < values.size(); ++i) values[i] += a * other.values[i];
        return *this;
    }
    GeneratingArray& scale(double a) {
        for (double& v : values) v *= a;
        return *this;
    }

    // central crop to half-width (mc-1, nc-1)
    GeneratingArray crop(int mc, int nc) const {
        if (mc > m || nc > n) throw std::invalid_argument("GeneratingArray::crop: cannot grow");
        GeneratingArray out(mc, nc);
        for (int p = -(mc - 1); p <= mc - 1; ++p)
            for (int q = -(nc - 1); q <= nc - 1; ++q)
                out.at(p, q) = at(p, q);
        return out;
    }
};

} // namespace cspread
