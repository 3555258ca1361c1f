#pragma once

// Minimal dense row-major matrix plus the compensated accumulation helpers
// used to keep the per-topic sufficient statistics tight (row sums, the
// degree identity) without pulling in a linear algebra dependency.

#include <cmath>
#include <cstddef>
#include <vector>

namespace mixtopic {

struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
    double* row(std::size_t r) { return a.data() + r * cols; }
    const double* row(std::size_t r) const { return a.data() + r * cols; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    bool operator==(const Matrix& o) const { return same_shape(o) && a == o.a; }
};

// Kahan-Babuska (Neumaier) running sum.
struct CompensatedSum {
    double sum = 0.0, comp = 0.0;
    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

inline double compensated_total(const double* v, std::size_t n) {
    CompensatedSum s;
    for (std::size_t i = 0; i < n; ++i) s.add(v[i]);
    return s.value();
}

}  // namespace mixtopic
