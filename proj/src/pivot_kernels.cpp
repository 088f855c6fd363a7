#include "broker/simplex.hpp"

namespace broker::lp::kernels {

namespace {

inline void scale_pivot_row(double *T, std::size_t stride, std::size_t active, std::size_t r, std::size_t s) {
    double *row = T + r * stride;
    const double inv = 1.0 / row[s];
    for (std::size_t j = 0; j < active; ++j) row[j] *= inv;
    row[stride - 1] *= inv;
    row[s] = inv;
}

inline void eliminate_row(double *T, std::size_t stride, std::size_t active, std::size_t r, std::size_t s,
                          std::size_t i) {
    double *row = T + i * stride;
    const double f = row[s];
    if (f == 0.0) return;
    const double *prow = T + r * stride;
    for (std::size_t j = 0; j < active; ++j) row[j] -= f * prow[j];
    row[stride - 1] -= f * prow[stride - 1];
    row[s] = -f * prow[s];
}

}  // namespace

void pivot_serial(double *T, std::size_t rows, std::size_t stride, std::size_t active, std::size_t r, std::size_t s) {
    scale_pivot_row(T, stride, active, r, s);
    for (std::size_t i = 0; i < rows; ++i) {
        if (i != r) eliminate_row(T, stride, active, r, s, i);
    }
}

void pivot_parallel(double *T, std::size_t rows, std::size_t stride, std::size_t active, std::size_t r,
                    std::size_t s) {
    scale_pivot_row(T, stride, active, r, s);
    const auto n = static_cast<long long>(rows);
    const auto pr = static_cast<long long>(r);
#pragma omp parallel for schedule(static) if (rows * active > 65536)
    for (long long i = 0; i < n; ++i) {
        if (i != pr) eliminate_row(T, stride, active, r, s, static_cast<std::size_t>(i));
    }
}

}  // namespace broker::lp::kernels
