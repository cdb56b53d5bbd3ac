#include "eigenshape/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace eigenshape {

void jacobi_eigh(std::vector<double>& a, int n, std::vector<double>& eigenvalues,
                 std::vector<double>& vecs) {
    vecs.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) vecs[static_cast<std::size_t>(i) * n + i] = 1.0;
    if (n == 1) {
        eigenvalues = {a[0]};
        return;
    }

    auto off_norm = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += a[std::size_t(i) * n + j] * a[std::size_t(i) * n + j];
        return std::sqrt(2.0 * s);
    };

    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(a[std::size_t(i) * n + j]));
    if (scale == 0.0) scale = 1.0;

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps && off_norm() > 1e-15 * scale * n; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a[std::size_t(p) * n + q];
                if (std::abs(apq) <= 1e-300) continue;
                const double app = a[std::size_t(p) * n + p];
                const double aqq = a[std::size_t(q) * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = a[std::size_t(i) * n + p];
                    const double aiq = a[std::size_t(i) * n + q];
                    a[std::size_t(i) * n + p] = c * aip - s * aiq;
                    a[std::size_t(i) * n + q] = s * aip + c * aiq;
                }
                for (int j = 0; j < n; ++j) {
                    const double apj = a[std::size_t(p) * n + j];
                    const double aqj = a[std::size_t(q) * n + j];
                    a[std::size_t(p) * n + j] = c * apj - s * aqj;
                    a[std::size_t(q) * n + j] = s * apj + c * aqj;
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = vecs[std::size_t(i) * n + p];
                    const double viq = vecs[std::size_t(i) * n + q];
                    vecs[std::size_t(i) * n + p] = c * vip - s * viq;
                    vecs[std::size_t(i) * n + q] = s * vip + c * viq;
                }
            }
        }
    }

    eigenvalues.resize(static_cast<std::size_t>(n));
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        return a[std::size_t(i) * n + i] < a[std::size_t(j) * n + j];
    });
    std::vector<double> sorted_vecs(vecs.size());
    for (int j = 0; j < n; ++j) {
        eigenvalues[static_cast<std::size_t>(j)] = a[std::size_t(order[j]) * n + order[j]];
        for (int i = 0; i < n; ++i)
            sorted_vecs[std::size_t(i) * n + j] = vecs[std::size_t(i) * n + order[j]];
    }
    vecs = std::move(sorted_vecs);
}

}  // namespace eigenshape
