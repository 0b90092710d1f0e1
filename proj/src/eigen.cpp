#include "crowdsim/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace crowd {

namespace {

double off_diagonal_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (i != j) {
                s += a(i, j) * a(i, j);
            }
        }
    }
    return std::sqrt(s);
}

}  // namespace

EigenDecomposition symmetric_eigen(const Matrix& m) {
    if (!m.square()) {
        throw std::invalid_argument("eigen decomposition needs a square matrix");
    }
    const std::size_t n = m.rows();
    const double scale = frobenius_norm(m);
    if (max_abs_asymmetry(m) > 1e-9 * std::max(1.0, scale)) {
        throw std::invalid_argument("matrix is not symmetric");
    }

    Matrix a = m;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            a(i, j) = a(j, i) = 0.5 * (m(i, j) + m(j, i));
        }
    }
    Matrix v = Matrix::identity(n);
    const double target = 1e-12 * scale;

    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps && off_diagonal_norm(a) > target; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) {
                    continue;
                }
                // Rotation angle that zeroes a(p, q).
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenDecomposition out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[k];
        out.values[k] = a(src, src);
        std::size_t lead = 0;
        for (std::size_t r = 1; r < n; ++r) {
            if (std::fabs(v(r, src)) > std::fabs(v(lead, src)) + 1e-12) {
                lead = r;
            }
        }
        const double sign = v(lead, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < n; ++r) {
            out.vectors(r, k) = sign * v(r, src);
        }
    }
    return out;
}

}  // namespace crowd
