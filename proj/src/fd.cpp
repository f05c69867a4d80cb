#include "stlab/fd.hpp"

#include <algorithm>
#include <cmath>

#include "stlab/errors.hpp"

namespace stlab {

std::vector<double> fornberg_weights(double x0, const std::vector<double>& x, int m) {
    const int n = static_cast<int>(x.size());
    std::vector<double> c((m + 1) * n, 0.0);
    auto C = [&](int d, int i) -> double& { return c[d * n + i]; };
    double c1 = 1.0, c4 = x[0] - x0;
    C(0, 0) = 1.0;
    for (int i = 1; i < n; ++i) {
        int mn = std::min(i, m);
        double c2 = 1.0, c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    C(k, i) = c1 * (k * C(k - 1, i - 1) - c5 * C(k, i - 1)) / c2;
                C(0, i) = -c1 * c5 * C(0, i - 1) / c2;
            }
            for (int k = mn; k >= 1; --k) C(k, j) = (c4 * C(k, j) - k * C(k - 1, j)) / c3;
            C(0, j) = c4 * C(0, j) / c3;
        }
        c1 = c2;
    }
    return c;
}

int centered_width(int deriv, int accuracy) {
    return 2 * ((deriv + 1) / 2) - 1 + accuracy;
}

int one_sided_width(int deriv, int accuracy) {
    return std::max(deriv + accuracy, centered_width(deriv, accuracy));
}

FDOperator::FDOperator(int n, double h, int deriv, int accuracy) : deriv_(deriv) {
    if (accuracy < 2 || accuracy % 2 != 0)
        throw ConfigError("finite-difference accuracy must be even and >= 2");
    const int wc = centered_width(deriv, accuracy);
    const int wb = one_sided_width(deriv, accuracy);
    if (n < wb)
        throw ConfigError("nz = " + std::to_string(n) + " too small for a derivative of order " +
                          std::to_string(deriv) + " (needs " + std::to_string(wb) + " nodes)");
    const int q = wc / 2;
    const double scale = std::pow(h, -deriv);
    rows_.resize(n);
    for (int j = 0; j < n; ++j) {
        int first, width;
        if (j - q >= 0 && j + q <= n - 1) {
            first = j - q;
            width = wc;
        } else if (j - q < 0) {
            first = 0;
            width = wb;
        } else {
            first = n - wb;
            width = wb;
        }
        std::vector<double> xs(width);
        for (int m = 0; m < width; ++m) xs[m] = first + m - j;
        auto c = fornberg_weights(0.0, xs, deriv);
        Stencil s;
        s.first = first;
        s.w.assign(c.begin() + deriv * width, c.begin() + (deriv + 1) * width);
        for (auto& v : s.w) v *= scale;
        rows_[j] = std::move(s);
    }
}

double FDOperator::apply_row(int j, const double* in, int stride) const {
    const Stencil& s = rows_[j];
    double acc = 0.0;
    const double* p = in + static_cast<long>(s.first) * stride;
    for (size_t m = 0; m < s.w.size(); ++m) acc += s.w[m] * p[m * stride];
    return acc;
}

void FDOperator::apply(const double* in, double* out, int stride) const {
    for (int j = 0; j < size(); ++j) out[static_cast<long>(j) * stride] = apply_row(j, in, stride);
}

int FDOperator::lower_bandwidth() const {
    int b = 0;
    for (int j = 0; j < size(); ++j) b = std::max(b, j - rows_[j].first);
    return b;
}

int FDOperator::upper_bandwidth() const {
    int b = 0;
    for (int j = 0; j < size(); ++j)
        b = std::max(b, rows_[j].first + static_cast<int>(rows_[j].w.size()) - 1 - j);
    return b;
}

}  // namespace stlab
