#pragma once

#include <vector>

namespace stlab {

// Finite-difference weights for derivatives 0..m at x0 from the nodes x
// (Fornberg's recursion). Returns w[d * x.size() + i].
std::vector<double> fornberg_weights(double x0, const std::vector<double>& x, int m);

struct Stencil {
    int first = 0;           // index of the first node used
    std::vector<double> w;   // weights for nodes first, first+1, ...
};

// Derivative of order `deriv` on a uniform grid of n nodes with spacing h.
// Interior rows are centered with formal accuracy `accuracy`; rows too close
// to a wall use a shifted one-sided stencil of the same accuracy.
class FDOperator {
public:
    FDOperator() = default;
    FDOperator(int n, double h, int deriv, int accuracy);

    int size() const { return static_cast<int>(rows_.size()); }
    int deriv() const { return deriv_; }
    const Stencil& row(int j) const { return rows_[j]; }

    // out[j*stride] = sum_m w_m in[(first+m)*stride]
    void apply(const double* in, double* out, int stride = 1) const;
    double apply_row(int j, const double* in, int stride = 1) const;

    // Largest offsets below/above the diagonal (for banded storage).
    int lower_bandwidth() const;
    int upper_bandwidth() const;

private:
    int deriv_ = 0;
    std::vector<Stencil> rows_;
};

// Stencil widths used by FDOperator.
int centered_width(int deriv, int accuracy);
int one_sided_width(int deriv, int accuracy);

}  // namespace stlab
