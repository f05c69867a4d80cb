#pragma once

#include <vector>

namespace stlab {

// Square banded matrix in LAPACK band storage with room for the LU fill-in.
class BandedMatrix {
public:
    BandedMatrix() = default;
    BandedMatrix(int n, int kl, int ku);

    int n() const { return n_; }
    int kl() const { return kl_; }
    int ku() const { return ku_; }

    bool in_band(int i, int j) const { return j - i <= ku_ && i - j <= kl_; }
    double get(int i, int j) const;
    void set(int i, int j, double v);
    void add(int i, int j, double v);
    void zero_row(int i);

    std::vector<double> multiply(const std::vector<double>& x) const;

    const std::vector<double>& storage() const { return ab_; }
    int ldab() const { return 2 * kl_ + ku_ + 1; }

private:
    double& at(int i, int j) { return ab_[static_cast<size_t>(j) * ldab() + kl_ + ku_ + i - j]; }
    double at(int i, int j) const { return ab_[static_cast<size_t>(j) * ldab() + kl_ + ku_ + i - j]; }

    int n_ = 0, kl_ = 0, ku_ = 0;
    std::vector<double> ab_;
};

// LU factorization with partial pivoting (LAPACK dgbtrf/dgbtrs).
class BandedLU {
public:
    BandedLU() = default;
    explicit BandedLU(const BandedMatrix& a);

    int n() const { return n_; }
    // Solves in place; b holds nrhs column-major right sides of length n.
    void solve(double* b, int nrhs = 1) const;
    std::vector<double> solve(std::vector<double> b) const;

private:
    int n_ = 0, kl_ = 0, ku_ = 0;
    std::vector<double> lu_;
    std::vector<int> piv_;
};

}  // namespace stlab
