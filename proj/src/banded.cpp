#include "stlab/banded.hpp"

#include <algorithm>
#include <string>

#include "stlab/errors.hpp"

extern "C" {
void dgbtrf_(const int* m, const int* n, const int* kl, const int* ku, double* ab,
             const int* ldab, int* ipiv, int* info);
void dgbtrs_(const char* trans, const int* n, const int* kl, const int* ku, const int* nrhs,
             const double* ab, const int* ldab, const int* ipiv, double* b, const int* ldb,
             int* info, size_t trans_len);
}

namespace stlab {

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ab_(static_cast<size_t>(2 * kl + ku + 1) * n, 0.0) {}

double BandedMatrix::get(int i, int j) const { return in_band(i, j) ? at(i, j) : 0.0; }

void BandedMatrix::set(int i, int j, double v) {
    if (!in_band(i, j))
        throw ConfigError("banded entry (" + std::to_string(i) + "," + std::to_string(j) +
                          ") outside the band");
    at(i, j) = v;
}

void BandedMatrix::add(int i, int j, double v) { set(i, j, get(i, j) + v); }

void BandedMatrix::zero_row(int i) {
    for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j) at(i, j) = 0.0;
}

std::vector<double> BandedMatrix::multiply(const std::vector<double>& x) const {
    std::vector<double> y(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j) acc += at(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

BandedLU::BandedLU(const BandedMatrix& a)
    : n_(a.n()), kl_(a.kl()), ku_(a.ku()), lu_(a.storage()), piv_(a.n()) {
    int ldab = a.ldab(), info = 0;
    dgbtrf_(&n_, &n_, &kl_, &ku_, lu_.data(), &ldab, piv_.data(), &info);
    if (info != 0)
        throw NumericalError("banded LU factorization failed (info = " + std::to_string(info) + ")");
}

void BandedLU::solve(double* b, int nrhs) const {
    const char trans = 'N';
    int ldab = 2 * kl_ + ku_ + 1, info = 0;
    dgbtrs_(&trans, &n_, &kl_, &ku_, &nrhs, lu_.data(), &ldab, piv_.data(), b, &n_, &info, 1);
    if (info != 0) throw NumericalError("banded LU solve failed");
}

std::vector<double> BandedLU::solve(std::vector<double> b) const {
    solve(b.data(), 1);
    return b;
}

}  // namespace stlab
