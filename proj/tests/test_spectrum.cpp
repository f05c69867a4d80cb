#include <gtest/gtest.h>

#include <cmath>

#include "stlab/spectrum.hpp"

using namespace stlab;

TEST(Spectrum, SmallestStripEigenvalueMatchesDenseOracle) {
    auto e = clamped_spectrum(0, 1, StripMode::symmetric);
    auto dense = discrete_clamped_eigenvalues(0, 257, -1.0, 1.0, 6);
    EXPECT_NEAR(e[0].lambda, dense[0], 1e-6 * e[0].lambda);
    // clamped beam of length 2: (4.7300407448627 / 2)^4
    EXPECT_NEAR(e[0].lambda, std::pow(4.7300407448627040 / 2.0, 4), 1e-10 * e[0].lambda);
}

TEST(Spectrum, EntryInvariants) {
    for (int k : {0, 1, 3, 7, 20}) {
        auto es = clamped_spectrum(k, 12, StripMode::symmetric);
        for (size_t n = 0; n < es.size(); ++n) {
            const auto& e = es[n];
            EXPECT_GT(e.lambda, 0.0);
            EXPECT_NEAR(e.r * e.r - e.omega * e.omega, 2.0 * k * k, 1e-9 * e.r * e.r);
            EXPECT_LT(e.residual, 1e-8);
            if (n > 0) EXPECT_GT(e.lambda, es[n - 1].lambda);
            EXPECT_EQ(e.n, static_cast<int>(n) + 1);
            EXPECT_EQ(e.even, n % 2 == 0);
        }
    }
}

TEST(Spectrum, EigenfunctionsAreUnitNormAndOrthogonal) {
    auto es = clamped_spectrum(2, 4, StripMode::unit, 4097);
    for (size_t a = 0; a < es.size(); ++a)
        for (size_t b = 0; b < es.size(); ++b) {
            double acc = 0.0;
            const auto& za = es[a].z;
            for (size_t i = 0; i + 1 < za.size(); ++i) {
                double h = za[i + 1] - za[i];
                acc += 0.5 * h * (es[a].eigfun[i] * es[b].eigfun[i] + es[a].eigfun[i + 1] * es[b].eigfun[i + 1]);
            }
            EXPECT_NEAR(acc, a == b ? 1.0 : 0.0, 1e-6);
        }
}

TEST(Spectrum, UnitStripScalesBySixteen) {
    auto a = clamped_spectrum(0, 3, StripMode::symmetric);
    auto b = clamped_spectrum(0, 3, StripMode::unit);
    for (int n = 0; n < 3; ++n) EXPECT_NEAR(b[n].lambda, 16.0 * a[n].lambda, 1e-10 * b[n].lambda);
}

TEST(SpectrumProperty, DenseOracleBlock) {
    for (int k = 0; k <= 4; ++k) {
        auto es = clamped_spectrum(k, 5, StripMode::symmetric);
        auto dense = discrete_clamped_eigenvalues(k, 257, -1.0, 1.0, 6);
        for (int n = 0; n < 5; ++n)
            EXPECT_NEAR(es[n].lambda, dense[n], 1e-5 * es[n].lambda) << "n " << n + 1 << " k " << k;
    }
}
