#include <gtest/gtest.h>

#include <cmath>

#include "nlsp/fem.hpp"
#include "nlsp/smoothing.hpp"
#include "nlsp/svd.hpp"

using namespace nlsp;

namespace {

SparseCsrMatrix random_spd_sparse(std::size_t n, Rng& rng) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.uniform() < 0.1) {
                const double v = rng.normal();
                trip.emplace_back(i, j, v);
                trip.emplace_back(j, i, v);
            }
    for (std::size_t i = 0; i < n; ++i) trip.emplace_back(i, i, 6.0 + rng.uniform());
    return SparseCsrMatrix::from_triplets(n, std::move(trip));
}

} // namespace

TEST(JacobiSweep, IdentityContractsByOneMinusOmega) {
    auto a = SparseCsrMatrix::identity(5);
    JacobiSmoother sm(a, 0.3);
    std::vector<double> x = {1.0, -2.0, 3.0, 0.5, -1.5};
    auto expect = x;
    for (auto& v : expect) v *= 0.7;
    std::vector<double> zero(5, 0.0);
    sm.sweep(a, x, zero);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(x[i], expect[i], 1e-15);
}

TEST(JacobiSweep, IdentityWithFullOmegaSolvesInOneSweep) {
    auto a = SparseCsrMatrix::identity(4);
    JacobiSmoother sm(a, 1.0);
    std::vector<double> target = {2.0, -1.0, 0.0, 5.0};
    std::vector<double> x(4, 0.0);
    sm.sweep(a, x, target);
    EXPECT_EQ(x, target);
}

TEST(JacobiSweep, ErrorDecreasesInDNormOnRandomSpd) {
    Rng rng(77);
    auto a = random_spd_sparse(30, rng);
    JacobiSmoother sm(a, 0.66);
    std::vector<double> x_star(30);
    for (auto& v : x_star) v = rng.normal();
    auto b = spmv(a, x_star);
    std::vector<double> x(30, 0.0);
    const auto d = a.diagonal();
    auto d_norm_err = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < 30; ++i) s += d[i] * (x[i] - x_star[i]) * (x[i] - x_star[i]);
        return std::sqrt(s);
    };
    double prev = d_norm_err();
    for (int sweep = 0; sweep < 50; ++sweep) {
        sm.sweep(a, x, b);
        const double cur = d_norm_err();
        EXPECT_LE(cur, prev * (1.0 + 1e-12));
        prev = cur;
    }
    EXPECT_LT(prev, 1e-2);
}

TEST(JacobiSweep, ZeroDiagonalRejected) {
    auto a = SparseCsrMatrix::from_triplets(2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}});
    EXPECT_THROW(JacobiSmoother(a, 0.66), NumericError);
}

TEST(SmoothedVectors, ZeroSweepsReturnsRawGaussians) {
    auto inst = make_instance(PdeFamily::Diffusion, 4, 0.25, 3);
    auto sv0 = generate_smoothed_vectors(inst.matrix, inst.mesh.boundary_mask, 8, 0, 0.66, 5);
    auto sv0b = generate_smoothed_vectors(inst.matrix, inst.mesh.boundary_mask, 8, 0, 0.66, 5);
    EXPECT_EQ(sv0.sweeps_applied, 0u);
    for (std::size_t i = 0; i < sv0.s.rows(); ++i)
        for (std::size_t j = 0; j < sv0.s.cols(); ++j) EXPECT_EQ(sv0.s(i, j), sv0b.s(i, j));
}

TEST(SmoothedVectors, ShapeAtN9K32) {
    auto inst = make_instance(PdeFamily::Diffusion, 9, 0.25, 7);
    auto sv = generate_smoothed_vectors(inst.matrix, inst.mesh.boundary_mask, 32, 10, 0.66, 11);
    EXPECT_EQ(sv.s.rows(), 100u);
    EXPECT_EQ(sv.s.cols(), 32u);
}

TEST(SmoothedVectors, BoundaryRowsStayExactlyZero) {
    auto inst = make_instance(PdeFamily::ScreenedPoisson, 6, 0.25, 13);
    auto sv = generate_smoothed_vectors(inst.matrix, inst.mesh.boundary_mask, 12, 25, 0.66, 17);
    for (std::size_t i = 0; i < sv.s.rows(); ++i)
        if (inst.mesh.boundary_mask[i])
            for (std::size_t j = 0; j < sv.s.cols(); ++j) EXPECT_EQ(sv.s(i, j), 0.0);
}

// smoothing concentrates energy into the dominant subspace
TEST(SmoothedVectors, EnergyConcentratesAsSweepsGrow) {
    auto inst = make_instance(PdeFamily::Diffusion, 9, 0.25, 19);
    double prev = -1.0;
    for (std::size_t sweeps : {0u, 5u, 10u, 20u}) {
        auto sv = generate_smoothed_vectors(inst.matrix, inst.mesh.boundary_mask, 32, sweeps,
                                            0.66, 23);
        auto f = svd_oracle(sv.s);
        auto p8 = first_cols(f.left_vectors, 8);
        const double energy = captured_energy(p8, sv.s);
        EXPECT_GT(energy, prev);
        prev = energy;
    }
    EXPECT_GT(prev, 0.5);
}

// iteration matrix never amplifies eigencomponents in the A-norm
TEST(JacobiSweep, SpectralContractionOnFemFamilies) {
    for (auto family :
         {PdeFamily::Diffusion, PdeFamily::Anisotropic, PdeFamily::ScreenedPoisson}) {
        auto inst = make_instance(family, 6, 0.25, 29); // n = 49 <= 64
        const auto a = inst.matrix.to_dense();
        const std::size_t n = a.rows();
        const auto diag = inst.matrix.diagonal();
        // symmetric similarity D^-1/2 A D^-1/2 shares its spectrum with D^-1 A
        DenseMatrix w(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                w(i, j) = a(i, j) / std::sqrt(diag[i] * diag[j]);
        auto eig = jacobi_eigh(w);
        for (double mu : eig.eigenvalues) {
            EXPECT_GT(mu, 0.0);
            EXPECT_LE(std::abs(1.0 - 0.66 * mu), 1.0 + 1e-12) << family_name(family);
        }
    }
}
