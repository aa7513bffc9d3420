#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "nlsp/errors.hpp"
#include "nlsp/mesh.hpp"
#include "nlsp/rng.hpp"
#include "nlsp/sparse.hpp"

namespace nlsp {

enum class PdeFamily { Diffusion, Anisotropic, ScreenedPoisson };

inline std::string family_name(PdeFamily f) {
    switch (f) {
        case PdeFamily::Diffusion: return "diffusion";
        case PdeFamily::Anisotropic: return "anisotropic";
        case PdeFamily::ScreenedPoisson: return "screened_poisson";
    }
    return "unknown";
}

inline PdeFamily family_from_name(const std::string& s) {
    if (s == "diffusion") return PdeFamily::Diffusion;
    if (s == "anisotropic") return PdeFamily::Anisotropic;
    if (s == "screened_poisson") return PdeFamily::ScreenedPoisson;
    throw ValidationError("unknown PDE family: " + s);
}

// 2x2 SPD tensor for the anisotropic family, stored per triangle
struct Tensor2 {
    double k11 = 1.0;
    double k12 = 0.0;
    double k22 = 1.0;
};

// Per-triangle coefficient fields; which vector is populated depends on the
// family. alpha is shared across the instance (screened Poisson reaction
// weight).
struct Coefficients {
    PdeFamily family = PdeFamily::Diffusion;
    std::vector<double> g;       // diffusion
    std::vector<Tensor2> tensor; // anisotropic
    std::vector<double> kappa;   // screened Poisson
    double alpha = 0.0;          // screened Poisson
};

struct FemOptions {
    double load_constant = 1.0;       // right-hand side f
    double anisotropy_strength = 1e5; // dominant eigenvalue of the tensor
};

// The random coefficient fields: g_T ~ exp(N(0, 1.5)), per-triangle rotation
// angle ~ N(0, pi^2) with eigenvalues {strength, 1}, kappa_T ~ exp(N(0, 1))
// with alpha ~ U(0, 20). Second Gaussian parameter read as variance, pinned
// by the pi^2 convention of the rotation angle.
inline Coefficients sample_coefficients(PdeFamily family, const TriMesh& mesh,
                                        std::uint64_t seed, const FemOptions& opts = {}) {
    Rng rng(mix_seed(seed, 0x636f6566));
    const std::size_t nt = mesh.triangles.size();
    Coefficients c;
    c.family = family;
    switch (family) {
        case PdeFamily::Diffusion: {
            c.g.resize(nt);
            const double sd = std::sqrt(1.5);
            for (auto& v : c.g) v = std::exp(rng.normal(0.0, sd));
            break;
        }
        case PdeFamily::Anisotropic: {
            c.tensor.resize(nt);
            for (auto& t : c.tensor) {
                const double phi = rng.normal(0.0, std::numbers::pi);
                const double cs = std::cos(phi), sn = std::sin(phi);
                const double d1 = opts.anisotropy_strength, d2 = 1.0;
                t.k11 = d1 * cs * cs + d2 * sn * sn;
                t.k12 = (d1 - d2) * cs * sn;
                t.k22 = d1 * sn * sn + d2 * cs * cs;
            }
            break;
        }
        case PdeFamily::ScreenedPoisson: {
            c.kappa.resize(nt);
            for (auto& v : c.kappa) v = std::exp(rng.normal(0.0, 1.0));
            c.alpha = rng.uniform(0.0, 20.0);
            break;
        }
    }
    return c;
}

namespace detail {

struct P1Element {
    double area;
    std::array<double, 3> gx; // gradient of each basis function
    std::array<double, 3> gy;
};

inline P1Element p1_element(const Point2& p0, const Point2& p1, const Point2& p2) {
    const double a2 = (p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x);
    if (a2 <= 0.0) throw MeshError("p1_element: non-positive triangle area");
    P1Element e;
    e.area = 0.5 * a2;
    // grad(phi_i) = (b_i, c_i) / (2|T|) with b, c the edge-opposite deltas
    e.gx = {(p1.y - p2.y) / a2, (p2.y - p0.y) / a2, (p0.y - p1.y) / a2};
    e.gy = {(p2.x - p1.x) / a2, (p0.x - p2.x) / a2, (p1.x - p0.x) / a2};
    return e;
}

} // namespace detail

// Stiffness (+ scaled mass for the screened family) without boundary
// treatment, plus the load vector for constant f.
inline std::pair<std::vector<std::tuple<std::size_t, std::size_t, double>>, std::vector<double>>
assemble_raw(PdeFamily family, const TriMesh& mesh, const Coefficients& coeff,
             const FemOptions& opts = {}) {
    const std::size_t n = mesh.vertices.size();
    const std::size_t nt = mesh.triangles.size();
    const std::size_t expected = nt;
    const std::size_t got = family == PdeFamily::Diffusion      ? coeff.g.size()
                            : family == PdeFamily::Anisotropic ? coeff.tensor.size()
                                                               : coeff.kappa.size();
    if (got != expected) throw ValidationError("assemble: one coefficient per triangle required");

    std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
    trip.reserve(nt * 9);
    std::vector<double> rhs(n, 0.0);

    double mean_area = 0.0;
    for (const auto& t : mesh.triangles)
        mean_area += signed_area(mesh.vertices[t.v[0]], mesh.vertices[t.v[1]],
                                 mesh.vertices[t.v[2]]);
    mean_area /= static_cast<double>(nt);

    for (std::size_t k = 0; k < nt; ++k) {
        const auto& t = mesh.triangles[k];
        const auto e = detail::p1_element(mesh.vertices[t.v[0]], mesh.vertices[t.v[1]],
                                          mesh.vertices[t.v[2]]);
        if (e.area <= 1e-6 * mean_area)
            throw MeshError("assemble: degenerate triangle " + std::to_string(k));

        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                double diff;
                switch (family) {
                    case PdeFamily::Diffusion:
                        diff = coeff.g[k] * (e.gx[i] * e.gx[j] + e.gy[i] * e.gy[j]);
                        break;
                    case PdeFamily::Anisotropic: {
                        const Tensor2& kt = coeff.tensor[k];
                        diff = e.gx[i] * (kt.k11 * e.gx[j] + kt.k12 * e.gy[j]) +
                               e.gy[i] * (kt.k12 * e.gx[j] + kt.k22 * e.gy[j]);
                        break;
                    }
                    case PdeFamily::ScreenedPoisson:
                        diff = coeff.kappa[k] * (e.gx[i] * e.gx[j] + e.gy[i] * e.gy[j]);
                        break;
                    default:
                        diff = 0.0;
                }
                double entry = diff * e.area;
                if (family == PdeFamily::ScreenedPoisson) {
                    // exact P1 mass: |T|/12 * (1 + delta_ij), unit sigma
                    entry += coeff.alpha * e.area / 12.0 * (i == j ? 2.0 : 1.0);
                }
                trip.emplace_back(t.v[i], t.v[j], entry);
            }
            rhs[t.v[i]] += opts.load_constant * e.area / 3.0;
        }
    }
    return {std::move(trip), std::move(rhs)};
}

// Homogeneous Dirichlet rows stay in the system: rows and columns of boundary
// vertices are dropped, the diagonal set to 1 and the rhs entry zeroed, which
// keeps the matrix SPD at full (N+1)^2 size.
inline SparseCsrMatrix apply_dirichlet(std::size_t n,
                                       std::vector<std::tuple<std::size_t, std::size_t, double>> trip,
                                       std::vector<double>& rhs,
                                       const std::vector<bool>& boundary_mask) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> kept;
    kept.reserve(trip.size() + n);
    for (auto& [i, j, v] : trip) {
        if (boundary_mask[i] || boundary_mask[j]) continue;
        kept.emplace_back(i, j, v);
    }
    for (std::size_t i = 0; i < n; ++i)
        if (boundary_mask[i]) {
            kept.emplace_back(i, i, 1.0);
            rhs[i] = 0.0;
        }
    return SparseCsrMatrix::from_triplets(n, std::move(kept));
}

struct PdeInstance {
    PdeFamily family = PdeFamily::Diffusion;
    TriMesh mesh;
    Coefficients coefficients;
    SparseCsrMatrix matrix;
    std::vector<double> rhs;
    std::uint64_t seed = 0;
    std::size_t grid_n = 0;
    double jitter = 0.0;
};

inline std::pair<SparseCsrMatrix, std::vector<double>> assemble(PdeFamily family,
                                                                const TriMesh& mesh,
                                                                const Coefficients& coeff,
                                                                const FemOptions& opts = {}) {
    auto [trip, rhs] = assemble_raw(family, mesh, coeff, opts);
    auto a = apply_dirichlet(mesh.vertices.size(), std::move(trip), rhs, mesh.boundary_mask);
    return {std::move(a), std::move(rhs)};
}

// mesh + coefficients + assembled system from one instance seed
inline PdeInstance make_instance(PdeFamily family, std::size_t grid_n, double jitter,
                                 std::uint64_t seed, const FemOptions& opts = {}) {
    PdeInstance inst;
    inst.family = family;
    inst.seed = seed;
    inst.grid_n = grid_n;
    inst.jitter = jitter;
    inst.mesh = build_mesh(grid_n, jitter, mix_seed(seed, 1));
    inst.coefficients = sample_coefficients(family, inst.mesh, mix_seed(seed, 2), opts);
    auto [a, rhs] = assemble(family, inst.mesh, inst.coefficients, opts);
    inst.matrix = std::move(a);
    inst.rhs = std::move(rhs);
    return inst;
}

} // namespace nlsp
