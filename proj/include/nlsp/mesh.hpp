#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "nlsp/errors.hpp"
#include "nlsp/rng.hpp"

namespace nlsp {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct Triangle {
    std::size_t v[3];
};

// Jittered triangulation of the unit square, counterclockwise triangles,
// boundary vertices flagged and locked on the square edge.
struct TriMesh {
    std::vector<Point2> vertices;
    std::vector<Triangle> triangles;
    std::vector<bool> boundary_mask;
};

inline double signed_area(const Point2& a, const Point2& b, const Point2& c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

// In-circle determinant for a CCW triangle (a, b, c) and query point d.
// Positive means strictly inside the circumcircle. Evaluated in extended
// precision with a relative tolerance so exact co-circular quads (regular
// grids) land on the "not inside" side deterministically.
inline bool in_circumcircle(const Point2& a, const Point2& b, const Point2& c,
                            const Point2& d, double rel_tol = 1e-10) {
    const long double adx = a.x - d.x, ady = a.y - d.y;
    const long double bdx = b.x - d.x, bdy = b.y - d.y;
    const long double cdx = c.x - d.x, cdy = c.y - d.y;
    const long double ad2 = adx * adx + ady * ady;
    const long double bd2 = bdx * bdx + bdy * bdy;
    const long double cd2 = cdx * cdx + cdy * cdy;

    const long double det = adx * (bdy * cd2 - cdy * bd2) -
                            ady * (bdx * cd2 - cdx * bd2) +
                            ad2 * (bdx * cdy - cdx * bdy);
    // scale from the term magnitudes so the tolerance tracks the actual
    // coordinate span of this test
    const long double scale = std::abs(adx * (bdy * cd2)) + std::abs(adx * (cdy * bd2)) +
                              std::abs(ady * (bdx * cd2)) + std::abs(ady * (cdx * bd2)) +
                              std::abs(ad2 * (bdx * cdy)) + std::abs(ad2 * (cdx * bdy));
    return det > static_cast<long double>(rel_tol) * scale;
}

// Bowyer-Watson incremental triangulation. Points are inserted in input
// order; co-circular ties resolve by that order.
inline std::vector<Triangle> delaunay(const std::vector<Point2>& points) {
    const std::size_t n = points.size();
    if (n < 3) throw ValidationError("delaunay: need at least 3 points");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (points[i].x == points[j].x && points[i].y == points[j].y)
                throw ValidationError("delaunay: duplicate point");
    {
        bool collinear = true;
        for (std::size_t k = 2; k < n && collinear; ++k)
            if (std::abs(signed_area(points[0], points[1], points[k])) > 1e-14) collinear = false;
        if (collinear) throw ValidationError("delaunay: all points collinear");
    }

    double lo_x = points[0].x, hi_x = points[0].x, lo_y = points[0].y, hi_y = points[0].y;
    for (const auto& p : points) {
        lo_x = std::min(lo_x, p.x);
        hi_x = std::max(hi_x, p.x);
        lo_y = std::min(lo_y, p.y);
        hi_y = std::max(hi_y, p.y);
    }
    const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1.0});
    const double cx = 0.5 * (lo_x + hi_x);
    const double cy = 0.5 * (lo_y + hi_y);

    std::vector<Point2> pts = points;
    pts.push_back({cx - 40.0 * span, cy - 25.0 * span});
    pts.push_back({cx + 40.0 * span, cy - 25.0 * span});
    pts.push_back({cx, cy + 50.0 * span});
    const std::size_t s0 = n, s1 = n + 1, s2 = n + 2;

    std::vector<Triangle> tris;
    tris.push_back({{s0, s1, s2}});

    std::vector<std::size_t> bad;
    // undirected edge -> count across the cavity
    std::vector<std::array<std::size_t, 2>> boundary;
    for (std::size_t ip = 0; ip < n; ++ip) {
        const Point2& p = pts[ip];
        bad.clear();
        for (std::size_t t = 0; t < tris.size(); ++t) {
            const auto& tr = tris[t];
            if (in_circumcircle(pts[tr.v[0]], pts[tr.v[1]], pts[tr.v[2]], p)) bad.push_back(t);
        }
        if (bad.empty()) throw MeshError("delaunay: insertion cavity empty");

        boundary.clear();
        for (std::size_t t : bad) {
            for (int e = 0; e < 3; ++e) {
                std::size_t u = tris[t].v[e];
                std::size_t w = tris[t].v[(e + 1) % 3];
                bool shared = false;
                // edge shared with another cavity triangle is interior
                for (std::size_t t2 : bad) {
                    if (t2 == t) continue;
                    const auto& o = tris[t2].v;
                    for (int e2 = 0; e2 < 3; ++e2) {
                        std::size_t u2 = o[e2], w2 = o[(e2 + 1) % 3];
                        if ((u == u2 && w == w2) || (u == w2 && w == u2)) {
                            shared = true;
                            break;
                        }
                    }
                    if (shared) break;
                }
                if (!shared) boundary.push_back({u, w});
            }
        }

        std::sort(bad.rbegin(), bad.rend());
        for (std::size_t t : bad) {
            tris[t] = tris.back();
            tris.pop_back();
        }
        for (const auto& edge : boundary) {
            Triangle nt{{edge[0], edge[1], ip}};
            if (signed_area(pts[nt.v[0]], pts[nt.v[1]], pts[nt.v[2]]) < 0.0)
                std::swap(nt.v[0], nt.v[1]);
            tris.push_back(nt);
        }
    }

    std::vector<Triangle> out;
    out.reserve(tris.size());
    for (const auto& t : tris) {
        if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
        out.push_back(t);
    }
    if (out.empty()) throw MeshError("delaunay: no triangles survived");
    return out;
}

// Brute-force empty-circumcircle verification; returns number of violations.
inline std::size_t count_delaunay_violations(const TriMesh& mesh, double rel_tol = 1e-10) {
    std::size_t violations = 0;
    for (const auto& t : mesh.triangles) {
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
            if (v == t.v[0] || v == t.v[1] || v == t.v[2]) continue;
            if (in_circumcircle(mesh.vertices[t.v[0]], mesh.vertices[t.v[1]],
                                mesh.vertices[t.v[2]], mesh.vertices[v], rel_tol))
                ++violations;
        }
    }
    return violations;
}

inline double min_relative_area(const TriMesh& mesh) {
    if (mesh.triangles.empty()) return 0.0;
    double total = 0.0;
    double mn = std::numeric_limits<double>::max();
    for (const auto& t : mesh.triangles) {
        const double a =
            signed_area(mesh.vertices[t.v[0]], mesh.vertices[t.v[1]], mesh.vertices[t.v[2]]);
        total += a;
        mn = std::min(mn, a);
    }
    const double mean = total / static_cast<double>(mesh.triangles.size());
    return mn / mean;
}

// (N+1)^2 vertices on [0,1]^2, interior vertices displaced by a uniform
// per-coordinate jitter of at most jitter_amplitude * h. Offending vertices
// are re-jittered until the triangulation has no near-degenerate triangle.
inline TriMesh build_mesh(std::size_t grid_n, double jitter_amplitude, std::uint64_t seed) {
    if (grid_n < 2) throw ValidationError("build_mesh: N must be at least 2");
    if (jitter_amplitude < 0.0 || jitter_amplitude >= 0.5)
        throw ValidationError("build_mesh: jitter amplitude must lie in [0, 0.5)");

    const std::size_t side = grid_n + 1;
    const double h = 1.0 / static_cast<double>(grid_n);
    Rng rng(mix_seed(seed, 0x6d657368));

    TriMesh mesh;
    mesh.vertices.resize(side * side);
    mesh.boundary_mask.assign(side * side, false);

    auto place = [&](std::size_t ix, std::size_t iy) {
        const std::size_t v = iy * side + ix;
        const bool bd = ix == 0 || iy == 0 || ix == grid_n || iy == grid_n;
        mesh.boundary_mask[v] = bd;
        double x = static_cast<double>(ix) * h;
        double y = static_cast<double>(iy) * h;
        if (!bd) {
            x += rng.uniform(-jitter_amplitude, jitter_amplitude) * h;
            y += rng.uniform(-jitter_amplitude, jitter_amplitude) * h;
        }
        mesh.vertices[v] = {x, y};
    };
    for (std::size_t iy = 0; iy < side; ++iy)
        for (std::size_t ix = 0; ix < side; ++ix) place(ix, iy);

    const double area_min_rel = 1e-6;
    for (int attempt = 0; attempt < 100; ++attempt) {
        mesh.triangles = delaunay(mesh.vertices);
        double total = 0.0;
        std::vector<bool> offending(mesh.vertices.size(), false);
        bool any = false;
        for (const auto& t : mesh.triangles)
            total += signed_area(mesh.vertices[t.v[0]], mesh.vertices[t.v[1]],
                                 mesh.vertices[t.v[2]]);
        const double mean = total / static_cast<double>(mesh.triangles.size());
        for (const auto& t : mesh.triangles) {
            const double a = signed_area(mesh.vertices[t.v[0]], mesh.vertices[t.v[1]],
                                         mesh.vertices[t.v[2]]);
            if (a <= area_min_rel * mean) {
                any = true;
                for (std::size_t k = 0; k < 3; ++k)
                    if (!mesh.boundary_mask[t.v[k]]) offending[t.v[k]] = true;
            }
        }
        if (!any) return mesh;
        for (std::size_t iy = 0; iy < side; ++iy)
            for (std::size_t ix = 0; ix < side; ++ix) {
                const std::size_t v = iy * side + ix;
                if (offending[v]) place(ix, iy);
            }
    }
    throw MeshError("build_mesh: degenerate mesh after 100 retries (seed " +
                    std::to_string(seed) + ")");
}

} // namespace nlsp
