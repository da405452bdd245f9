#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "amink/errors.hpp"

namespace amink::hull {

// Hulls operate on d-dimensional coordinate columns (d <= 3) that the caller
// has already reduced to the body's span. Tolerances are relative to the
// coordinate scale, per the double-precision stability assumption for d <= 3.

inline double coordinate_scale(const Eigen::MatrixXd& pts) {
    double s = pts.size() == 0 ? 0.0 : pts.cwiseAbs().maxCoeff();
    return std::max(s, 1.0e-30);
}

inline std::vector<int> dedup_points(const Eigen::MatrixXd& pts, double tol) {
    std::vector<int> keep;
    for (int i = 0; i < pts.cols(); ++i) {
        bool dup = false;
        for (int j : keep) {
            if ((pts.col(i) - pts.col(j)).norm() <= tol) {
                dup = true;
                break;
            }
        }
        if (!dup) keep.push_back(i);
    }
    return keep;
}

// 1D: the two extreme coordinates.
inline std::vector<int> hull_1d(const Eigen::MatrixXd& pts) {
    int lo = 0, hi = 0;
    for (int i = 1; i < pts.cols(); ++i) {
        if (pts(0, i) < pts(0, lo)) lo = i;
        if (pts(0, i) > pts(0, hi)) hi = i;
    }
    if (lo == hi) return {lo};
    return {lo, hi};
}

// 2D monotone chain; returns CCW vertex indices, strictly convex
// (collinear points are dropped).
inline std::vector<int> hull_2d(const Eigen::MatrixXd& pts, double eps) {
    const int n = static_cast<int>(pts.cols());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (pts(0, a) != pts(0, b)) return pts(0, a) < pts(0, b);
        return pts(1, a) < pts(1, b);
    });
    auto cross = [&](int o, int a, int b) {
        return (pts(0, a) - pts(0, o)) * (pts(1, b) - pts(1, o)) -
               (pts(1, a) - pts(1, o)) * (pts(0, b) - pts(0, o));
    };
    std::vector<int> out(2 * n);
    int k = 0;
    for (int ii = 0; ii < n; ++ii) {
        int i = idx[ii];
        while (k >= 2 && cross(out[k - 2], out[k - 1], i) <= eps) --k;
        out[k++] = i;
    }
    int lower = k + 1;
    for (int ii = n - 2; ii >= 0; --ii) {
        int i = idx[ii];
        while (k >= lower && cross(out[k - 2], out[k - 1], i) <= eps) --k;
        out[k++] = i;
    }
    out.resize(k - 1);
    return out;
}

struct Hull3D {
    std::vector<std::array<int, 3>> faces;  // outward CCW triangles
    std::vector<int> vertices;              // indices on the hull
};

// Incremental 3D hull. The caller guarantees affine rank 3.
inline Hull3D hull_3d(const Eigen::MatrixXd& pts, double eps) {
    const int n = static_cast<int>(pts.cols());
    if (n < 4) throw RankDeficient("hull_3d: fewer than 4 points");

    auto tri_normal = [&](int a, int b, int c) -> Eigen::Vector3d {
        Eigen::Vector3d u = pts.col(b).head<3>() - pts.col(a).head<3>();
        Eigen::Vector3d v = pts.col(c).head<3>() - pts.col(a).head<3>();
        return u.cross(v);
    };

    // Initial simplex: spread-out extremes.
    int i0 = 0;
    for (int i = 1; i < n; ++i)
        if (pts(0, i) < pts(0, i0)) i0 = i;
    int i1 = -1;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
        double d = (pts.col(i) - pts.col(i0)).norm();
        if (d > best) {
            best = d;
            i1 = i;
        }
    }
    if (best <= eps) throw RankDeficient("hull_3d: degenerate point set");
    int i2 = -1;
    best = -1.0;
    Eigen::Vector3d dir = (pts.col(i1).head<3>() - pts.col(i0).head<3>()).normalized();
    for (int i = 0; i < n; ++i) {
        Eigen::Vector3d w = pts.col(i).head<3>() - pts.col(i0).head<3>();
        double d = (w - w.dot(dir) * dir).norm();
        if (d > best) {
            best = d;
            i2 = i;
        }
    }
    if (best <= eps) throw RankDeficient("hull_3d: collinear point set");
    Eigen::Vector3d nrm = tri_normal(i0, i1, i2).normalized();
    int i3 = -1;
    best = -1.0;
    for (int i = 0; i < n; ++i) {
        double d = std::abs(nrm.dot(pts.col(i).head<3>() - pts.col(i0).head<3>()));
        if (d > best) {
            best = d;
            i3 = i;
        }
    }
    if (best <= eps) throw RankDeficient("hull_3d: coplanar point set");

    std::vector<std::array<int, 3>> faces;
    auto add_face = [&](int a, int b, int c, const Eigen::Vector3d& inside) {
        Eigen::Vector3d nn = tri_normal(a, b, c);
        if (nn.dot(inside - pts.col(a).head<3>()) > 0) std::swap(b, c);
        faces.push_back({a, b, c});
    };
    Eigen::Vector3d centroid = (pts.col(i0).head<3>() + pts.col(i1).head<3>() +
                                pts.col(i2).head<3>() + pts.col(i3).head<3>()) /
                               4.0;
    add_face(i0, i1, i2, centroid);
    add_face(i0, i1, i3, centroid);
    add_face(i0, i2, i3, centroid);
    add_face(i1, i2, i3, centroid);

    std::vector<char> used(n, 0);
    used[i0] = used[i1] = used[i2] = used[i3] = 1;
    for (int p = 0; p < n; ++p) {
        if (used[p]) continue;
        used[p] = 1;
        Eigen::Vector3d x = pts.col(p).head<3>();
        std::vector<char> dead(faces.size(), 0);
        bool any = false;
        for (size_t f = 0; f < faces.size(); ++f) {
            Eigen::Vector3d nn = tri_normal(faces[f][0], faces[f][1], faces[f][2]);
            double d = nn.dot(x - pts.col(faces[f][0]).head<3>());
            if (d > eps * nn.norm()) {
                dead[f] = 1;
                any = true;
            }
        }
        if (!any) continue;
        // Horizon: directed edges of dead faces whose reverse lies on a live face.
        std::map<std::pair<int, int>, int> edge_count;
        for (size_t f = 0; f < faces.size(); ++f) {
            if (!dead[f]) continue;
            for (int e = 0; e < 3; ++e) {
                int a = faces[f][e], b = faces[f][(e + 1) % 3];
                edge_count[{a, b}]++;
            }
        }
        std::vector<std::array<int, 3>> next;
        for (size_t f = 0; f < faces.size(); ++f)
            if (!dead[f]) next.push_back(faces[f]);
        for (auto& [edge, cnt] : edge_count) {
            (void)cnt;
            if (edge_count.count({edge.second, edge.first}) == 0) {
                next.push_back({edge.first, edge.second, p});
            }
        }
        faces.swap(next);
    }

    Hull3D out;
    out.faces = std::move(faces);
    std::vector<char> on_hull(n, 0);
    for (auto& f : out.faces)
        for (int v : f) on_hull[v] = 1;
    for (int i = 0; i < n; ++i)
        if (on_hull[i]) out.vertices.push_back(i);
    return out;
}

}  // namespace amink::hull
