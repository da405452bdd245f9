#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "amink/errors.hpp"
#include "amink/hull.hpp"
#include "amink/linear_program.hpp"
#include "amink/quadrature.hpp"

namespace amink {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// A linear subspace of R^n given by orthonormal basis rows.
struct Subspace {
    int ambient_dim = 0;
    int dim = 0;
    Mat basis;  // dim x ambient_dim, orthonormal rows

    static Subspace zero(int n) {
        Subspace s;
        s.ambient_dim = n;
        s.dim = 0;
        s.basis = Mat::Zero(0, n);
        return s;
    }

    static Subspace full(int n) {
        Subspace s;
        s.ambient_dim = n;
        s.dim = n;
        s.basis = Mat::Identity(n, n);
        return s;
    }

    // Orthonormalizes a spanning set (rows); drops dependent rows.
    static Subspace from_rows(const Mat& rows, int ambient) {
        if (rows.cols() != ambient) throw DimMismatch("subspace rows vs ambient");
        Eigen::JacobiSVD<Mat> svd(rows.transpose(), Eigen::ComputeThinU);
        double scale = std::max(1e-300, svd.singularValues().size() > 0
                                            ? svd.singularValues()(0)
                                            : 0.0);
        int rank = 0;
        for (int i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()(i) > 1e-12 * scale) ++rank;
        Subspace s;
        s.ambient_dim = ambient;
        s.dim = rank;
        s.basis = svd.matrixU().leftCols(rank).transpose();
        return s;
    }

    Subspace complement() const {
        if (dim == 0) return full(ambient_dim);
        Eigen::HouseholderQR<Mat> qr(basis.transpose());
        Mat q = qr.householderQ() * Mat::Identity(ambient_dim, ambient_dim);
        Subspace s;
        s.ambient_dim = ambient_dim;
        s.dim = ambient_dim - dim;
        s.basis = q.rightCols(ambient_dim - dim).transpose();
        return s;
    }

    Vec project(const Vec& v) const {
        if (dim == 0) return Vec::Zero(ambient_dim);
        return basis.transpose() * (basis * v);
    }

    Vec coords(const Vec& v) const { return basis * v; }
};

// Facet of the body in its span coordinates: {y : normal.y <= offset}.
struct Facet {
    Vec normal;     // unit length, intrinsic_dim entries
    double offset;  // > 0 because 0 is in the relative interior
};

// Vertex-represented convex body with 0 in its relative interior.
// span_basis columns are orthonormal and vertices satisfy
// vertices = span_basis * span_coords up to 1e-9 of the coordinate scale.
// Immutable after construction; all operations are pure.
class ConvexBody {
public:
    int ambient_dim = 0;
    int intrinsic_dim = 0;
    Mat vertices;     // ambient_dim x V, extreme points only
    Mat span_basis;   // ambient_dim x intrinsic_dim, orthonormal columns
    Mat span_coords;  // intrinsic_dim x V
    std::vector<Facet> facets;  // cached for intrinsic_dim in [1, 3]
    double exact_volume = std::numeric_limits<double>::quiet_NaN();
    double circumradius = 0.0;  // max vertex norm
    double inradius = 0.0;      // within the span; min facet offset

    int vertex_count() const { return static_cast<int>(vertices.cols()); }
    bool full_dimensional() const { return intrinsic_dim == ambient_dim; }
    double diameter() const {
        double d = 0.0;
        for (int i = 0; i < vertices.cols(); ++i)
            for (int j = i + 1; j < vertices.cols(); ++j)
                d = std::max(d, (vertices.col(i) - vertices.col(j)).norm());
        return d;
    }
    Subspace span() const {
        Subspace s;
        s.ambient_dim = ambient_dim;
        s.dim = intrinsic_dim;
        s.basis = span_basis.transpose();
        return s;
    }
};

namespace detail {

inline std::vector<Facet> facets_1d(const Mat& w) {
    double lo = w.row(0).minCoeff(), hi = w.row(0).maxCoeff();
    std::vector<Facet> f(2);
    f[0].normal = Vec::Ones(1);
    f[0].offset = hi;
    f[1].normal = -Vec::Ones(1);
    f[1].offset = -lo;
    return f;
}

inline std::vector<Facet> facets_2d(const Mat& w, const std::vector<int>& ccw) {
    std::vector<Facet> out;
    int m = static_cast<int>(ccw.size());
    for (int i = 0; i < m; ++i) {
        Vec a = w.col(ccw[i]), b = w.col(ccw[(i + 1) % m]);
        Vec e = b - a;
        Vec nrm(2);
        nrm << e(1), -e(0);  // outward for CCW order
        double len = nrm.norm();
        if (len < 1e-300) continue;
        nrm /= len;
        out.push_back({nrm, nrm.dot(a)});
    }
    return out;
}

inline std::vector<Facet> facets_3d(const Mat& w, const hull::Hull3D& h) {
    std::map<std::array<long long, 4>, Facet> uniq;
    double scale = hull::coordinate_scale(w);
    for (auto& f : h.faces) {
        Eigen::Vector3d a = w.col(f[0]), b = w.col(f[1]), c = w.col(f[2]);
        Eigen::Vector3d nrm = (b - a).cross(c - a);
        double len = nrm.norm();
        if (len < 1e-14 * scale * scale) continue;
        nrm /= len;
        double off = nrm.dot(a);
        std::array<long long, 4> key{
            static_cast<long long>(std::llround(nrm(0) * 1e9)),
            static_cast<long long>(std::llround(nrm(1) * 1e9)),
            static_cast<long long>(std::llround(nrm(2) * 1e9)),
            static_cast<long long>(std::llround(off / scale * 1e9))};
        Facet fc;
        fc.normal = nrm;
        fc.offset = off;
        uniq.emplace(key, fc);
    }
    std::vector<Facet> out;
    out.reserve(uniq.size());
    for (auto& [k, v] : uniq) out.push_back(v);
    return out;
}

inline double polygon_area(const Mat& w, const std::vector<int>& ccw) {
    double a = 0.0;
    int m = static_cast<int>(ccw.size());
    for (int i = 0; i < m; ++i) {
        const auto& p = w.col(ccw[i]);
        const auto& q = w.col(ccw[(i + 1) % m]);
        a += p(0) * q(1) - q(0) * p(1);
    }
    return 0.5 * std::abs(a);
}

inline double hull_volume_3d(const Mat& w, const hull::Hull3D& h) {
    // Tetra fan from the origin; faces are outward so each term is >= 0.
    double v = 0.0;
    for (auto& f : h.faces) {
        Eigen::Matrix3d m;
        m.col(0) = w.col(f[0]);
        m.col(1) = w.col(f[1]);
        m.col(2) = w.col(f[2]);
        v += m.determinant();
    }
    return v / 6.0;
}

// Extreme-point filter for intrinsic dim >= 4: p is extreme iff it is not a
// convex combination of the others.
inline std::vector<int> extreme_filter_lp(const Mat& u) {
    SimplexSolver lp;
    int m = static_cast<int>(u.cols());
    int d = static_cast<int>(u.rows());
    std::vector<int> keep;
    for (int i = 0; i < m; ++i) {
        Mat A(d + 1, m - 1);
        int col = 0;
        for (int j = 0; j < m; ++j) {
            if (j == i) continue;
            A.block(0, col, d, 1) = u.col(j);
            A(d, col) = 1.0;
            ++col;
        }
        Vec b(d + 1);
        b.head(d) = u.col(i);
        b(d) = 1.0;
        if (!lp.feasible(A, b)) keep.push_back(i);
    }
    return keep;
}

inline bool origin_in_relint_lp(const Mat& u) {
    // max t  s.t.  sum mu_i u_i + t sum u_i = 0, sum mu + V t = 1, mu,t >= 0;
    // optimum > 0 iff 0 is a strictly positive convex combination.
    SimplexSolver lp;
    int m = static_cast<int>(u.cols());
    int d = static_cast<int>(u.rows());
    Mat A(d + 1, m + 1);
    A.block(0, 0, d, m) = u;
    A.block(0, m, d, 1) = u.rowwise().sum();
    A.row(d).setOnes();
    A(d, m) = static_cast<double>(m);
    Vec b = Vec::Zero(d + 1);
    b(d) = 1.0;
    Vec c = Vec::Zero(m + 1);
    c(m) = 1.0;
    auto res = lp.maximize(A, b, c);
    return res.status == LpResult::Status::Optimal && res.objective > 1e-12;
}

}  // namespace detail

inline ConvexBody make_body(const Mat& points, int ambient_dim, bool recenter) {
    if (points.cols() == 0) throw EmptyInput("make_body: no points");
    if (points.rows() != ambient_dim) throw DimMismatch("make_body: point dim");

    double scale = hull::coordinate_scale(points);
    double tol = 1e-9 * scale;

    std::vector<int> uniq = hull::dedup_points(points, tol);
    Mat pts(ambient_dim, uniq.size());
    for (size_t i = 0; i < uniq.size(); ++i) pts.col(i) = points.col(uniq[i]);

    // Affine span by rank-revealing decomposition of point differences.
    Vec ref = pts.rowwise().mean();
    Mat diff = pts.colwise() - ref;
    Eigen::JacobiSVD<Mat> svd(diff, Eigen::ComputeThinU);
    int d = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol) ++d;

    ConvexBody body;
    body.ambient_dim = ambient_dim;
    body.intrinsic_dim = d;
    body.span_basis = svd.matrixU().leftCols(d);

    Mat u = body.span_basis.transpose() * diff;  // affine coordinates, d x m

    std::vector<int> ex;
    hull::Hull3D h3;
    if (d == 0) {
        ex = {0};
    } else if (d == 1) {
        ex = hull::hull_1d(u);
    } else if (d == 2) {
        ex = hull::hull_2d(u, 1e-9 * scale * scale);
    } else if (d == 3) {
        h3 = hull::hull_3d(u, tol);
        ex = h3.vertices;
    } else {
        ex = detail::extreme_filter_lp(u);
    }

    Mat w(d, ex.size());
    for (size_t i = 0; i < ex.size(); ++i) w.col(i) = u.col(ex[i]);

    if (recenter) {
        Vec centroid = w.rowwise().mean();
        w.colwise() -= centroid;
        body.vertices = body.span_basis * w;
    } else {
        // 0 must lie in the affine span (then span coords are just B^T p).
        Vec resid = ref - body.span_basis * (body.span_basis.transpose() * ref);
        if (resid.norm() > tol)
            throw OriginNotInteriorError("make_body: 0 not in the affine span");
        body.vertices = Mat(ambient_dim, ex.size());
        for (size_t i = 0; i < ex.size(); ++i) body.vertices.col(i) = pts.col(ex[i]);
        w = body.span_basis.transpose() * body.vertices;
    }
    body.span_coords = w;

    // Facets (d <= 3) and the exact span-coordinate volume.
    if (d == 0) {
        body.exact_volume = 1.0;  // H^0 convention
        if (!recenter && body.vertices.col(0).norm() > tol)
            throw OriginNotInteriorError("make_body: point body away from 0");
        body.vertices.col(0).setZero();
        body.span_coords = Mat::Zero(0, 1);
    } else if (d == 1) {
        body.facets = detail::facets_1d(w);
        body.exact_volume = w.row(0).maxCoeff() - w.row(0).minCoeff();
    } else if (d == 2) {
        std::vector<int> ccw = hull::hull_2d(w, 1e-9 * scale * scale);
        body.facets = detail::facets_2d(w, ccw);
        body.exact_volume = detail::polygon_area(w, ccw);
    } else if (d == 3) {
        hull::Hull3D hw = hull::hull_3d(w, tol);
        body.facets = detail::facets_3d(w, hw);
        body.exact_volume = detail::hull_volume_3d(w, hw);
    }

    if (!recenter && d >= 1) {
        if (d <= 3) {
            for (auto& f : body.facets)
                if (f.offset <= 1e-12 * scale)
                    throw OriginNotInteriorError("make_body: 0 not in relint");
        } else if (!detail::origin_in_relint_lp(w)) {
            throw OriginNotInteriorError("make_body: 0 not in relint");
        }
    }

    body.circumradius = 0.0;
    for (int i = 0; i < body.vertices.cols(); ++i)
        body.circumradius = std::max(body.circumradius, body.vertices.col(i).norm());
    body.inradius = 0.0;
    if (!body.facets.empty()) {
        body.inradius = std::numeric_limits<double>::infinity();
        for (auto& f : body.facets) body.inradius = std::min(body.inradius, f.offset);
    }
    return body;
}

inline ConvexBody make_body(const std::vector<Vec>& points, int ambient_dim,
                            bool recenter) {
    if (points.empty()) throw EmptyInput("make_body: no points");
    Mat m(ambient_dim, points.size());
    for (size_t i = 0; i < points.size(); ++i) {
        if (points[i].size() != ambient_dim) throw DimMismatch("make_body point");
        m.col(i) = points[i];
    }
    return make_body(m, ambient_dim, recenter);
}

// Inscribed polytope realization of the Euclidean ball (regular K-gon in 2D,
// Fibonacci lattice in 3D). The volume bias is one-sided (from below).
inline ConvexBody make_ball_polytope(int dim, double radius, int facet_count) {
    if (dim < 1) throw NegativeDim("ball dim");
    if (radius <= 0) throw NonpositiveRadius("ball radius");
    if (dim == 1) {
        Mat v(1, 2);
        v << radius, -radius;
        return make_body(v, 1, false);
    }
    Mat dirs = sphere_lattice(dim, facet_count);
    return make_body(radius * dirs, dim, false);
}

inline double support(const ConvexBody& c, const Vec& y) {
    if (y.size() != c.ambient_dim) throw DimMismatch("support direction");
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < c.vertices.cols(); ++i)
        best = std::max(best, c.vertices.col(i).dot(y));
    return best;
}

namespace detail {

// Radial function in span coordinates via the LP
//   max s  s.t.  sum lambda_i w_i = s y, sum lambda_i = 1, lambda,s >= 0.
inline double radial_span_lp(const Mat& w, const Vec& y, double pivot_tol = 1e-12) {
    int d = static_cast<int>(w.rows());
    int m = static_cast<int>(w.cols());
    Mat A(d + 1, m + 1);
    A.block(0, 0, d, m) = w;
    A.block(0, m, d, 1) = -y;
    A.row(d).setOnes();
    A(d, m) = 0.0;
    Vec b = Vec::Zero(d + 1);
    b(d) = 1.0;
    Vec c = Vec::Zero(m + 1);
    c(m) = 1.0;
    auto res = SimplexSolver(pivot_tol).maximize(A, b, c);
    if (res.status != LpResult::Status::Optimal)
        throw Error("radial LP did not reach an optimum");
    return res.objective;
}

}  // namespace detail

// Largest t >= 0 with t*x in C; 0 when x leaves the span.
inline double radial(const ConvexBody& c, const Vec& x) {
    if (x.size() != c.ambient_dim) throw DimMismatch("radial direction");
    double nx = x.norm();
    if (nx == 0.0) throw ZeroDirection("radial: x = 0");
    Vec proj = c.span_basis * (c.span_basis.transpose() * x);
    if ((x - proj).norm() > 1e-9 * nx) return 0.0;
    if (c.intrinsic_dim == 0) return 0.0;
    Vec y = c.span_basis.transpose() * x;
    return detail::radial_span_lp(c.span_coords, y);
}

// Minkowski functional inf{t > 0 : v in tC}; +inf off the span.
// Facet evaluation where cached, LP reciprocal otherwise.
inline double gauge(const ConvexBody& c, const Vec& v) {
    if (v.size() != c.ambient_dim) throw DimMismatch("gauge vector");
    double nv = v.norm();
    if (nv == 0.0) return 0.0;
    Vec proj = c.span_basis * (c.span_basis.transpose() * v);
    if ((v - proj).norm() > 1e-9 * nv)
        return std::numeric_limits<double>::infinity();
    if (c.intrinsic_dim == 0) return std::numeric_limits<double>::infinity();
    Vec y = c.span_basis.transpose() * v;
    if (!c.facets.empty()) {
        double g = 0.0;
        for (const auto& f : c.facets)
            g = std::max(g, f.normal.dot(y) / f.offset);
        return g;
    }
    double rho = detail::radial_span_lp(c.span_coords, y);
    if (rho <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / rho;
}

inline ConvexBody minkowski_sum(const ConvexBody& a, const ConvexBody& b) {
    if (a.ambient_dim != b.ambient_dim) throw DimMismatch("minkowski_sum");
    Mat sums(a.ambient_dim, a.vertices.cols() * b.vertices.cols());
    int k = 0;
    for (int i = 0; i < a.vertices.cols(); ++i)
        for (int j = 0; j < b.vertices.cols(); ++j)
            sums.col(k++) = a.vertices.col(i) + b.vertices.col(j);
    return make_body(sums, a.ambient_dim, false);
}

inline ConvexBody scale(const ConvexBody& c, double a) {
    if (a == 0.0) throw ZeroScale("scale: a = 0");
    return make_body(Mat(a * c.vertices), c.ambient_dim, false);
}

inline ConvexBody project_body(const ConvexBody& c, const Subspace& l) {
    if (l.ambient_dim != c.ambient_dim) throw DimMismatch("project_body");
    Mat proj(c.ambient_dim, c.vertices.cols());
    for (int i = 0; i < c.vertices.cols(); ++i)
        proj.col(i) = l.project(c.vertices.col(i));
    return make_body(proj, c.ambient_dim, false);
}

// Exact H^d volume in span coordinates, d <= 3.
inline double body_volume(const ConvexBody& c) {
    if (c.intrinsic_dim > 3)
        throw DimTooLarge("body_volume: exact mode needs intrinsic_dim <= 3");
    return c.exact_volume;
}

// Sphere-quadrature volume (1/d) * integral of rho^d over S^{d-1}.
inline double body_volume_quadrature(const ConvexBody& c, int count = 65536) {
    int d = c.intrinsic_dim;
    if (d == 0) return 1.0;
    Mat dirs = sphere_lattice(d, count);
    double acc = 0.0;
    for (int i = 0; i < dirs.cols(); ++i) {
        Vec u = c.span_basis * dirs.col(i);
        double rho = radial(c, u);
        acc += std::pow(rho, d);
    }
    return acc / dirs.cols() * unit_ball_volume(d);
}

// Ambient Lebesgue volume: 0 unless the body is full-dimensional.
inline double ambient_volume(const ConvexBody& c) {
    return c.full_dimensional() ? body_volume(c) : 0.0;
}

namespace detail {

inline void add_unit(std::vector<Vec>& dirs, const Vec& v) {
    double n = v.norm();
    if (n > 1e-14) dirs.push_back(v / n);
}

}  // namespace detail

// Hausdorff metric as the sup-norm gap of support functions. Exact in
// ambient dim 2 over the finite candidate set (normal-fan boundaries of both
// bodies and all vertex-difference directions); lattice-sampled in dim >= 3
// with additive error at most (diam C + diam K) * covering angle.
inline double hausdorff_distance(const ConvexBody& c, const ConvexBody& k,
                                 int resolution = 4096) {
    if (c.ambient_dim != k.ambient_dim) throw DimMismatch("hausdorff_distance");
    int n = c.ambient_dim;
    std::vector<Vec> dirs;
    if (n == 1) {
        dirs.push_back(Vec::Ones(1));
        dirs.push_back(-Vec::Ones(1));
    } else if (n == 2) {
        for (const ConvexBody* b : {&c, &k}) {
            if (b->intrinsic_dim == 2) {
                for (const auto& f : b->facets)
                    detail::add_unit(dirs, b->span_basis * f.normal);
            } else if (b->intrinsic_dim == 1) {
                Vec dir = b->span_basis.col(0);
                Vec perp(2);
                perp << -dir(1), dir(0);
                detail::add_unit(dirs, perp);
                detail::add_unit(dirs, Vec(-perp));
                detail::add_unit(dirs, dir);
                detail::add_unit(dirs, Vec(-dir));
            }
            for (int i = 0; i < b->vertices.cols(); ++i)
                detail::add_unit(dirs, b->vertices.col(i));
        }
        for (int i = 0; i < c.vertices.cols(); ++i)
            for (int j = 0; j < k.vertices.cols(); ++j) {
                Vec d = c.vertices.col(i) - k.vertices.col(j);
                detail::add_unit(dirs, d);
                detail::add_unit(dirs, Vec(-d));
            }
    } else {
        Mat lattice = sphere_lattice(n, resolution);
        for (int i = 0; i < lattice.cols(); ++i) dirs.push_back(lattice.col(i));
    }
    double best = 0.0;
    for (const auto& u : dirs)
        best = std::max(best, std::abs(support(c, u) - support(k, u)));
    return best;
}

// Mixed volumes V_n(K[i], C[n-i]) from exact evaluations of the volume
// polynomial lambda^n(K + rC) at r = 1..n+1.
inline std::vector<double> mixed_volumes(const ConvexBody& k, const ConvexBody& c) {
    if (k.ambient_dim != c.ambient_dim) throw DimMismatch("mixed_volumes");
    int n = k.ambient_dim;
    if (n > 3) throw DimTooLarge("mixed_volumes: ambient dim > 3");
    Mat vander(n + 1, n + 1);
    Vec f(n + 1);
    for (int s = 0; s <= n; ++s) {
        double r = s + 1.0;
        f(s) = ambient_volume(minkowski_sum(k, scale(c, r)));
        double p = 1.0;
        for (int m = 0; m <= n; ++m) {
            vander(s, m) = p;
            p *= r;
        }
    }
    Vec coeff = vander.fullPivLu().solve(f);
    std::vector<double> mv(n + 1);
    for (int i = 0; i <= n; ++i) mv[i] = coeff(n - i) / binomial(n, i);
    return mv;
}

}  // namespace amink
