#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "amink/convex.hpp"
#include "amink/errors.hpp"
#include "amink/quadrature.hpp"

namespace amink {

// Parametrized C^1 piece g: domain box in R^k -> R^n, injective on the
// interior. Catalog kinds carry analytic Jacobians; user parametric curves
// may fall back to central finite differences (step 1e-6, one Richardson
// level, ~1e-10 accuracy in double).
class Patch {
public:
    enum class Kind {
        Segment,
        PolylinePiece,
        CircleArc,
        ParametricCurve,
        GraphSurface,
        SpherePatch,
        Triangle,
        Slab,
        Point
    };

    Kind kind = Kind::Segment;
    int param_dim = 0;
    int ambient_dim = 0;
    std::vector<std::array<double, 2>> domain;
    bool analytic_jacobian = true;

    std::function<Vec(const Vec&)> position;
    std::function<Mat(const Vec&)> jacobian;  // unset => finite differences

    static Patch segment(const Vec& a, const Vec& b) {
        Patch p;
        p.kind = Kind::Segment;
        p.param_dim = 1;
        p.ambient_dim = static_cast<int>(a.size());
        p.domain = {{0.0, 1.0}};
        Vec d = b - a;
        p.position = [a, d](const Vec& u) -> Vec { return a + u(0) * d; };
        p.jacobian = [d](const Vec&) -> Mat { return d; };
        return p;
    }

    static Patch polyline_piece(const Vec& a, const Vec& b) {
        Patch p = segment(a, b);
        p.kind = Kind::PolylinePiece;
        return p;
    }

    static Patch circle_arc(const Vec& center, double radius, double t0, double t1) {
        Patch p;
        p.kind = Kind::CircleArc;
        p.param_dim = 1;
        p.ambient_dim = 2;
        p.domain = {{t0, t1}};
        p.position = [center, radius](const Vec& u) -> Vec {
            Vec x(2);
            x << center(0) + radius * std::cos(u(0)),
                center(1) + radius * std::sin(u(0));
            return x;
        };
        p.jacobian = [radius](const Vec& u) -> Mat {
            Mat j(2, 1);
            j << -radius * std::sin(u(0)), radius * std::cos(u(0));
            return j;
        };
        return p;
    }

    // Graph z = f(x, y) over a box, f quadratic with coefficient keys
    // {c, x, y, x2, xy, y2}.
    static Patch graph_surface(const std::map<std::string, double>& coeffs,
                               std::array<std::array<double, 2>, 2> dom) {
        Patch p;
        p.kind = Kind::GraphSurface;
        p.param_dim = 2;
        p.ambient_dim = 3;
        p.domain = {dom[0], dom[1]};
        auto at = [coeffs](const std::string& k) {
            auto it = coeffs.find(k);
            return it == coeffs.end() ? 0.0 : it->second;
        };
        double c0 = at("c"), cx = at("x"), cy = at("y");
        double cxx = at("x2"), cxy = at("xy"), cyy = at("y2");
        p.position = [=](const Vec& u) -> Vec {
            double x = u(0), y = u(1);
            Vec out(3);
            out << x, y, c0 + cx * x + cy * y + cxx * x * x + cxy * x * y + cyy * y * y;
            return out;
        };
        p.jacobian = [=](const Vec& u) -> Mat {
            double x = u(0), y = u(1);
            Mat j(3, 2);
            j << 1, 0, 0, 1, cx + 2 * cxx * x + cxy * y, cy + cxy * x + 2 * cyy * y;
            return j;
        };
        return p;
    }

    // Spherical chart (theta azimuth, phi polar angle from +z).
    static Patch sphere_patch(const Vec& center, double radius,
                              std::array<double, 2> theta, std::array<double, 2> phi) {
        Patch p;
        p.kind = Kind::SpherePatch;
        p.param_dim = 2;
        p.ambient_dim = 3;
        p.domain = {theta, phi};
        p.position = [center, radius](const Vec& u) -> Vec {
            double th = u(0), ph = u(1);
            Vec x(3);
            x << center(0) + radius * std::cos(th) * std::sin(ph),
                center(1) + radius * std::sin(th) * std::sin(ph),
                center(2) + radius * std::cos(ph);
            return x;
        };
        p.jacobian = [radius](const Vec& u) -> Mat {
            double th = u(0), ph = u(1);
            Mat j(3, 2);
            j << -radius * std::sin(th) * std::sin(ph), radius * std::cos(th) * std::cos(ph),
                radius * std::cos(th) * std::sin(ph), radius * std::sin(th) * std::cos(ph),
                0.0, -radius * std::sin(ph);
            return j;
        };
        return p;
    }

    // Flat triangle via the collapsed-square chart
    // g(u, w) = a + u (b-a) + w (1-u)(c-a); interior nodes keep full rank.
    static Patch triangle(const Vec& a, const Vec& b, const Vec& c) {
        Patch p;
        p.kind = Kind::Triangle;
        p.param_dim = 2;
        p.ambient_dim = static_cast<int>(a.size());
        p.domain = {{{0.0, 1.0}}, {{0.0, 1.0}}};
        Vec ab = b - a, ac = c - a;
        p.position = [a, ab, ac](const Vec& u) -> Vec {
            return a + u(0) * ab + u(1) * (1.0 - u(0)) * ac;
        };
        p.jacobian = [ab, ac](const Vec& u) -> Mat {
            Mat j(ab.size(), 2);
            j.col(0) = ab - u(1) * ac;
            j.col(1) = (1.0 - u(0)) * ac;
            return j;
        };
        return p;
    }

    static Patch parametric_curve(int ambient, std::array<double, 2> dom,
                                  std::function<Vec(double)> f,
                                  std::function<Vec(double)> df = nullptr) {
        Patch p;
        p.kind = Kind::ParametricCurve;
        p.param_dim = 1;
        p.ambient_dim = ambient;
        p.domain = {dom};
        p.position = [f](const Vec& u) -> Vec { return f(u(0)); };
        if (df) {
            p.jacobian = [df](const Vec& u) -> Mat { return df(u(0)); };
        } else {
            p.analytic_jacobian = false;
        }
        return p;
    }

    static Patch helix(double radius, double pitch, std::array<double, 2> theta) {
        auto f = [radius, pitch](double t) -> Vec {
            Vec x(3);
            x << radius * std::cos(t), radius * std::sin(t), pitch * t;
            return x;
        };
        auto df = [radius, pitch](double t) -> Vec {
            Vec x(3);
            x << -radius * std::sin(t), radius * std::cos(t), pitch;
            return x;
        };
        return parametric_curve(3, theta, f, df);
    }

    // Full-dimensional piece (k = n): the identity chart over a box.
    static Patch slab(const std::vector<std::array<double, 2>>& box) {
        Patch p;
        p.kind = Kind::Slab;
        p.param_dim = static_cast<int>(box.size());
        p.ambient_dim = p.param_dim;
        p.domain = box;
        int n = p.param_dim;
        p.position = [](const Vec& u) -> Vec { return u; };
        p.jacobian = [n](const Vec&) -> Mat { return Mat::Identity(n, n); };
        return p;
    }

    static Patch point(const Vec& x) {
        Patch p;
        p.kind = Kind::Point;
        p.param_dim = 0;
        p.ambient_dim = static_cast<int>(x.size());
        p.position = [x](const Vec&) -> Vec { return x; };
        p.jacobian = [x](const Vec&) -> Mat { return Mat(x.size(), 0); };
        return p;
    }

    bool in_domain(const Vec& u, double slack = 1e-12) const {
        if (u.size() != param_dim) return false;
        for (int i = 0; i < param_dim; ++i) {
            double w = domain[i][1] - domain[i][0];
            double tol = slack * std::max(1.0, std::abs(w));
            if (u(i) < domain[i][0] - tol || u(i) > domain[i][1] + tol) return false;
        }
        return true;
    }
};

// Finite union of k-patches with pairwise H^k-null overlaps (by construction).
struct RectifiableSet {
    int ambient_dim = 0;
    int k = 0;
    std::vector<Patch> patches;
};

inline RectifiableSet make_set(std::vector<Patch> patches) {
    if (patches.empty()) throw EmptyInput("make_set: no patches");
    RectifiableSet s;
    s.ambient_dim = patches.front().ambient_dim;
    s.k = patches.front().param_dim;
    for (const auto& p : patches) {
        if (p.ambient_dim != s.ambient_dim || p.param_dim != s.k)
            throw DimMismatch("make_set: mixed patch dimensions");
    }
    s.patches = std::move(patches);
    return s;
}

// The unit circle split at the axis directions, so piecewise-linear
// integrands of axis-aligned structuring elements stay smooth per patch.
inline RectifiableSet unit_circle(double radius = 1.0, double offset = 0.0) {
    Vec c = Vec::Zero(2);
    std::vector<Patch> arcs;
    const double q = std::numbers::pi / 2.0;
    for (int i = 0; i < 4; ++i)
        arcs.push_back(Patch::circle_arc(c, radius, offset + i * q, offset + (i + 1) * q));
    return make_set(std::move(arcs));
}

// Example family: segments conv{(-1/n, 1/n), (1/n, 1/n)} for n = 1..M plus
// the limit point at the origin (kept as a degenerate segment).
inline RectifiableSet e1_family(int m) {
    if (m < 1) throw EmptyInput("e1_family: M < 1");
    std::vector<Patch> ps;
    for (int n = 1; n <= m; ++n) {
        double xn = 1.0 / n;
        Vec a(2), b(2);
        a << -xn, xn;
        b << xn, xn;
        ps.push_back(Patch::segment(a, b));
    }
    Vec o = Vec::Zero(2);
    ps.push_back(Patch::segment(o, o));
    return make_set(std::move(ps));
}

namespace detail {

inline Mat fd_jacobian(const Patch& p, const Vec& u) {
    const double h = 1e-6;
    Mat j(p.ambient_dim, p.param_dim);
    for (int a = 0; a < p.param_dim; ++a) {
        auto diff = [&](double step) -> Vec {
            Vec up = u, um = u;
            up(a) += step;
            um(a) -= step;
            return (p.position(up) - p.position(um)) / (2.0 * step);
        };
        Vec d1 = diff(h);
        Vec d2 = diff(h / 2.0);
        j.col(a) = (4.0 * d2 - d1) / 3.0;  // one Richardson level
    }
    return j;
}

}  // namespace detail

// g(u) and Dg(u).
inline std::pair<Vec, Mat> eval_patch(const Patch& p, const Vec& u) {
    if (!p.in_domain(u)) throw OutOfDomain("eval_patch: u outside the domain");
    Vec x = p.position(u);
    Mat j = p.jacobian ? p.jacobian(u) : detail::fd_jacobian(p, u);
    return {std::move(x), std::move(j)};
}

namespace detail {

inline Eigen::JacobiSVD<Mat> full_svd(const Mat& j) {
    return Eigen::JacobiSVD<Mat>(j, Eigen::ComputeFullU);
}

inline void check_rank(const Eigen::JacobiSVD<Mat>& svd, int k) {
    if (k == 0) return;
    if (svd.singularValues().size() < k || svd.singularValues()(k - 1) < 1e-8)
        throw RankDeficient("patch jacobian is rank deficient");
}

}  // namespace detail

// Orthonormalized column space of Dg(u): the k-plane T^k_x S.
inline Subspace tangent_space(const Patch& p, const Vec& u) {
    auto [x, j] = eval_patch(p, u);
    (void)x;
    if (p.param_dim == 0) return Subspace::zero(p.ambient_dim);
    auto svd = detail::full_svd(j);
    detail::check_rank(svd, p.param_dim);
    Subspace s;
    s.ambient_dim = p.ambient_dim;
    s.dim = p.param_dim;
    s.basis = svd.matrixU().leftCols(p.param_dim).transpose();
    return s;
}

// Orthogonal complement N^{n-k}_x S of the tangent space.
inline Subspace normal_space(const Patch& p, const Vec& u) {
    auto [x, j] = eval_patch(p, u);
    (void)x;
    if (p.param_dim == 0) return Subspace::full(p.ambient_dim);
    auto svd = detail::full_svd(j);
    detail::check_rank(svd, p.param_dim);
    Subspace s;
    s.ambient_dim = p.ambient_dim;
    s.dim = p.ambient_dim - p.param_dim;
    s.basis = svd.matrixU().rightCols(s.dim).transpose();
    return s;
}

// J_k g = sqrt(det(Dg^T Dg)).
inline double jacobian_k(const Patch& p, const Vec& u) {
    auto [x, j] = eval_patch(p, u);
    (void)x;
    if (p.param_dim == 0) return 1.0;
    double det = (j.transpose() * j).determinant();
    if (!(det > 1e-16)) {
        detail::check_rank(detail::full_svd(j), p.param_dim);
    }
    return std::sqrt(std::max(det, 0.0));
}

namespace detail {

// Tensor Gauss-Legendre sweep over the patch domain.
template <typename Fn>
void for_each_quad_node(const Patch& p, int order, Fn&& fn) {
    const auto& rule = gauss_legendre(order);
    int k = p.param_dim;
    std::vector<int> idx(k, 0);
    Vec u(k);
    for (;;) {
        double wq = 1.0;
        for (int a = 0; a < k; ++a) {
            double lo = p.domain[a][0], hi = p.domain[a][1];
            u(a) = 0.5 * (hi + lo) + 0.5 * (hi - lo) * rule.nodes[idx[a]];
            wq *= 0.5 * (hi - lo) * rule.weights[idx[a]];
        }
        fn(u, wq);
        int a = 0;
        for (; a < k; ++a) {
            if (++idx[a] < order) break;
            idx[a] = 0;
        }
        if (a == k) break;
    }
}

// Largest singular value of Dg probed on a coarse grid; 0 for degenerate
// (zero-measure) patches.
inline double probe_sigma_max(const Patch& p, int grid = 8) {
    if (p.param_dim == 0) return 0.0;
    int k = p.param_dim;
    std::vector<int> idx(k, 0);
    Vec u(k);
    double smax = 0.0;
    for (;;) {
        for (int a = 0; a < k; ++a) {
            double lo = p.domain[a][0], hi = p.domain[a][1];
            u(a) = lo + (hi - lo) * (idx[a] + 0.5) / grid;
        }
        Mat j = p.jacobian ? p.jacobian(u) : fd_jacobian(p, u);
        Eigen::JacobiSVD<Mat> svd(j);
        if (svd.singularValues().size() > 0)
            smax = std::max(smax, svd.singularValues()(0));
        int a = 0;
        for (; a < k; ++a) {
            if (++idx[a] < grid) break;
            idx[a] = 0;
        }
        if (a == k) break;
    }
    return smax;
}

inline bool degenerate_patch(const Patch& p) {
    if (p.param_dim == 0) return false;
    return probe_sigma_max(p) < 1e-14;
}

}  // namespace detail

// H^k(S) by tensor Gauss-Legendre of the given order (points per axis).
// Degenerate zero-measure pieces contribute nothing.
inline double hausdorff_measure(const RectifiableSet& s, int order = 16) {
    if (order < 2) throw BadResolution("hausdorff_measure: order < 2");
    double total = 0.0;
    for (const auto& p : s.patches) {
        if (p.param_dim == 0) {
            total += 1.0;
            continue;
        }
        if (detail::degenerate_patch(p)) continue;
        detail::for_each_quad_node(p, order, [&](const Vec& u, double wq) {
            total += jacobian_k(p, u) * wq;
        });
    }
    return total;
}

// Discretization carrier for tube estimation: points with quadrature
// weights, every set point within density_eps of some cloud point.
struct PointCloud {
    Mat points;  // n x N
    Vec weights;
    double density_eps = 0.0;
    std::vector<int> patch_index;

    int size() const { return static_cast<int>(points.cols()); }
};

inline PointCloud sample_cloud(const RectifiableSet& s, double eps) {
    if (eps <= 0) throw BadResolution("sample_cloud: eps <= 0");
    std::vector<Vec> pts;
    std::vector<double> wts;
    std::vector<int> pidx;
    for (size_t pi = 0; pi < s.patches.size(); ++pi) {
        const Patch& p = s.patches[pi];
        if (p.param_dim == 0) {
            pts.push_back(p.position(Vec(0)));
            wts.push_back(1.0);
            pidx.push_back(static_cast<int>(pi));
            continue;
        }
        int k = p.param_dim;
        double smax = detail::probe_sigma_max(p);
        double spacing = smax < 1e-14
                             ? std::numeric_limits<double>::infinity()
                             : eps / (1.5 * smax * std::sqrt(static_cast<double>(k)));
        std::vector<int> cells(k);
        std::vector<double> step(k);
        double cellvol = 1.0;
        for (int a = 0; a < k; ++a) {
            double len = p.domain[a][1] - p.domain[a][0];
            cells[a] = std::max(1, static_cast<int>(std::ceil(len / spacing)));
            step[a] = len / cells[a];
            cellvol *= step[a];
        }
        std::vector<int> idx(k, 0);
        Vec u(k);
        for (;;) {
            for (int a = 0; a < k; ++a)
                u(a) = p.domain[a][0] + (idx[a] + 0.5) * step[a];
            Mat j = p.jacobian ? p.jacobian(u) : detail::fd_jacobian(p, u);
            double det = (j.transpose() * j).determinant();
            double jk = std::sqrt(std::max(det, 0.0));
            pts.push_back(p.position(u));
            wts.push_back(jk * cellvol);
            pidx.push_back(static_cast<int>(pi));
            int a = 0;
            for (; a < k; ++a) {
                if (++idx[a] < cells[a]) break;
                idx[a] = 0;
            }
            if (a == k) break;
        }
    }
    PointCloud cloud;
    cloud.points = Mat(s.ambient_dim, pts.size());
    cloud.weights = Vec(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        cloud.points.col(i) = pts[i];
        cloud.weights(i) = wts[i];
    }
    cloud.density_eps = eps;
    cloud.patch_index = std::move(pidx);
    return cloud;
}

}  // namespace amink
