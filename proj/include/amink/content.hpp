#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "amink/convex.hpp"
#include "amink/errors.hpp"
#include "amink/rectifiable.hpp"
#include "amink/tube.hpp"

namespace amink {

// Schedule of normalized tube volumes with a linear-in-r extrapolation of
// the r -> 0 limit. Tail min/max stand in for the lower/upper contents of a
// finite schedule; they are never claimed to be the true liminf/limsup.
struct ContentEstimate {
    int k = 0;
    std::vector<double> schedule;  // strictly decreasing radii
    std::vector<double> values;    // M^k_{r,C} per radius
    std::vector<TubeVolumeEstimate> estimates;
    double extrapolated = 0.0;  // +inf sentinel when divergence_flag is set
    double residual = 0.0;
    double lower_tail = 0.0;
    double upper_tail = 0.0;
    bool divergence_flag = false;
};

struct EstimatorParams {
    TubeVolumeEstimate::Method method = TubeVolumeEstimate::Method::Grid;
    double h = 0.0;         // fixed voxel size, or
    double h_over_r = 0.0;  // per-radius h_j = r_j / h_over_r when > 0
    int64_t mc_samples = 200000;
    uint64_t seed = 1;
    double cloud_eps = 0.0;  // 0: derived from the schedule
    int threads = 0;

    double voxel_size(double r) const { return h_over_r > 0 ? r / h_over_r : h; }
};

inline ContentEstimate content_estimate(const RectifiableSet& s, const ConvexBody& c,
                                        int k, const std::vector<double>& schedule,
                                        const EstimatorParams& params) {
    if (schedule.size() < 4) throw ScheduleTooShort("content_estimate: need >= 4 radii");
    for (size_t i = 1; i < schedule.size(); ++i)
        if (!(schedule[i] < schedule[i - 1]))
            throw Error("schedule not decreasing");
    if (schedule.back() <= 0) throw NonpositiveRadius("content_estimate: r <= 0");
    if (k < 0 || k > s.ambient_dim) throw DimMismatch("content_estimate: k");

    const bool grid = params.method == TubeVolumeEstimate::Method::Grid;

    // A fixed cloud_eps means one shared cloud for the whole schedule.
    // Otherwise the cloud is resampled per radius at eps = r/128 (full-dim C)
    // or eps = h/4 (lower-dimensional C, grid mode), which keeps the
    // candidate density proportional to the query scale.
    auto eps_for = [&](double r) {
        if (params.cloud_eps > 0) return params.cloud_eps;
        if (c.full_dimensional()) return r / 128.0;
        return grid ? params.voxel_size(r) / 4.0 : r / 128.0;
    };
    for (double r : schedule) {
        double eps = eps_for(r);
        if (c.full_dimensional()) {
            if (!(r > 100.0 * eps))
                throw ResolutionTooCoarse("content_estimate: r <= 100 * cloud eps");
        } else if (grid && eps > params.voxel_size(r) / 4.0 * (1.0 + 1e-12)) {
            throw ResolutionTooCoarse("content_estimate: lower-dim C needs eps <= h/4");
        }
    }

    ContentEstimate out;
    out.k = k;
    out.schedule = schedule;
    int n = s.ambient_dim;
    PointCloud cloud;
    double cloud_eps = -1.0;
    for (double r : schedule) {
        double eps = eps_for(r);
        if (eps != cloud_eps) {
            cloud = sample_cloud(s, eps);
            cloud_eps = eps;
        }
        TubeVolumeEstimate est;
        if (grid) {
            est = tube_volume(cloud, c, r, GridParams{params.voxel_size(r)},
                              std::nullopt, params.threads);
        } else {
            est = tube_volume_mc(cloud, c, r, McParams{params.mc_samples, params.seed},
                                 std::nullopt, params.threads);
        }
        out.estimates.push_back(est);
        out.values.push_back(normalized_content(est, n, k));
    }

    const int m = static_cast<int>(schedule.size());
    const int q = std::min(5, m);

    // Divergence heuristic: each of the last three values grows >20% over
    // its predecessor. Surfaced in the report, never silently applied.
    out.divergence_flag = true;
    for (int i = m - 3; i < m; ++i) {
        if (!(out.values[i] > 1.2 * out.values[i - 1])) {
            out.divergence_flag = false;
            break;
        }
    }

    out.lower_tail = std::numeric_limits<double>::infinity();
    out.upper_tail = -std::numeric_limits<double>::infinity();
    for (int i = m - q; i < m; ++i) {
        out.lower_tail = std::min(out.lower_tail, out.values[i]);
        out.upper_tail = std::max(out.upper_tail, out.values[i]);
    }

    // Least squares M(r) = M0 + c1 r on the q smallest radii.
    double sr = 0, srr = 0, sv = 0, srv = 0;
    for (int i = m - q; i < m; ++i) {
        double r = schedule[i], v = out.values[i];
        sr += r;
        srr += r * r;
        sv += v;
        srv += r * v;
    }
    double det = q * srr - sr * sr;
    double m0, c1;
    if (std::abs(det) < 1e-300) {
        m0 = sv / q;
        c1 = 0.0;
    } else {
        m0 = (srr * sv - sr * srv) / det;
        c1 = (q * srv - sr * sv) / det;
    }
    double rss = 0;
    for (int i = m - q; i < m; ++i) {
        double e = out.values[i] - (m0 + c1 * schedule[i]);
        rss += e * e;
    }
    out.residual = std::sqrt(rss / q);
    out.extrapolated =
        out.divergence_flag ? std::numeric_limits<double>::infinity() : m0;
    return out;
}

namespace detail {

// Normal space from a patch jacobian already at hand.
inline Subspace normal_from_jacobian(const Mat& j, int n, int k) {
    if (k == 0) return Subspace::full(n);
    auto svd = full_svd(j);
    check_rank(svd, k);
    Subspace s;
    s.ambient_dim = n;
    s.dim = n - k;
    s.basis = svd.matrixU().rightCols(n - k).transpose();
    return s;
}

}  // namespace detail

// Phi_S(C) = (1/omega_{n-k}) * integral over S of H^{n-k}(P_{N_x}(C)) dH^k.
inline double phi_functional(const RectifiableSet& s, const ConvexBody& c, int k,
                             int order = 16) {
    if (k != s.k) throw DimMismatch("phi_functional: k != S.k");
    if (c.ambient_dim != s.ambient_dim) throw DimMismatch("phi_functional: ambient");
    int n = s.ambient_dim;
    double total = 0.0;
    for (const auto& p : s.patches) {
        if (p.param_dim == 0) {
            // point patches: normal space is all of R^n
            ConvexBody proj = project_body(c, Subspace::full(n));
            total += proj.intrinsic_dim == n ? body_volume(proj) : 0.0;
            continue;
        }
        if (detail::degenerate_patch(p)) continue;
        detail::for_each_quad_node(p, order, [&](const Vec& u, double wq) {
            auto [x, j] = eval_patch(p, u);
            (void)x;
            double jk = std::sqrt(std::max(0.0, (j.transpose() * j).determinant()));
            Subspace nsp = detail::normal_from_jacobian(j, n, k);
            double h;
            if (nsp.dim == 0) {
                h = 1.0;  // H^0 of the projected point
            } else {
                ConvexBody proj = project_body(c, nsp);
                h = proj.intrinsic_dim == n - k ? body_volume(proj) : 0.0;
            }
            total += h * jk * wq;
        });
    }
    return total / unit_ball_volume(n - k);
}

// Codimension-1 support-function form (1/2) integral of h_C(nu) + h_C(-nu).
inline double phi_codim1(const RectifiableSet& s, const ConvexBody& c,
                         int order = 16) {
    int n = s.ambient_dim;
    if (s.k != n - 1) throw DimMismatch("phi_codim1: k must be n-1");
    if (c.ambient_dim != n) throw DimMismatch("phi_codim1: ambient");
    double total = 0.0;
    for (const auto& p : s.patches) {
        if (detail::degenerate_patch(p)) continue;
        detail::for_each_quad_node(p, order, [&](const Vec& u, double wq) {
            auto [x, j] = eval_patch(p, u);
            (void)x;
            double jk = std::sqrt(std::max(0.0, (j.transpose() * j).determinant()));
            Subspace nsp = detail::normal_from_jacobian(j, n, s.k);
            Vec nu = nsp.basis.row(0).transpose();
            total += 0.5 * (support(c, nu) + support(c, Vec(-nu))) * jk * wq;
        });
    }
    return total;
}

// H^{dim N}(P_N(C)) through the radial average (1/p) * integral of rho^p over
// the unit sphere of N. Exact two-point sum for p = 1, trapezoid lattice for
// p = 2, Fibonacci lattice for p = 3.
inline double radial_average_area(const ConvexBody& c, const Subspace& nsub,
                                  int count = 0) {
    int p = nsub.dim;
    if (p < 1 || p > 3) throw DimTooLarge("radial_average_area: dim must be 1..3");
    if (nsub.ambient_dim != c.ambient_dim) throw DimMismatch("radial_average_area");
    ConvexBody proj = project_body(c, nsub);
    if (count <= 0) count = p == 2 ? 65536 : 262144;
    Mat lattice = sphere_lattice(p, count);
    double acc = 0.0;
    for (int i = 0; i < lattice.cols(); ++i) {
        Vec nu = nsub.basis.transpose() * lattice.col(i);
        double g = gauge(proj, nu);
        double rho = std::isinf(g) ? 0.0 : (g > 0 ? 1.0 / g : 0.0);
        acc += std::pow(rho, p);
    }
    return acc / lattice.cols() * unit_ball_volume(p);
}

struct SlicingParams {
    int cells = 4096;
    int subdivisions = 10000;
    double root_tol = 1e-10;
};

// M^k_C(S) for k + dim(C) = n as (H^{n-k}(C)/omega_{n-k}) * integral over
// L-perp of the transversal intersection count.
inline double slicing_content(const RectifiableSet& s, const ConvexBody& c,
                              const SlicingParams& params = {}) {
    int n = s.ambient_dim;
    int m = c.intrinsic_dim;
    int k = s.k;
    if (c.ambient_dim != n) throw DimMismatch("slicing_content: ambient");
    if (k + m != n) throw DimMismatch("slicing_content: k + dim(C) != n");
    if (n > 3) throw DimTooLarge("slicing_content: n > 3");
    if (k != 0 && k != 1) throw UnsupportedShape("slicing_content: k must be 0 or 1");

    double hc = body_volume(c);
    double norm = hc / unit_ball_volume(n - k);

    if (k == 0) {
        double count = 0.0;
        for (const auto& p : s.patches) {
            if (p.param_dim != 0) throw UnsupportedShape("slicing_content: point patches");
            count += 1.0;
        }
        return norm * count;
    }

    Subspace lperp = c.span().complement();  // dimension k = 1 here

    // Scalar projection profile per patch, sampled once.
    struct Profile {
        const Patch* patch;
        std::vector<double> t;
        std::vector<double> f;
    };
    std::vector<Profile> profiles;
    double fmin = std::numeric_limits<double>::infinity();
    double fmax = -fmin;
    for (const auto& p : s.patches) {
        if (p.param_dim != 1) throw UnsupportedShape("slicing_content: curve patches");
        if (detail::degenerate_patch(p)) continue;
        Profile pr;
        pr.patch = &p;
        int nsub = params.subdivisions;
        pr.t.resize(nsub + 1);
        pr.f.resize(nsub + 1);
        double lo = p.domain[0][0], hi = p.domain[0][1];
        Vec u(1);
        for (int i = 0; i <= nsub; ++i) {
            pr.t[i] = lo + (hi - lo) * i / nsub;
            u(0) = pr.t[i];
            pr.f[i] = lperp.coords(p.position(u))(0);
            fmin = std::min(fmin, pr.f[i]);
            fmax = std::max(fmax, pr.f[i]);
        }
        profiles.push_back(std::move(pr));
    }
    if (profiles.empty()) return 0.0;

    double span = std::max(fmax - fmin, 1e-12);
    double lo = fmin - 1e-6 * span;
    double hi = fmax + 1e-6 * span;
    double cellw = (hi - lo) / params.cells;
    double fscale = std::max(std::abs(fmin), std::abs(fmax)) + span;

    auto count_at = [&](double x) -> std::pair<double, bool> {
        double count = 0.0;
        bool graze = false;
        for (const auto& pr : profiles) {
            const auto& f = pr.f;
            int nsub = static_cast<int>(f.size()) - 1;
            for (int i = 0; i < nsub; ++i) {
                double s0 = f[i] - x, s1 = f[i + 1] - x;
                if (s0 == 0.0) {
                    graze = true;
                    continue;
                }
                if (s0 * s1 < 0.0) {
                    // bisection on the actual chart to the root tolerance
                    double a = pr.t[i], b = pr.t[i + 1];
                    Vec u(1);
                    double fa = s0;
                    while (b - a > params.root_tol) {
                        double mid = 0.5 * (a + b);
                        u(0) = mid;
                        double fm = lperp.coords(pr.patch->position(u))(0) - x;
                        if (fa * fm <= 0)
                            b = mid;
                        else {
                            a = mid;
                            fa = fm;
                        }
                    }
                    count += 1.0;
                } else if (std::abs(s0) < 1e-9 * fscale &&
                           (i == 0 || (f[i - 1] - x) * s1 > 0)) {
                    graze = true;  // touch without crossing
                }
            }
        }
        return {count, graze};
    };

    double integral = 0.0;
    for (int ci = 0; ci < params.cells; ++ci) {
        double x = lo + (ci + 0.5) * cellw;
        auto [count, graze] = count_at(x);
        if (graze) {
            // one refinement: replace by the two half-cell midpoints
            auto [c1, g1] = count_at(lo + (ci + 0.25) * cellw);
            auto [c2, g2] = count_at(lo + (ci + 0.75) * cellw);
            (void)g1;
            (void)g2;
            count = 0.5 * (c1 + c2);
        }
        integral += count * cellw;
    }
    return norm * integral;
}

// AFP density reports. mu is the cloud quadrature measure normalized to a
// probability (optionally reweighted per patch).
struct AfpReport {
    double gamma = 0.0;
    Vec argmin_center;
    double argmin_radius = 0.0;
    bool relative_mode = false;
    std::optional<Subspace> subspace;
};

struct AfpParams {
    double cloud_eps = 1e-3;
    int max_centers = 256;
    std::vector<double> radii;
    std::vector<double> patch_multipliers;  // empty: all 1
    double projection_grid_h = 1e-3;        // relative mode
};

namespace detail {

inline Vec afp_measure(const PointCloud& cloud, const std::vector<double>& mult) {
    Vec mu = cloud.weights;
    if (!mult.empty()) {
        for (int i = 0; i < cloud.size(); ++i) {
            int pi = cloud.patch_index[i];
            mu(i) *= pi < static_cast<int>(mult.size()) ? mult[pi] : 1.0;
        }
    }
    double total = mu.sum();
    if (total <= 0) throw EmptyCloud("afp: measure vanishes");
    return mu / total;
}

inline std::vector<int> afp_centers(const PointCloud& cloud, int max_centers) {
    std::vector<int> centers;
    int n = cloud.size();
    int stride = std::max(1, n / std::max(1, max_centers));
    for (int i = 0; i < n; i += stride) centers.push_back(i);
    return centers;
}

}  // namespace detail

// Largest gamma consistent with mu(B(x,r)) >= gamma r^k on the samples.
inline AfpReport afp_gamma(const RectifiableSet& s, int k, const AfpParams& params) {
    if (k != s.k) throw DimMismatch("afp_gamma: k != S.k");
    if (params.radii.empty()) throw EmptyCloud("afp_gamma: no radii");
    for (double r : params.radii)
        if (!(r > 0 && r < 1)) throw BadResolution("afp_gamma: radii must be in (0,1)");
    PointCloud cloud = sample_cloud(s, params.cloud_eps);
    Vec mu = detail::afp_measure(cloud, params.patch_multipliers);
    auto centers = detail::afp_centers(cloud, params.max_centers);

    AfpReport rep;
    rep.gamma = std::numeric_limits<double>::infinity();
    for (int ci : centers) {
        Vec x = cloud.points.col(ci);
        for (double r : params.radii) {
            double ball = 0.0;
            for (int i = 0; i < cloud.size(); ++i)
                if ((cloud.points.col(i) - x).norm() <= r) ball += mu(i);
            double ratio = ball / std::pow(r, k);
            if (ratio < rep.gamma) {
                rep.gamma = ratio;
                rep.argmin_center = x;
                rep.argmin_radius = r;
            }
        }
    }
    if (std::isinf(rep.gamma)) rep.gamma = 0.0;
    return rep;
}

// Relative variant: mu(B(x,r)) >= gamma r^{k+m-n} H^{n-m}(P_{L-perp}(S cap B)).
// The projected measure is occupied-cell counting on an h-grid of L-perp;
// single-cell hits are below resolution and excluded as vacuous.
inline AfpReport afp_gamma_relative(const RectifiableSet& s, int k, const Subspace& l,
                                    const AfpParams& params) {
    if (k != s.k) throw DimMismatch("afp_gamma_relative: k != S.k");
    int n = s.ambient_dim;
    int m = l.dim;
    if (k + m < n) throw DimMismatch("afp_gamma_relative: k + m < n");
    if (params.radii.empty()) throw EmptyCloud("afp_gamma_relative: no radii");
    for (double r : params.radii)
        if (!(r > 0 && r < 1)) throw BadResolution("afp radii must be in (0,1)");

    PointCloud cloud = sample_cloud(s, params.cloud_eps);
    Vec mu = detail::afp_measure(cloud, params.patch_multipliers);
    auto centers = detail::afp_centers(cloud, params.max_centers);
    Subspace lperp = l.complement();
    const int pd = n - m;
    const double h = params.projection_grid_h;

    AfpReport rep;
    rep.relative_mode = true;
    rep.subspace = l;
    rep.gamma = std::numeric_limits<double>::infinity();
    for (int ci : centers) {
        Vec x = cloud.points.col(ci);
        for (double r : params.radii) {
            double ball = 0.0;
            std::set<std::array<long long, 3>> cells;
            for (int i = 0; i < cloud.size(); ++i) {
                if ((cloud.points.col(i) - x).norm() > r) continue;
                ball += mu(i);
                Vec pc = lperp.coords(cloud.points.col(i));
                std::array<long long, 3> key{0, 0, 0};
                for (int a = 0; a < pd; ++a)
                    key[a] = static_cast<long long>(std::floor(pc(a) / h));
                cells.insert(key);
            }
            if (cells.size() <= 1) continue;  // vacuous: projection below resolution
            double hmeas = static_cast<double>(cells.size()) * std::pow(h, pd);
            double ratio = ball / (std::pow(r, k + m - n) * hmeas);
            if (ratio < rep.gamma) {
                rep.gamma = ratio;
                rep.argmin_center = x;
                rep.argmin_radius = r;
            }
        }
    }
    return rep;  // gamma stays +inf when every sample was vacuous
}

}  // namespace amink
