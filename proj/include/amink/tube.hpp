#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "amink/convex.hpp"
#include "amink/errors.hpp"
#include "amink/parallel.hpp"
#include "amink/rectifiable.hpp"
#include "amink/rng.hpp"

namespace amink {

struct Box {
    Vec lo, hi;
};

struct TubeVolumeEstimate {
    double r = 0.0;
    double volume = 0.0;
    double stderr_ = 0.0;  // 0 for grid mode
    enum class Method { Grid, Mc } method = Method::Grid;
    double resolution = 0.0;  // voxel size h or sample count N
    uint64_t seed = 0;        // mc only
};

struct GridParams {
    double h = 0.0;
};

struct McParams {
    int64_t samples = 0;
    uint64_t seed = 0;
};

// Cloud bbox inflated by r * max vertex norm of C (the tight reach bound
// when 0 is in the relative interior) plus an optional margin.
inline Box tube_bounding_box(const PointCloud& cloud, const ConvexBody& c, double r,
                             double margin = 0.0) {
    if (cloud.size() == 0) throw EmptyCloud("tube_bounding_box");
    Box b;
    b.lo = cloud.points.rowwise().minCoeff();
    b.hi = cloud.points.rowwise().maxCoeff();
    double pad = r * c.circumradius + margin;
    b.lo.array() -= pad;
    b.hi.array() += pad;
    return b;
}

// Exact min over cloud points of gauge(C, z - s), with Euclidean pruning
// gauge >= |v| / circumradius.
inline double aniso_distance(const Vec& z, const PointCloud& cloud,
                             const ConvexBody& c) {
    if (cloud.size() == 0) throw EmptyCloud("aniso_distance");
    double best = std::numeric_limits<double>::infinity();
    double beta = c.circumradius;
    for (int i = 0; i < cloud.size(); ++i) {
        Vec v = z - cloud.points.col(i);
        if (v.norm() / beta >= best) continue;
        best = std::min(best, gauge(c, v));
    }
    return best;
}

namespace detail {

// Membership engine for {z : min_s gauge(C, z-s) <= r}. Cloud points are
// bucketed on a virtual grid with per-axis cell sizes proportional to the
// axis reach of rC, so thin structuring elements stay cheap. Cells certify
// in/out via the Lipschitz bound |gauge(v)-gauge(v')| <= |v-v'|/inradius;
// only straddling cells fall back to exact per-point tests, which keeps the
// counted set identical to the aniso_distance <= r definition.
class TubeEngine {
public:
    TubeEngine(const PointCloud& cloud, const ConvexBody& body, double r,
               double voxel_h = 0.0)
        : cloud_(cloud), body_(body), r_(r) {
        n_ = body.ambient_dim;
        if (cloud.points.rows() != n_) throw DimMismatch("tube engine cloud dim");
        d_ = body.intrinsic_dim;
        full_dim_ = body.full_dimensional();
        beta_ = body.circumradius;
        alpha_ = body.inradius;  // span inradius; 0 when facets are absent
        has_facets_ = !body.facets.empty();
        lp_fallback_ = !has_facets_ && d_ >= 1;
        span_tol_ = 1e-9;

        if (!full_dim_) spanT_ = body.span_basis.transpose();
        if (has_facets_) {
            nf_ = static_cast<int>(body.facets.size());
            fn_.resize(static_cast<size_t>(nf_) * d_);
            fo_.resize(nf_);
            for (int f = 0; f < nf_; ++f) {
                for (int a = 0; a < d_; ++a) fn_[f * d_ + a] = body.facets[f].normal(a);
                fo_[f] = body.facets[f].offset;
            }
        }

        query_radius_ = r * beta_;
        for (int a = 0; a < n_; ++a) {
            double extent = 0.0;
            for (int i = 0; i < body.vertices.cols(); ++i)
                extent = std::max(extent, std::abs(body.vertices(a, i)));
            reach_[a] = r * extent;
            cell_[a] = std::max({reach_[a] / 3.0, voxel_h, query_radius_ * 1e-6});
            if (!(cell_[a] > 0)) cell_[a] = 1.0;
        }
        rho_cell_ = 0.0;
        for (int a = 0; a < n_; ++a) rho_cell_ += cell_[a] * cell_[a];
        rho_cell_ = 0.5 * std::sqrt(rho_cell_);

        org_ = cloud.points.rowwise().minCoeff();

        const int npts = cloud.size();
        std::vector<std::pair<int64_t, int>> tagged(npts);
        for (int i = 0; i < npts; ++i) {
            int64_t cc[4];
            point_cell(cloud.points.col(i).data(), cc);
            tagged[i] = {pack(cc), i};
        }
        std::sort(tagged.begin(), tagged.end());
        ids_.resize(npts);
        for (int i = 0; i < npts; ++i) {
            ids_[i] = tagged[i].second;
            if (i == 0 || tagged[i].first != tagged[i - 1].first) {
                keys_.push_back(tagged[i].first);
                starts_.push_back(i);
            }
        }
        starts_.push_back(npts);
    }

    bool contains(const Vec& z) const {
        int64_t lo[4], hi[4];
        for (int a = 0; a < n_; ++a) {
            lo[a] = cell_index(z(a) - reach_[a], a);
            hi[a] = cell_index(z(a) + reach_[a], a);
        }
        bool found = false;
        for_each_occupied(lo, hi, [&](size_t ki, const int64_t*) {
            for (int t = starts_[ki]; t < starts_[ki + 1]; ++t) {
                if (point_member(z.data(), ids_[t])) {
                    found = true;
                    return true;
                }
            }
            return false;
        });
        return found;
    }

    int64_t grid_count(const Box& box, double h, int threads) const {
        int64_t dims[4];
        for (int a = 0; a < n_; ++a) {
            dims[a] = std::max<int64_t>(
                1, static_cast<int64_t>(std::ceil((box.hi(a) - box.lo(a)) / h)));
        }

        // Active cells: occupied cells dilated per axis by the reach of rC
        // plus one voxel diagonal; everything else is provably outside.
        std::vector<int64_t> active;
        {
            int64_t ring[4];
            for (int a = 0; a < n_; ++a)
                ring[a] = static_cast<int64_t>(
                              std::ceil((reach_[a] + h * std::sqrt(double(n_))) /
                                        cell_[a])) +
                          1;
            std::unordered_set<int64_t> seen;
            int64_t cc[4], it[4];
            for (int64_t key : keys_) {
                unpack(key, cc);
                for (int a = 0; a < n_; ++a) it[a] = -ring[a];
                for (;;) {
                    int64_t shifted[4];
                    for (int a = 0; a < n_; ++a) shifted[a] = cc[a] + it[a];
                    seen.insert(pack(shifted));
                    int a = 0;
                    for (; a < n_; ++a) {
                        if (++it[a] <= ring[a]) break;
                        it[a] = -ring[a];
                    }
                    if (a == n_) break;
                }
            }
            active.assign(seen.begin(), seen.end());
            std::sort(active.begin(), active.end());
        }

        std::atomic<int64_t> total{0};
        parallel_chunks(static_cast<int64_t>(active.size()), threads,
                        [&](int64_t cb, int64_t ce) {
                            int64_t local = 0;
                            for (int64_t ci = cb; ci < ce; ++ci)
                                local += count_cell_voxels(active[ci], box, h, dims);
                            total += local;
                        });
        return total.load();
    }

private:
    const PointCloud& cloud_;
    const ConvexBody& body_;
    double r_;
    int n_ = 0, d_ = 0, nf_ = 0;
    bool full_dim_ = false, has_facets_ = false, lp_fallback_ = false;
    double beta_ = 0.0, alpha_ = 0.0, span_tol_ = 0.0;
    double query_radius_ = 0.0, rho_cell_ = 0.0;
    double reach_[4] = {0, 0, 0, 0};
    double cell_[4] = {1, 1, 1, 1};
    Vec org_;
    Mat spanT_;
    std::vector<double> fn_, fo_;
    std::vector<int64_t> keys_;
    std::vector<int> starts_;
    std::vector<int> ids_;

    int64_t cell_index(double x, int axis) const {
        return static_cast<int64_t>(std::floor((x - org_(axis)) / cell_[axis]));
    }

    void point_cell(const double* p, int64_t* cc) const {
        for (int a = 0; a < n_; ++a) cc[a] = cell_index(p[a], a);
    }

    static int64_t pack_coord(int64_t c) {
        return (c + (int64_t{1} << 20)) & ((int64_t{1} << 21) - 1);
    }

    int64_t pack(const int64_t* cc) const {
        int64_t key = 0;
        for (int a = 0; a < n_; ++a) key = (key << 21) | pack_coord(cc[a]);
        return key;
    }

    void unpack(int64_t key, int64_t* cc) const {
        for (int a = n_ - 1; a >= 0; --a) {
            cc[a] = (key & ((int64_t{1} << 21) - 1)) - (int64_t{1} << 20);
            key >>= 21;
        }
    }

    template <typename Fn>
    void for_each_occupied(const int64_t* lo, const int64_t* hi, Fn&& fn) const {
        int64_t it[4];
        for (int a = 0; a < n_; ++a) it[a] = lo[a];
        for (;;) {
            int64_t key = 0;
            for (int a = 0; a < n_; ++a) key = (key << 21) | pack_coord(it[a]);
            auto pos = std::lower_bound(keys_.begin(), keys_.end(), key);
            if (pos != keys_.end() && *pos == key) {
                if (fn(static_cast<size_t>(pos - keys_.begin()), it)) return;
            }
            int a = 0;
            for (; a < n_; ++a) {
                if (++it[a] <= hi[a]) break;
                it[a] = lo[a];
            }
            if (a == n_) return;
        }
    }

    bool point_member(const double* z, int id) const {
        double v[4];
        const double* s = cloud_.points.col(id).data();
        double vv = 0.0;
        for (int a = 0; a < n_; ++a) {
            v[a] = z[a] - s[a];
            if (std::abs(v[a]) > reach_[a] * (1.0 + 1e-14)) return false;
            vv += v[a] * v[a];
        }
        if (vv > query_radius_ * query_radius_ * (1.0 + 1e-14)) return false;
        if (full_dim_) return span_member(v, vv);
        double y[4];
        double yy = 0.0;
        for (int a = 0; a < d_; ++a) {
            double acc = 0.0;
            for (int b = 0; b < n_; ++b) acc += spanT_(a, b) * v[b];
            y[a] = acc;
            yy += acc * acc;
        }
        double off2 = std::max(0.0, vv - yy);
        double tol = span_tol_ * std::sqrt(vv);
        if (off2 > tol * tol) return false;
        return span_member(y, yy);
    }

    // gauge test within the span: coords y (d_ entries), |y|^2 = yy.
    bool span_member(const double* y, double yy) const {
        if (alpha_ > 0 && yy <= (r_ * alpha_) * (r_ * alpha_)) return true;
        if (has_facets_) {
            for (int f = 0; f < nf_; ++f) {
                double acc = 0.0;
                const double* a = &fn_[static_cast<size_t>(f) * d_];
                for (int b = 0; b < d_; ++b) acc += a[b] * y[b];
                if (acc > r_ * fo_[f]) return false;
            }
            return true;
        }
        if (lp_fallback_) {
            Vec v(n_);
            if (full_dim_) {
                for (int a = 0; a < n_; ++a) v(a) = y[a];
            } else {
                v = body_.span_basis * Eigen::Map<const Vec>(y, d_);
            }
            return gauge(body_, v) <= r_;
        }
        // d = 0 body: surviving the off-span filter already means v ~ 0.
        return true;
    }

    double span_gauge(const double* y) const {
        double g = 0.0;
        for (int f = 0; f < nf_; ++f) {
            double acc = 0.0;
            const double* a = &fn_[static_cast<size_t>(f) * d_];
            for (int b = 0; b < d_; ++b) acc += a[b] * y[b];
            g = std::max(g, acc / fo_[f]);
        }
        return g;
    }

    struct Span {
        int begin, end;
        double center[4];
    };

    int64_t count_cell_voxels(int64_t key, const Box& box, double h,
                              const int64_t* dims) const {
        int64_t cc[4];
        unpack(key, cc);

        // Voxel ranges whose centers fall in this cell; neighbouring cells
        // use the identical boundary formula, so the partition is exact.
        int64_t vlo[4], vhi[4];
        for (int a = 0; a < n_; ++a) {
            double cell_lo = org_(a) + cc[a] * cell_[a];
            double cell_hi = cell_lo + cell_[a];
            vlo[a] = first_center_at_or_after(cell_lo, box.lo(a), h);
            vhi[a] = first_center_at_or_after(cell_hi, box.lo(a), h);
            vlo[a] = std::max<int64_t>(vlo[a], 0);
            vhi[a] = std::min<int64_t>(vhi[a], dims[a]);
            if (vlo[a] >= vhi[a]) return 0;
        }

        // Candidate spans shared by every voxel of this cell.
        int64_t wlo[4], whi[4];
        for (int a = 0; a < n_; ++a) {
            int64_t ring =
                static_cast<int64_t>(std::ceil(reach_[a] / cell_[a])) + 1;
            wlo[a] = cc[a] - ring;
            whi[a] = cc[a] + ring;
        }
        std::vector<Span> spans;
        for_each_occupied(wlo, whi, [&](size_t ki, const int64_t* it) {
            Span sp;
            sp.begin = starts_[ki];
            sp.end = starts_[ki + 1];
            for (int a = 0; a < n_; ++a)
                sp.center[a] = org_(a) + (it[a] + 0.5) * cell_[a];
            spans.push_back(sp);
            return false;
        });
        if (spans.empty()) return 0;

        const double rb = query_radius_;
        const double ra = r_ * alpha_;
        // Lipschitz gauge certification pays off for coarse facet counts;
        // near-round bodies resolve through the Euclidean brackets instead.
        const bool cert_gauge = full_dim_ && has_facets_ && nf_ <= 64;

        int64_t count = 0;
        int64_t it[4];
        for (int a = 0; a < n_; ++a) it[a] = vlo[a];
        double z[4];
        for (;;) {
            for (int a = 0; a < n_; ++a) z[a] = box.lo(a) + (it[a] + 0.5) * h;
            bool in = false;
            for (const auto& sp : spans) {
                double v[4];
                double vv = 0.0;
                bool reject = false;
                for (int a = 0; a < n_; ++a) {
                    v[a] = z[a] - sp.center[a];
                    if (std::abs(v[a]) - 0.5 * cell_[a] > reach_[a]) {
                        reject = true;
                        break;
                    }
                    vv += v[a] * v[a];
                }
                if (reject) continue;
                double dist = std::sqrt(vv);
                if (dist - rho_cell_ > rb) continue;
                if (full_dim_ && alpha_ > 0 && dist + rho_cell_ <= ra) {
                    in = true;
                    break;
                }
                if (cert_gauge) {
                    double g = span_gauge(v);
                    if (g - rho_cell_ / alpha_ > r_ * (1.0 + 1e-12)) continue;
                    if (g + rho_cell_ / alpha_ <= r_ * (1.0 - 1e-12)) {
                        in = true;
                        break;
                    }
                }
                for (int t = sp.begin; t < sp.end; ++t) {
                    if (point_member(z, ids_[t])) {
                        in = true;
                        break;
                    }
                }
                if (in) break;
            }
            if (in) ++count;
            int a = 0;
            for (; a < n_; ++a) {
                if (++it[a] < vhi[a]) break;
                it[a] = vlo[a];
            }
            if (a == n_) break;
        }
        return count;
    }

    static int64_t first_center_at_or_after(double x, double lo, double h) {
        // smallest i with lo + (i + 0.5) h >= x
        return static_cast<int64_t>(std::ceil((x - lo) / h - 0.5));
    }
};

}  // namespace detail

inline TubeVolumeEstimate tube_volume(const PointCloud& cloud, const ConvexBody& c,
                                      double r, const GridParams& params,
                                      std::optional<Box> box = std::nullopt,
                                      int threads = 0) {
    if (cloud.size() == 0) throw EmptyCloud("tube_volume");
    if (r <= 0) throw NonpositiveRadius("tube_volume: r <= 0");
    if (params.h <= 0) throw BadResolution("tube_volume: h <= 0");
    int n = c.ambient_dim;
    Box b = box ? *box
                : tube_bounding_box(cloud, c, r,
                                    params.h * std::sqrt(static_cast<double>(n)));
    detail::TubeEngine engine(cloud, c, r, params.h);
    int64_t count = engine.grid_count(b, params.h, resolve_threads(threads));
    TubeVolumeEstimate est;
    est.r = r;
    est.volume = static_cast<double>(count) * std::pow(params.h, n);
    est.stderr_ = 0.0;
    est.method = TubeVolumeEstimate::Method::Grid;
    est.resolution = params.h;
    est.seed = 0;
    return est;
}

inline TubeVolumeEstimate tube_volume_mc(const PointCloud& cloud, const ConvexBody& c,
                                         double r, const McParams& params,
                                         std::optional<Box> box = std::nullopt,
                                         int threads = 0) {
    if (cloud.size() == 0) throw EmptyCloud("tube_volume_mc");
    if (r <= 0) throw NonpositiveRadius("tube_volume_mc: r <= 0");
    if (params.samples < 1) throw BadResolution("tube_volume_mc: N < 1");
    int n = c.ambient_dim;
    Box b = box ? *box : tube_bounding_box(cloud, c, r);
    detail::TubeEngine engine(cloud, c, r);
    Vec extent = b.hi - b.lo;
    double box_vol = extent.prod();

    std::atomic<int64_t> hits{0};
    parallel_chunks(params.samples, resolve_threads(threads),
                    [&](int64_t s0, int64_t s1) {
                        Vec z(n);
                        int64_t local = 0;
                        for (int64_t i = s0; i < s1; ++i) {
                            for (int a = 0; a < n; ++a)
                                z(a) = b.lo(a) +
                                       extent(a) * counter_uniform(params.seed,
                                                                   static_cast<uint64_t>(i),
                                                                   static_cast<uint64_t>(a));
                            if (engine.contains(z)) ++local;
                        }
                        hits += local;
                    });
    double p = static_cast<double>(hits.load()) / static_cast<double>(params.samples);
    TubeVolumeEstimate est;
    est.r = r;
    est.volume = box_vol * p;
    est.stderr_ = box_vol * std::sqrt(std::max(0.0, p * (1.0 - p) /
                                               static_cast<double>(params.samples)));
    est.method = TubeVolumeEstimate::Method::Mc;
    est.resolution = static_cast<double>(params.samples);
    est.seed = params.seed;
    return est;
}

// M^k_{r,C} = tube volume / (omega_{n-k} r^{n-k}).
inline double normalized_content(const TubeVolumeEstimate& est, int n, int k) {
    if (k < 0 || k > n) throw DimMismatch("normalized_content: k outside [0, n]");
    return est.volume / (unit_ball_volume(n - k) * std::pow(est.r, n - k));
}

}  // namespace amink
