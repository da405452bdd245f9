#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "amink/errors.hpp"

namespace amink {

struct QuadratureRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;  // sum to 2
};

// Gauss-Legendre nodes by Newton iteration on P_n; cached per order.
inline const QuadratureRule& gauss_legendre(int order) {
    if (order < 1) throw BadResolution("quadrature order must be >= 1");
    static std::map<int, QuadratureRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    QuadratureRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    int n = order;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    auto [pos, ok] = cache.emplace(order, std::move(rule));
    (void)ok;
    return pos->second;
}

// Volume of the d-dimensional Euclidean unit ball: w_d = w_{d-2} * 2*pi/d.
inline double unit_ball_volume(int d) {
    if (d < 0) throw NegativeDim("unit_ball_volume: d < 0");
    if (d == 0) return 1.0;
    if (d == 1) return 2.0;
    double w0 = 1.0, w1 = 2.0;  // omega_0, omega_1
    for (int j = 2; j <= d; ++j) {
        if (j % 2 == 0)
            w0 *= 2.0 * std::numbers::pi / j;
        else
            w1 *= 2.0 * std::numbers::pi / j;
    }
    return d % 2 == 0 ? w0 : w1;
}

// Equal-weight direction lattices on S^{d-1}; deterministic.
// d=1: {-1,+1}; d=2: uniform angles; d=3: Fibonacci lattice;
// d>=4: Halton points pushed through inverse-normal and normalized.
namespace detail {

inline double halton(uint64_t index, int base) {
    double f = 1.0, r = 0.0;
    uint64_t i = index;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

// Acklam-style rational approximation of the standard normal quantile.
inline double inverse_normal_cdf(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    if (p > phigh) {
        q = std::sqrt(-2 * std::log(1 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

}  // namespace detail

inline Eigen::MatrixXd sphere_lattice(int d, int count) {
    if (d < 1) throw NegativeDim("sphere_lattice: d < 1");
    if (d == 1) {
        Eigen::MatrixXd dirs(1, 2);
        dirs(0, 0) = 1.0;
        dirs(0, 1) = -1.0;
        return dirs;
    }
    Eigen::MatrixXd dirs(d, count);
    if (d == 2) {
        for (int i = 0; i < count; ++i) {
            double th = 2.0 * std::numbers::pi * i / count;
            dirs(0, i) = std::cos(th);
            dirs(1, i) = std::sin(th);
        }
        return dirs;
    }
    if (d == 3) {
        const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
        for (int i = 0; i < count; ++i) {
            double z = 1.0 - 2.0 * (i + 0.5) / count;
            double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            double th = 2.0 * std::numbers::pi * i / golden;
            dirs(0, i) = rho * std::cos(th);
            dirs(1, i) = rho * std::sin(th);
            dirs(2, i) = z;
        }
        return dirs;
    }
    static const int bases[] = {2, 3, 5, 7, 11, 13};
    for (int i = 0; i < count; ++i) {
        Eigen::VectorXd v(d);
        for (int j = 0; j < d; ++j) {
            double u = detail::halton(static_cast<uint64_t>(i) + 1, bases[j % 6]);
            u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
            v(j) = detail::inverse_normal_cdf(u);
        }
        double nn = v.norm();
        if (nn < 1e-12) v(0) = nn = 1.0;
        dirs.col(i) = v / nn;
    }
    return dirs;
}

// Angular covering radius of the 3D Fibonacci lattice, used for documented
// sampling error bounds.
inline double fibonacci_covering_angle(int count) {
    return 3.1 / std::sqrt(static_cast<double>(count));
}

}  // namespace amink
