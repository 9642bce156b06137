// Independent reference implementations used to pin expected values.
// Everything here is deliberately slow and simple, and never calls into the
// library paths it is used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracle {

// erf by its Maclaurin series in long double; converges fast for |x| <= 4.
inline long double erf_series(long double x) {
    const long double two_over_sqrt_pi = 1.1283791670955125738961589L;
    long double term = x;
    long double sum = x;
    for (int n = 1; n < 200; ++n) {
        term *= -x * x / n;
        sum += term / (2 * n + 1);
        if (std::fabs(term / (2 * n + 1)) < 1e-25L * std::fabs(sum)) break;
    }
    return two_over_sqrt_pi * sum;
}

inline double normal_cdf_series(double z) {
    return static_cast<double>(0.5L * (1.0L + erf_series(z / 1.4142135623730950488L)));
}

// Inverts a monotone function by bisection.
inline double invert_by_bisection(const std::function<double(double)>& f, double target,
                                  double lo, double hi, int iterations = 200) {
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Adaptive Simpson quadrature.
namespace detail {
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive(const std::function<double(double)>& f, double a, double b, double fa,
                       double fb, double fm, double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(f, a, m, fa, fm, flm);
    const double right = simpson(f, m, b, fm, fb, frm);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * eps) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive(f, a, m, fa, fm, flm, left, 0.5 * eps, depth - 1) +
           adaptive(f, m, b, fm, fb, frm, right, 0.5 * eps, depth - 1);
}
}  // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double eps = 1e-12) {
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    return detail::adaptive(f, a, b, fa, fb, fm, detail::simpson(f, a, b, fa, fb, fm), eps, 60);
}

// Student-t density and c.d.f. by quadrature from zero (symmetry anchor).
inline double t_pdf(double x, int df) {
    const double nu = df;
    const double log_c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                         0.5 * std::log(nu * 3.14159265358979323846);
    return std::exp(log_c - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

inline double t_cdf_quadrature(double t, int df) {
    if (t == 0.0) return 0.5;
    const double body = integrate([df](double x) { return t_pdf(x, df); }, 0.0,
                                  std::fabs(t), 1e-13);
    return t > 0.0 ? 0.5 + body : 0.5 - body;
}

// Classical two-sample KS statistic: max |F1 - F2| over every pooled
// breakpoint, scanned directly.
inline double ks_two_sample_brute(std::vector<double> a, std::vector<double> b) {
    std::vector<double> pool;
    pool.insert(pool.end(), a.begin(), a.end());
    pool.insert(pool.end(), b.begin(), b.end());
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

    double best = 0.0;
    for (double x : pool) {
        std::size_t ca = 0, cb = 0;
        for (double v : a) ca += v <= x;
        for (double v : b) cb += v <= x;
        const double fa = static_cast<double>(ca) / static_cast<double>(a.size());
        const double fb = static_cast<double>(cb) / static_cast<double>(b.size());
        best = std::max(best, std::fabs(fa - fb));
    }
    return best;
}

// BH q-values straight from the definition: on the sorted p-values,
// q_(k) = min over j >= k of K p_(j) / j, mapped back to input order.
inline std::vector<double> bh_brute(std::span<const double> p) {
    const int K = static_cast<int>(p.size());
    std::vector<int> order(p.size());
    for (int i = 0; i < K; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        if (p[static_cast<std::size_t>(x)] != p[static_cast<std::size_t>(y)]) {
            return p[static_cast<std::size_t>(x)] < p[static_cast<std::size_t>(y)];
        }
        return x < y;
    });
    std::vector<double> q(p.size());
    for (int k = 0; k < K; ++k) {
        double best = std::numeric_limits<double>::infinity();
        for (int j = k; j < K; ++j) {
            const double candidate =
                (static_cast<double>(K) * p[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])]) /
                static_cast<double>(j + 1);
            best = std::min(best, candidate);
        }
        q[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = best;
    }
    return q;
}

// Chi-square 99th percentile: exact for small df, Wilson-Hilferty beyond.
inline double chisq_critical_99(int df) {
    static const double exact[] = {0.0,    6.6349, 9.2103, 11.345, 13.277, 15.086,
                                   16.812, 18.475, 20.090, 21.666, 23.209};
    if (df >= 1 && df <= 10) return exact[df];
    const double z = 2.3263478740408408;  // N(0,1) 99th percentile
    const double a = 2.0 / (9.0 * df);
    const double v = 1.0 - a + z * std::sqrt(a);
    return df * v * v * v;
}

}  // namespace oracle
