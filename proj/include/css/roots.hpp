#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace css {

/// Repo-wide scalar root convention: bracket by uniform scan, bisect to a
/// fixed parameter width, then one Newton polish when a derivative exists.
struct RootConfig {
    int scan_samples = 4096;
    double bisect_width = 1e-12;
};

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
};

/// Sign-change brackets of f on [a, b] from a uniform scan of n+1 samples.
/// A sample that is exactly zero is treated as part of the following cell.
inline std::vector<Bracket> scan_brackets(const std::function<double(double)>& f,
                                          double a, double b, int n) {
    std::vector<Bracket> out;
    double prev_t = a;
    double prev_v = f(a);
    for (int i = 1; i <= n; ++i) {
        double t = a + (b - a) * static_cast<double>(i) / n;
        double v = f(t);
        if ((prev_v < 0.0 && v >= 0.0) || (prev_v > 0.0 && v <= 0.0) ||
            (prev_v == 0.0 && v != 0.0)) {
            out.push_back({prev_t, t});
        }
        prev_t = t;
        prev_v = v;
    }
    return out;
}

inline double bisect(const std::function<double(double)>& f, Bracket br, double width) {
    double flo = f(br.lo);
    if (flo == 0.0) return br.lo;
    bool lo_neg = flo < 0.0;
    while (br.hi - br.lo > width) {
        double mid = 0.5 * (br.lo + br.hi);
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == lo_neg)
            br.lo = mid;
        else
            br.hi = mid;
    }
    return 0.5 * (br.lo + br.hi);
}

/// One Newton step, kept only if it stays inside the bracket and improves |f|.
inline double newton_polish(const std::function<double(double)>& f,
                            const std::function<double(double)>& df,
                            double x, Bracket br) {
    double fx = f(x);
    double d = df(x);
    if (d == 0.0) return x;
    double x2 = x - fx / d;
    if (x2 < br.lo || x2 > br.hi) return x;
    return std::fabs(f(x2)) < std::fabs(fx) ? x2 : x;
}

/// All simple roots of f on [a, b) under the repo root convention.
inline std::vector<double> find_roots(const std::function<double(double)>& f,
                                      double a, double b,
                                      const RootConfig& cfg = {},
                                      const std::function<double(double)>* df = nullptr) {
    std::vector<double> roots;
    for (const Bracket& br : scan_brackets(f, a, b, cfg.scan_samples)) {
        double r = bisect(f, br, cfg.bisect_width);
        if (df) r = newton_polish(f, *df, r, br);
        if (r < b) roots.push_back(r);
    }
    return roots;
}

}  // namespace css
