#include "repmech/numerics.hpp"

#include "repmech/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace repmech::numerics {

namespace {

constexpr double kTwoOverSqrtPi = 1.12837916709551257390; // 2/sqrt(pi)

// erf(x) = 2/sqrt(pi) exp(-x^2) sum_n 2^n x^(2n+1) / (1*3*...*(2n+1)).
// Every term is positive, so there is no cancellation for moderate x.
double erf_series(double x) {
    const double x2 = x * x;
    double term = x;
    double sum = x;
    for (int n = 1; n < 200; ++n) {
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return kTwoOverSqrtPi * std::exp(-x2) * sum;
}

// erfc(x) for x >= 2 via the continued fraction
//   erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
// evaluated with the modified Lentz algorithm.
double erfc_continued_fraction(double x) {
    constexpr double tiny = 1e-300;
    double f = x;
    double c = x;
    double d = 0.0;
    for (int n = 1; n < 500; ++n) {
        const double an = 0.5 * n;
        d = x + an * d;
        if (std::abs(d) < tiny) d = tiny;
        c = x + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x * x) / (std::sqrt(kPi) * f);
}

constexpr double kSeriesLimit = 3.0;

} // namespace

double erf(double x) {
    if (std::isnan(x)) return x;
    const double ax = std::abs(x);
    double v;
    if (ax < kSeriesLimit) {
        v = erf_series(ax);
    } else if (ax < 6.5) {
        v = 1.0 - erfc_continued_fraction(ax);
    } else {
        v = 1.0;
    }
    return x < 0 ? -v : v;
}

double erfc(double x) {
    if (std::isnan(x)) return x;
    if (x < kSeriesLimit) return 1.0 - erf(x);
    if (x > 27.0) return 0.0;
    return erfc_continued_fraction(x);
}

double normal_pdf(double x, double mean, double std) {
    const double z = (x - mean) / std;
    return kInvSqrt2Pi * std::exp(-0.5 * z * z) / std;
}

double normal_cdf(double x, double mean, double std) {
    if (std == 0.0) return x < mean ? 0.0 : 1.0;
    const double z = (x - mean) / (std * kSqrt2);
    // Use erfc in the lower tail to keep relative accuracy.
    return z < 0 ? 0.5 * erfc(-z) : 0.5 * (1.0 + erf(z));
}

double folded_normal_mean(double mu, double sigma) {
    if (sigma < 0.0) throw Error(ErrorKind::InvalidArgument, "folded_normal_mean: sigma < 0");
    if (sigma == 0.0) return std::abs(mu);
    const double ratio = mu / sigma;
    // 1 - 2 Phi(-mu/sigma) == erf(mu / (sqrt(2) sigma))
    return sigma * kSqrt2OverPi * std::exp(-0.5 * ratio * ratio) + mu * erf(ratio / kSqrt2);
}

double find_root(const ScalarFn& f, double lo, double hi, double tol) {
    if (lo > hi) std::swap(lo, hi);
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi)) {
        std::ostringstream msg;
        msg << "f(" << lo << ") = " << flo << " and f(" << hi << ") = " << fhi << " share a sign";
        throw Error(ErrorKind::NoBracket, msg.str());
    }

    double a = lo, fa = flo;
    double b = hi, fb = fhi;
    for (int iter = 0; iter < 500; ++iter) {
        const double width = b - a;
        double x = b - fb * width / (fb - fa);
        // Bisect when the secant step leaves the bracket, hugs an endpoint,
        // or on every third iteration, which bounds the iteration count.
        if (!(x > a && x < b) || iter % 3 == 2 || std::min(x - a, b - x) < 1e-3 * width) {
            x = 0.5 * (a + b);
        }
        const double fx = f(x);
        if (std::abs(fx) <= tol || fx == 0.0) return x;
        if (std::signbit(fx) == std::signbit(fa)) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        if (b - a <= tol) return std::abs(fa) < std::abs(fb) ? a : b;
    }
    return std::abs(fa) < std::abs(fb) ? a : b;
}

namespace {

// Brent's method on [a, b] (parabolic interpolation with golden-section fallback).
MinimizeResult brent_minimize(const ScalarFn& f, double a, double b, double tol) {
    constexpr double golden = 0.3819660112501051; // (3 - sqrt 5) / 2
    double x = a + golden * (b - a);
    double w = x, v = x;
    double fx = f(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;
    const double abs_tol = std::max(tol, 1e-15);

    for (int iter = 0; iter < 500; ++iter) {
        const double m = 0.5 * (a + b);
        const double tol1 = 1e-10 * std::abs(x) + abs_tol / 3.0;
        const double tol2 = 2.0 * tol1;
        if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;

        bool golden_step = true;
        if (std::abs(e) > tol1) {
            double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::abs(q);
            const double etemp = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = (m - x >= 0.0) ? tol1 : -tol1;
                golden_step = false;
            }
        }
        if (golden_step) {
            e = (x >= m) ? a - x : b - x;
            d = golden * e;
        }
        const double u = std::abs(d) >= tol1 ? x + d : x + (d >= 0.0 ? tol1 : -tol1);
        const double fu = f(u);
        if (fu <= fx) {
            if (u >= x) a = x; else b = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    return {x, fx};
}

} // namespace

MinimizeResult minimize_1d(const ScalarFn& f, double lo, double hi, double tol) {
    if (!(lo < hi)) throw Error(ErrorKind::InvalidArgument, "minimize_1d: lo must be < hi");
    constexpr int kScan = 64;
    const double step = (hi - lo) / kScan;
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= kScan; ++k) {
        const double x = k == kScan ? hi : lo + k * step;
        const double v = f(x);
        if (v < best_val) {
            best_val = v;
            best = k;
        }
    }
    const double a = std::max(lo, lo + (best - 1) * step);
    const double b = std::min(hi, lo + (best + 1) * step);
    MinimizeResult refined = brent_minimize(f, a, b, tol);
    // Brent never evaluates the cell edges; keep an edge if it is strictly better.
    const double edge = best == 0 ? lo : (best == kScan ? hi : lo + best * step);
    if (best_val < refined.min) return {edge, best_val};
    return refined;
}

namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Estimate {
    double value;
    double error;
};

Estimate gauss_kronrod(const ScalarFn& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += kKronrodWeights[j] * sum;
        if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
    }
    return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

double adaptive(const ScalarFn& f, double a, double b, double tol, const Estimate& whole, int depth) {
    if (whole.error <= tol || depth >= 50 || b - a <= 1e-15 * std::max(1.0, std::abs(a))) {
        return whole.value;
    }
    const double m = 0.5 * (a + b);
    const Estimate left = gauss_kronrod(f, a, m);
    const Estimate right = gauss_kronrod(f, m, b);
    return adaptive(f, a, m, 0.5 * tol, left, depth + 1) +
           adaptive(f, m, b, 0.5 * tol, right, depth + 1);
}

} // namespace

double integrate(const ScalarFn& f, double lo, double hi, double abs_tol) {
    if (lo == hi) return 0.0;
    if (lo > hi) return -integrate(f, hi, lo, abs_tol);
    return adaptive(f, lo, hi, abs_tol, gauss_kronrod(f, lo, hi), 0);
}

double integrate(const ScalarFn& f, double lo, double hi, std::span<const double> breakpoints,
                 double abs_tol) {
    if (lo == hi) return 0.0;
    if (lo > hi) return -integrate(f, hi, lo, breakpoints, abs_tol);
    std::vector<double> cuts{lo};
    for (double p : breakpoints) {
        if (p > lo && p < hi) cuts.push_back(p);
    }
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    const double share = abs_tol / static_cast<double>(cuts.size() - 1);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        total += integrate(f, cuts[k], cuts[k + 1], share);
    }
    return total;
}

double integrate_lower_tail(const ScalarFn& f, double hi, double abs_tol) {
    // x = hi - (1 - t)/t maps t in (0, 1] onto (-inf, hi]; dx = dt / t^2.
    // Gauss-Kronrod nodes never touch t = 0.
    const ScalarFn g = [&](double t) {
        const double x = hi - (1.0 - t) / t;
        return f(x) / (t * t);
    };
    return integrate(g, 0.0, 1.0, abs_tol);
}

} // namespace repmech::numerics
