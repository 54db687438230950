#pragma once
/* Special functions and one-dimensional solvers.
 *
 * Everything here is pure and reentrant. The special functions are written
 * in-module (no libm erf) so they can be checked against independent series.
 */

#include <functional>
#include <span>

namespace repmech::numerics {

using ScalarFn = std::function<double(double)>;

/// Parameters of a Normal law; std == 0 is a point mass at mean.
struct NormalParams {
    double mean = 0.0;
    double std = 0.0;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kSqrt2OverPi = 0.79788456080286535588; // sqrt(2/pi)
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;  // 1/sqrt(2 pi)

/// Quadrature cutoff for Normal tails, in standard deviations. The mass
/// beyond it is below 1e-15.
inline constexpr double kNormalTailCutoff = 8.0;

/// Error function, absolute accuracy better than 1e-14 over the real line.
double erf(double x);

/// Complementary error function, accurate in the relative sense for x > 0.
double erfc(double x);

double normal_pdf(double x, double mean = 0.0, double std = 1.0);
double normal_cdf(double x, double mean = 0.0, double std = 1.0);

/// Mean of |X| for X ~ N(mu, sigma^2):
///   sigma sqrt(2/pi) exp(-mu^2 / 2 sigma^2) + mu (1 - 2 Phi(-mu / sigma)).
double folded_normal_mean(double mu, double sigma);

/// Bracketed root search (secant steps safeguarded by bisection).
/// Requires f(lo) * f(hi) <= 0; throws Error{NoBracket} otherwise.
/// Returns x with |f(x)| <= tol or a final bracket narrower than tol.
double find_root(const ScalarFn& f, double lo, double hi, double tol);

struct MinimizeResult {
    double argmin;
    double min;
};

/// Bounded minimization on [lo, hi]. A coarse scan picks the best cell,
/// then Brent's parabolic/golden-section search refines inside it, so the
/// result is the global minimizer whenever the coarse scan resolves it.
MinimizeResult minimize_1d(const ScalarFn& f, double lo, double hi, double tol);

/// Adaptive Gauss-Kronrod (7/15) quadrature on a finite interval with an
/// absolute tolerance. Reversed bounds give the negated integral.
double integrate(const ScalarFn& f, double lo, double hi, double abs_tol = 1e-12);

/// Same, splitting at the given interior breakpoints (kinks of f).
double integrate(const ScalarFn& f, double lo, double hi, std::span<const double> breakpoints,
                 double abs_tol = 1e-12);

/// Integral of f over (-inf, hi] through the change of variable
/// x = hi - (1 - t) / t, t in (0, 1]. f must decay fast enough that
/// f(x) x^2 -> 0.
double integrate_lower_tail(const ScalarFn& f, double hi, double abs_tol = 1e-12);

} // namespace repmech::numerics
