#include "pweight/distfn.hpp"

#include "pweight/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace pweight::distfn {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Below this the erfc route is still inside the normal double range.
constexpr double kLogSpaceSwitch = 30.0;

template <std::size_t N>
double poly(const double (&c)[N], double x) noexcept
{
    double acc = c[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) {
        acc = acc * x + c[i];
    }
    return acc;
}

// Wichura (1988), algorithm AS 241 PPND16: lower-tail normal quantile.
double lower_quantile_as241(double p) noexcept
{
    static constexpr double a[] = {3.3871328727963666080e0, 1.3314166789178437745e+2,
                                   1.9715909503065514427e+3, 1.3731693765509461125e+4,
                                   4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                   3.3430575583588128105e+4, 2.5090809287301226727e+3};
    static constexpr double b[] = {1.0,
                                   4.2313330701600911252e+1, 6.8718700749205790830e+2,
                                   5.3941960214247511077e+3, 2.1213794301586595867e+4,
                                   3.9307895800092710610e+4, 2.8729085735721942674e+4,
                                   5.2264952788528545610e+3};
    static constexpr double c[] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                                   5.76949722146069140550e0, 3.64784832476320460504e0,
                                   1.27045825245236838258e0, 2.41780725177450611770e-1,
                                   2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static constexpr double d[] = {1.0,
                                   2.05319162663775882187e0, 1.67638483018380384940e0,
                                   6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                   1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                   1.05075007164441684324e-9};
    static constexpr double e[] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                                   1.78482653991729133580e0, 2.96560571828504891230e-1,
                                   2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                   2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static constexpr double f[] = {1.0,
                                   5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                   1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                   1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                   2.04426310338993978564e-15};

    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * poly(a, r) / poly(b, r);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        x = poly(c, r) / poly(d, r);
    } else {
        r -= 5.0;
        x = poly(e, r) / poly(f, r);
    }
    return q < 0.0 ? -x : x;
}

} // namespace

double density(double z) noexcept
{
    return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double upper_tail(double z) noexcept
{
    return 0.5 * std::erfc(z * std::numbers::sqrt2 * 0.5);
}

double log_upper_tail(double z) noexcept
{
    if (std::isnan(z)) {
        return z;
    }
    if (z < kLogSpaceSwitch) {
        return std::log(upper_tail(z));
    }
    if (std::isinf(z)) {
        return -std::numeric_limits<double>::infinity();
    }
    // Mills ratio: upper_tail(z) = density(z) / (z + 1/(z + 2/(z + 3/(z + ...)))).
    // Forty terms are far beyond convergence for z >= 30.
    double cf = z;
    for (int k = 40; k >= 1; --k) {
        cf = z + k / cf;
    }
    return -0.5 * z * z - kLogSqrt2Pi - std::log(cf);
}

double upper_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("upper_quantile: probability must lie in (0, 1), got " +
                          std::to_string(p));
    }
    double z = -lower_quantile_as241(p);

    // One Halley step on upper_tail(z) - p.
    const double phi = density(z);
    if (phi > 0.0) {
        const double u = (upper_tail(z) - p) / phi;
        z += u / (1.0 - 0.5 * z * u);
    }
    return z;
}

double threshold_quantile(double t)
{
    if (std::isnan(t)) {
        throw DomainError("threshold_quantile: level is NaN");
    }
    if (t <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    if (t >= 1.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return upper_quantile(t);
}

double noncentral_chisq1_upper_tail(double x, double lambda)
{
    if (!(x >= 0.0) || !(lambda >= 0.0)) {
        throw DomainError("noncentral_chisq1_upper_tail: x and lambda must be nonnegative");
    }
    const double rx = std::sqrt(x);
    const double rl = std::sqrt(lambda);
    return upper_tail(rx - rl) + upper_tail(rx + rl);
}

} // namespace pweight::distfn
