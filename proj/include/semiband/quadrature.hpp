#pragma once

// Adaptive quadrature on top of GSL (QAGP on finite intervals with known
// breakpoints, QAGIU on [a, inf)).

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace semiband {

struct QuadratureSettings {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    std::size_t max_subdivisions = 2000;

    void validate() const
    {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
            throw std::invalid_argument("QuadratureSettings: tolerances must be > 0");
        if (max_subdivisions < 1)
            throw std::invalid_argument("QuadratureSettings: max_subdivisions must be >= 1");
    }
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0; ///< estimated absolute error
};

/// Raised when the integrator stops before meeting its tolerance.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double estimate, double error_bound)
        : std::runtime_error(what + " (estimate " + std::to_string(estimate) + ", error bound " +
                             std::to_string(error_bound) + ")"),
          estimate_(estimate), error_bound_(error_bound)
    {
    }
    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

namespace detail {

struct GslWorkspaceDeleter {
    void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};

inline void gsl_quiet()
{
    // GSL aborts by default; we inspect status codes instead.
    static const bool once = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)once;
}

template <class F>
double gsl_trampoline(double x, void* params)
{
    return (*static_cast<F*>(params))(x);
}

inline QuadratureResult finish(int status, double value, double error, const char* who)
{
    if (status != GSL_SUCCESS || !std::isfinite(value))
        throw QuadratureError(std::string(who) + ": " + gsl_strerror(status), value, error);
    return {value, error};
}

} // namespace detail

/// Integral of f over [a, b]; `breakpoints` strictly inside (a, b) mark
/// kinks or rapid changes of the integrand.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, std::vector<double> breakpoints = {},
                           const QuadratureSettings& settings = {})
{
    settings.validate();
    if (!(a < b))
        throw std::invalid_argument("integrate: need a < b");
    detail::gsl_quiet();
    std::vector<double> pts;
    pts.reserve(breakpoints.size() + 2);
    pts.push_back(a);
    std::sort(breakpoints.begin(), breakpoints.end());
    for (double x : breakpoints)
        if (x > pts.back() && x < b)
            pts.push_back(x);
    pts.push_back(b);

    using Fn = std::remove_reference_t<F>;
    gsl_function g{&detail::gsl_trampoline<Fn>, const_cast<void*>(static_cast<const void*>(&f))};
    std::unique_ptr<gsl_integration_workspace, detail::GslWorkspaceDeleter> ws(
        gsl_integration_workspace_alloc(settings.max_subdivisions));
    double value = 0.0;
    double error = 0.0;
    const int status = gsl_integration_qagp(&g, pts.data(), pts.size(), settings.abs_tol, settings.rel_tol,
                                            settings.max_subdivisions, ws.get(), &value, &error);
    return detail::finish(status, value, error, "integrate");
}

/// Integral of f over [a, inf).
template <class F>
QuadratureResult integrate_to_infinity(F&& f, double a, const QuadratureSettings& settings = {})
{
    settings.validate();
    detail::gsl_quiet();
    using Fn = std::remove_reference_t<F>;
    gsl_function g{&detail::gsl_trampoline<Fn>, const_cast<void*>(static_cast<const void*>(&f))};
    std::unique_ptr<gsl_integration_workspace, detail::GslWorkspaceDeleter> ws(
        gsl_integration_workspace_alloc(settings.max_subdivisions));
    double value = 0.0;
    double error = 0.0;
    const int status = gsl_integration_qagiu(&g, a, settings.abs_tol, settings.rel_tol, settings.max_subdivisions,
                                             ws.get(), &value, &error);
    return detail::finish(status, value, error, "integrate_to_infinity");
}

} // namespace semiband
