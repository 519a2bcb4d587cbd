#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace drf {

/// Rectangular grid over a window of incidence angles, degrees. Bins are
/// cells: center i sits at min + (i + 0.5) * step.
struct AngularDomain {
    double u_min = 0.0, u_max = 0.0;
    double v_min = 0.0, v_max = 0.0;
    std::size_t n_u = 0, n_v = 0;

    AngularDomain() = default;
    AngularDomain(double umin, double umax, double vmin, double vmax,
                  std::size_t nu, std::size_t nv)
        : u_min(umin), u_max(umax), v_min(vmin), v_max(vmax), n_u(nu), n_v(nv) {
        if (!(u_max > u_min) || !(v_max > v_min) || n_u == 0 || n_v == 0)
            throw std::invalid_argument("AngularDomain: degenerate window");
    }

    double u_step() const { return (u_max - u_min) / static_cast<double>(n_u); }
    double v_step() const { return (v_max - v_min) / static_cast<double>(n_v); }
    double u_center(std::size_t i) const { return u_min + (static_cast<double>(i) + 0.5) * u_step(); }
    double v_center(std::size_t j) const { return v_min + (static_cast<double>(j) + 0.5) * v_step(); }

    std::vector<double> u_centers() const {
        std::vector<double> c(n_u);
        for (std::size_t i = 0; i < n_u; ++i) c[i] = u_center(i);
        return c;
    }
    std::vector<double> v_centers() const {
        std::vector<double> c(n_v);
        for (std::size_t j = 0; j < n_v; ++j) c[j] = v_center(j);
        return c;
    }

    bool same_grid(const AngularDomain& o) const {
        return n_u == o.n_u && n_v == o.n_v;
    }
};

} // namespace drf
