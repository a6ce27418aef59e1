#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pinnsel/common.hpp"

namespace pinnsel {

/// 1D viscous Burgers problem u_t + u u_x = nu u_xx on [x_lo, x_hi] x [0, T]
/// with Dirichlet boundary values and a pointwise initial condition.
struct BurgersProblem {
    double nu = 0.01 / kPi;
    double T = 1.0;
    double x_lo = -1.0;
    double x_hi = 1.0;
    std::function<double(double)> ic = [](double x) { return -std::sin(kPi * x); };
    double bc_lo = 0.0;
    double bc_hi = 0.0;

    void validate() const;  // throws std::invalid_argument on bad fields
};

/// Dense space-time field stored at nx uniform spatial nodes (boundaries
/// included) and nt uniform time slices. Immutable once built; safe to share.
struct ReferenceSolution {
    std::vector<double> grid_x;  // size nx
    std::vector<double> grid_t;  // size nt
    std::vector<double> values;  // nx * nt, values[ix * nt + it]

    int nx() const { return static_cast<int>(grid_x.size()); }
    int nt() const { return static_cast<int>(grid_t.size()); }
    double at(int ix, int it) const { return values[static_cast<std::size_t>(ix) * grid_t.size() + it]; }
};

/// Finite-volume solve with Rusanov flux for the convective term and explicit
/// central differencing for the diffusion term. The time step satisfies both
/// the advective (cfl*dx/max|u|) and diffusive (cfl*dx^2/(2 nu)) limits via
/// dt = cfl / (max|u|/dx + 2 nu/dx^2). Throws on a non-finite state.
ReferenceSolution solve_reference(const BurgersProblem& problem, int nx,
                                  double cfl = 0.5, int nt = 101);

/// Bilinear interpolation in (x, t); exact at grid nodes. Points may sit
/// outside the domain by at most 1e-12 (clamped); farther out throws.
std::vector<double> sample_reference(const ReferenceSolution& sol,
                                     std::span<const Point> points);
double sample_reference_at(const ReferenceSolution& sol, double x, double t);

void write_reference_csv(const ReferenceSolution& sol, const std::string& path);
ReferenceSolution read_reference_csv(const std::string& path);

}  // namespace pinnsel
