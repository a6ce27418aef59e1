#include "pinnsel/pde_reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pinnsel {

void BurgersProblem::validate() const {
    if (!(nu > 0.0)) throw std::invalid_argument("BurgersProblem: nu must be > 0");
    if (!(T > 0.0)) throw std::invalid_argument("BurgersProblem: T must be > 0");
    if (!(x_lo < x_hi)) throw std::invalid_argument("BurgersProblem: x_lo must be < x_hi");
    if (!ic) throw std::invalid_argument("BurgersProblem: missing initial condition");
}

namespace {

// Rusanov (local Lax-Friedrichs) flux for f(u) = u^2/2.
inline double rusanov_flux(double ul, double ur) {
    const double fl = 0.5 * ul * ul;
    const double fr = 0.5 * ur * ur;
    const double a = std::max(std::fabs(ul), std::fabs(ur));
    return 0.5 * (fl + fr) - 0.5 * a * (ur - ul);
}

}  // namespace

ReferenceSolution solve_reference(const BurgersProblem& problem, int nx,
                                  double cfl, int nt) {
    problem.validate();
    if (nx < 64) throw std::invalid_argument("solve_reference: nx must be >= 64");
    if (!(cfl > 0.0 && cfl <= 0.9)) throw std::invalid_argument("solve_reference: cfl must be in (0, 0.9]");
    if (nt < 2) throw std::invalid_argument("solve_reference: nt must be >= 2");

    ReferenceSolution sol;
    sol.grid_x.resize(nx);
    sol.grid_t.resize(nt);
    sol.values.assign(static_cast<std::size_t>(nx) * nt, 0.0);

    // Node placement is symmetric about the domain midpoint so that mirrored
    // nodes are exact negations of each other on symmetric domains.
    const double mid = 0.5 * (problem.x_lo + problem.x_hi);
    const double half = 0.5 * (problem.x_hi - problem.x_lo);
    const double inv = half / (nx - 1);
    for (int i = 0; i < nx; ++i) {
        sol.grid_x[i] = mid + static_cast<double>(2 * i - (nx - 1)) * inv;
    }
    sol.grid_x.front() = problem.x_lo;
    sol.grid_x.back() = problem.x_hi;
    const double dx = (problem.x_hi - problem.x_lo) / (nx - 1);

    for (int k = 0; k < nt; ++k) {
        sol.grid_t[k] = problem.T * static_cast<double>(k) / (nt - 1);
    }

    std::vector<double> u(nx), un(nx), flux(nx - 1);
    for (int i = 0; i < nx; ++i) u[i] = problem.ic(sol.grid_x[i]);
    u.front() = problem.bc_lo;
    u.back() = problem.bc_hi;

    auto store_slice = [&](int it) {
        for (int i = 0; i < nx; ++i) {
            sol.values[static_cast<std::size_t>(i) * nt + it] = u[i];
        }
    };
    store_slice(0);

    double t = 0.0;
    long step = 0;
    const double diffusive = 2.0 * problem.nu / (dx * dx);
    for (int it = 1; it < nt; ++it) {
        const double t_target = sol.grid_t[it];
        while (t < t_target - 1e-14 * problem.T) {
            double umax = 0.0;
            for (int i = 0; i < nx; ++i) umax = std::max(umax, std::fabs(u[i]));
            if (!std::isfinite(umax)) {
                throw std::runtime_error(
                    "solve_reference: non-finite state at step " + std::to_string(step) +
                    " (max|u| = " + std::to_string(umax) + ")");
            }
            double dt = cfl / (umax / dx + diffusive);
            dt = std::min(dt, t_target - t);

            for (int i = 0; i + 1 < nx; ++i) flux[i] = rusanov_flux(u[i], u[i + 1]);
            const double lam = dt / dx;
            const double dcoef = problem.nu * dt / (dx * dx);
            un.front() = problem.bc_lo;
            un.back() = problem.bc_hi;
            for (int i = 1; i + 1 < nx; ++i) {
                un[i] = u[i] - lam * (flux[i] - flux[i - 1]) +
                        dcoef * ((u[i + 1] + u[i - 1]) - 2.0 * u[i]);
            }
            u.swap(un);
            t += dt;
            ++step;
        }
        t = t_target;
        store_slice(it);
    }
    return sol;
}

namespace {

// Index of the grid cell containing v, clamped to valid cells; also returns
// the fractional offset within the cell.
inline void locate(const std::vector<double>& grid, double v, int& idx, double& frac) {
    const int n = static_cast<int>(grid.size());
    const double lo = grid.front();
    const double hi = grid.back();
    const double h = (hi - lo) / (n - 1);
    double pos = (v - lo) / h;
    if (pos < 0.0) pos = 0.0;
    idx = static_cast<int>(pos);
    if (idx > n - 2) idx = n - 2;
    frac = (v - grid[idx]) / (grid[idx + 1] - grid[idx]);
    frac = std::clamp(frac, 0.0, 1.0);
}

}  // namespace

double sample_reference_at(const ReferenceSolution& sol, double x, double t) {
    const double x_lo = sol.grid_x.front(), x_hi = sol.grid_x.back();
    const double t_lo = sol.grid_t.front(), t_hi = sol.grid_t.back();
    const double tol = 1e-12;
    if (x < x_lo - tol || x > x_hi + tol || t < t_lo - tol || t > t_hi + tol) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "sample_reference: point (%.17g, %.17g) outside domain", x, t);
        throw std::out_of_range(buf);
    }
    x = std::clamp(x, x_lo, x_hi);
    t = std::clamp(t, t_lo, t_hi);

    int ix, it;
    double fx, ft;
    locate(sol.grid_x, x, ix, fx);
    locate(sol.grid_t, t, it, ft);
    const double v00 = sol.at(ix, it);
    const double v10 = sol.at(ix + 1, it);
    const double v01 = sol.at(ix, it + 1);
    const double v11 = sol.at(ix + 1, it + 1);
    return (1.0 - fx) * ((1.0 - ft) * v00 + ft * v01) +
           fx * ((1.0 - ft) * v10 + ft * v11);
}

std::vector<double> sample_reference(const ReferenceSolution& sol,
                                     std::span<const Point> points) {
    std::vector<double> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        out[i] = sample_reference_at(sol, points[i].x, points[i].t);
    }
    return out;
}

void write_reference_csv(const ReferenceSolution& sol, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_reference_csv: cannot open " + path);
    f.precision(17);
    f << "nx," << sol.nx() << ",nt," << sol.nt() << "\n";
    f << "x";
    for (double x : sol.grid_x) f << ',' << x;
    f << "\nt";
    for (double t : sol.grid_t) f << ',' << t;
    f << '\n';
    for (int i = 0; i < sol.nx(); ++i) {
        for (int k = 0; k < sol.nt(); ++k) {
            if (k) f << ',';
            f << sol.at(i, k);
        }
        f << '\n';
    }
}

ReferenceSolution read_reference_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_reference_csv: cannot open " + path);
    std::string line;
    auto fail = [&](const std::string& why) {
        throw std::runtime_error("read_reference_csv: " + why + " in " + path);
    };

    if (!std::getline(f, line)) fail("missing header");
    int nx = 0, nt = 0;
    if (std::sscanf(line.c_str(), "nx,%d,nt,%d", &nx, &nt) != 2 || nx < 2 || nt < 2) {
        fail("bad header");
    }
    ReferenceSolution sol;
    auto read_row = [&](const char* tag, std::vector<double>& out, int n) {
        if (!std::getline(f, line)) fail("truncated file");
        std::stringstream ss(line);
        std::string cell;
        if (!std::getline(ss, cell, ',') || cell != tag) fail("bad row tag");
        out.reserve(n);
        while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
        if (static_cast<int>(out.size()) != n) fail("bad row length");
    };
    read_row("x", sol.grid_x, nx);
    read_row("t", sol.grid_t, nt);
    sol.values.reserve(static_cast<std::size_t>(nx) * nt);
    for (int i = 0; i < nx; ++i) {
        if (!std::getline(f, line)) fail("truncated values");
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) sol.values.push_back(std::stod(cell));
    }
    if (sol.values.size() != static_cast<std::size_t>(nx) * nt) fail("bad value count");
    return sol;
}

}  // namespace pinnsel
