#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <map>

#include "pinnsel/pde_reference.hpp"

using namespace pinnsel;

namespace {

const ReferenceSolution& solved(int nx) {
    static std::map<int, ReferenceSolution> cache;
    auto it = cache.find(nx);
    if (it == cache.end()) {
        it = cache.emplace(nx, solve_reference(BurgersProblem{}, nx)).first;
    }
    return it->second;
}

// Mean absolute difference between two solutions at time T over a fixed
// uniform sample set.
double l1_final_difference(const ReferenceSolution& a, const ReferenceSolution& b,
                           int samples = 2001) {
    double acc = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double x = -1.0 + 2.0 * i / (samples - 1);
        acc += std::fabs(sample_reference_at(a, x, 1.0) - sample_reference_at(b, x, 1.0));
    }
    return acc / samples;
}

}  // namespace

TEST_CASE("preconditions are enforced") {
    BurgersProblem p;
    CHECK_THROWS(solve_reference(p, 32));
    CHECK_THROWS(solve_reference(p, 128, 0.0));
    CHECK_THROWS(solve_reference(p, 128, 1.2));
    CHECK_THROWS(solve_reference(p, 128, 0.5, 1));
    p.nu = 0.0;
    CHECK_THROWS(solve_reference(p, 128));
}

TEST_CASE("initial slice samples the IC exactly and boundaries are pinned") {
    const auto& sol = solved(256);
    for (int i = 1; i + 1 < sol.nx(); ++i) {
        CHECK(sol.at(i, 0) == doctest::Approx(-std::sin(kPi * sol.grid_x[i])).epsilon(1e-15));
    }
    for (int k = 0; k < sol.nt(); ++k) {
        CHECK(sol.at(0, k) == 0.0);
        CHECK(sol.at(sol.nx() - 1, k) == 0.0);
    }
}

TEST_CASE("odd symmetry holds on symmetric grids") {
    const auto& sol = solved(256);  // nx even
    for (int k = 0; k < sol.nt(); ++k) {
        // centerline via interpolation of the two middle nodes
        CHECK(std::fabs(sample_reference_at(sol, 0.0, sol.grid_t[k])) < 1e-12);
    }
    for (int i = 0; i < sol.nx(); ++i) {
        for (int k = 0; k < sol.nt(); k += 10) {
            const double mirrored = sample_reference_at(sol, -sol.grid_x[i], sol.grid_t[k]);
            CHECK(std::fabs(mirrored + sol.at(i, k)) < 1e-10);
        }
    }
}

TEST_CASE("maximum principle") {
    const auto& sol = solved(256);
    double ic_max = 0.0;
    for (int i = 0; i < sol.nx(); ++i) ic_max = std::max(ic_max, std::fabs(sol.at(i, 0)));
    for (int i = 0; i < sol.nx(); ++i) {
        for (int k = 0; k < sol.nt(); ++k) {
            CHECK(std::fabs(sol.at(i, k)) <= ic_max + 1e-8);
        }
    }
}

TEST_CASE("self-convergence: first-order L1 contraction") {
    const double d_coarse = l1_final_difference(solved(512), solved(1024));
    const double d_fine = l1_final_difference(solved(1024), solved(2048));
    CHECK(d_fine > 0.0);
    CHECK(d_coarse / d_fine >= 1.7);
}

TEST_CASE("interpolation identities") {
    const auto& sol = solved(256);
    // grid nodes are exact
    CHECK(sample_reference_at(sol, sol.grid_x[17], sol.grid_t[3]) == sol.at(17, 3));
    // spatial midpoint at a stored time is the mean of neighbors
    const double xm = 0.5 * (sol.grid_x[40] + sol.grid_x[41]);
    const double expect = 0.5 * (sol.at(40, 7) + sol.at(41, 7));
    CHECK(sample_reference_at(sol, xm, sol.grid_t[7]) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("coarse query agrees with a much finer solve") {
    // first-order scheme: pointwise deviation bounded by the coarse grid's h
    const double fine = sample_reference_at(solved(4096), 0.37, 0.52);
    const double coarse = sample_reference_at(solved(512), 0.37, 0.52);
    const double mid = sample_reference_at(solved(1024), 0.37, 0.52);
    CHECK(std::fabs(coarse - fine) < 2.0 / 511.0);
    CHECK(std::fabs(mid - fine) < 2.0 / 1023.0);
}

TEST_CASE("out-of-domain queries throw beyond the tolerance") {
    const auto& sol = solved(256);
    CHECK_THROWS(sample_reference_at(sol, 1.5, 0.5));
    CHECK_THROWS(sample_reference_at(sol, 0.0, -0.1));
    CHECK_NOTHROW(sample_reference_at(sol, 1.0 + 1e-13, 0.5));
}

TEST_CASE("csv round trip") {
    const auto sol = solve_reference(BurgersProblem{}, 64, 0.5, 5);
    const std::string path = "ref_roundtrip_test.csv";
    write_reference_csv(sol, path);
    const auto back = read_reference_csv(path);
    REQUIRE(back.nx() == sol.nx());
    REQUIRE(back.nt() == sol.nt());
    for (int i = 0; i < sol.nx(); ++i) {
        for (int k = 0; k < sol.nt(); ++k) {
            CHECK(back.at(i, k) == doctest::Approx(sol.at(i, k)).epsilon(1e-15));
        }
    }
    std::remove(path.c_str());
}
