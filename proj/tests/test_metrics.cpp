// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "rcabf/metrics.hpp"

using namespace rcabf;

namespace {

VoxelGrid grid(std::size_t n = 21, double h = 1e-3)
{
    return VoxelGrid::centered({0.0, 0.0, 50e-3}, {n, n, n}, {h, h, h});
}

RoiBox box(Vec3 c, Vec3 half, RoiRole role = RoiRole::Tissue)
{
    return {c, half, role};
}

}  // namespace

TEST_CASE("peak search")
{
    Volume<double> v(grid(), 0.0);
    v(3, 4, 5) = 2.0;
    const auto p = find_peak(v);
    CHECK(p.index == std::array<std::size_t, 3>{3, 4, 5});
    CHECK(p.value == 2.0);
    CHECK(p.position == v.grid().position(3, 4, 5));

    v(1, 0, 0) = 2.0;
    CHECK(find_peak(v).linear == 1);

    CHECK_THROWS_AS(find_peak(Volume<double>(grid(), 0.0)), std::invalid_argument);
}

TEST_CASE("FWHM of analytic profiles")
{
    const double h = 0.1e-3;
    const auto g = VoxelGrid::centered({0.0, 0.0, 50e-3}, {201, 3, 3}, {h, h, h});
    const double sigma = 1.7e-3;
    Volume<double> gauss(g), tri(g);
    const double half_width = 2.3e-3;
    for (std::size_t iz = 0; iz < 3; ++iz)
        for (std::size_t iy = 0; iy < 3; ++iy)
            for (std::size_t ix = 0; ix < 201; ++ix) {
                const double x = g.coord(0, ix);
                const double w = (iy == 1 && iz == 1) ? 1.0 : 0.5;
                gauss(ix, iy, iz) = w * std::exp(-0.5 * x * x / (sigma * sigma));
                tri(ix, iy, iz) = w * std::max(0.0, 1.0 - std::abs(x) / half_width);
            }
    CHECK(fwhm(gauss, 0) == doctest::Approx(2.3548 * sigma).epsilon(0.02));
    CHECK(fwhm(tri, 0) == doctest::Approx(half_width).epsilon(1e-9));
    CHECK_THROWS_AS(fwhm(gauss, 1), std::domain_error);
}

TEST_CASE("FWHM is equal on symmetric axes and stable under refinement")
{
    auto sample = [](double h, std::size_t n) {
        const auto g = VoxelGrid::centered({0.0, 0.0, 50e-3}, {n, n, n}, {h, h, h});
        Volume<double> v(g);
        for (std::size_t iz = 0; iz < n; ++iz)
            for (std::size_t iy = 0; iy < n; ++iy)
                for (std::size_t ix = 0; ix < n; ++ix) {
                    const auto p = g.position(ix, iy, iz);
                    const double r = std::hypot(p[0], p[1], (p[2] - 50e-3) * 3.0) / 1e-3;
                    v(ix, iy, iz) = r == 0.0 ? 1.0 : std::abs(std::sin(2.0 * r) / (2.0 * r));
                }
        return v;
    };
    const auto coarse = sample(0.2e-3, 31), fine = sample(0.1e-3, 61);
    CHECK(std::abs(fwhm(coarse, 0) - fwhm(coarse, 1)) <= coarse.grid().spacing[0]);
    for (int a = 0; a < 3; ++a)
        CHECK(fwhm(fine, a) == doctest::Approx(fwhm(coarse, a)).epsilon(0.05));
}

TEST_CASE("PIR")
{
    Volume<double> v(grid(), 0.0);
    v(10, 10, 10) = 1.0;
    v(11, 10, 10) = 0.5;
    PeakMask m{v.grid().position(10, 10, 10), {1.5e-3, 1.5e-3, 1.5e-3}};
    CHECK(pir(v, m) == 1.0);

    Volume<double> u(grid(), 3.0);
    std::size_t inside = 0;
    for (std::size_t iz = 0; iz < 21; ++iz)
        for (std::size_t iy = 0; iy < 21; ++iy)
            for (std::size_t ix = 0; ix < 21; ++ix)
                inside += m.contains(u.grid().position(ix, iy, iz));
    CHECK(pir(u, m) == doctest::Approx(double(inside) / double(u.size())).epsilon(1e-12));

    CHECK_THROWS_AS(pir(Volume<double>(grid(), 0.0), m), std::invalid_argument);
}

TEST_CASE("PMSLR")
{
    Volume<double> v(grid(), 0.0);
    v(10, 10, 10) = 1.0;
    PeakMask m{v.grid().position(10, 10, 10), {1e-3, 1e-3, 1e-3}};
    CHECK(pmslr_db(v, m) == kPmslrCapDb);

    v(0, 10, 10) = 0.1;
    CHECK(pmslr_db(v, m) == doctest::Approx(20.0));
    v(0, 10, 10) = 0.2;
    CHECK(pmslr_db(v, m) == doctest::Approx(13.979).epsilon(1e-4));

    // Shoulders inside the doubled mask do not count as side lobes.
    v(12, 10, 10) = 0.9;
    CHECK(pmslr_db(v, m) == doctest::Approx(13.979).epsilon(1e-4));

    PeakMask huge{m.center, {1.0, 1.0, 1.0}};
    CHECK_THROWS_AS(pmslr_db(v, huge), std::invalid_argument);
}

TEST_CASE("metrics are invariant under positive scaling")
{
    Volume<double> v(grid(), 0.0), w(grid(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = 0.01 + std::abs(std::sin(0.37 * double(i)));
        w[i] = 5.5 * v[i];
    }
    v(10, 10, 10) = w(10, 10, 10) / 5.5;
    const PeakMask m{v.grid().position(10, 10, 10), {2e-3, 2e-3, 2e-3}};
    CHECK(pir(w, m) == doctest::Approx(pir(v, m)).epsilon(1e-12));
    CHECK(pmslr_db(w, m) == doctest::Approx(pmslr_db(v, m)).epsilon(1e-12));
    const auto a = box({-5e-3, 0, 50e-3}, {2e-3, 2e-3, 2e-3}), b = box({5e-3, 0, 50e-3}, {2e-3, 2e-3, 2e-3});
    CHECK(tcr_db(w, a, b) == doctest::Approx(tcr_db(v, a, b)).epsilon(1e-12));
    CHECK(0.0 <= pir(v, m));
    CHECK(pir(v, m) <= 1.0);
}

TEST_CASE("contrast ratios")
{
    Volume<double> v(grid(), 1.0);
    const auto left = box({-5e-3, 0, 50e-3}, {2e-3, 2e-3, 2e-3});
    const auto right = box({5e-3, 0, 50e-3}, {2e-3, 2e-3, 2e-3});
    CHECK(tcr_db(v, left, right) == 0.0);
    CHECK(tnr_db(v, left, left) == 0.0);

    for (std::size_t iz = 0; iz < 21; ++iz)
        for (std::size_t iy = 0; iy < 21; ++iy)
            for (std::size_t ix = 0; ix < 10; ++ix)
                v(ix, iy, iz) = 10.0;
    CHECK(tcr_db(v, left, right) == doctest::Approx(20.0));
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = v[i] == 10.0 ? 31.6 : 1.0;
    CHECK(tnr_db(v, left, right) == doctest::Approx(30.0).epsilon(1e-3));

    Volume<double> z(grid(), 0.0);
    CHECK_THROWS_AS(tcr_db(z, left, right), std::invalid_argument);
    CHECK_THROWS_AS(roi_mean(v, box({0, 0, 50e-3}, {20e-3, 1e-3, 1e-3})), std::invalid_argument);
}

TEST_CASE("sub-region statistics")
{
    Volume<double> u(grid(), 2.0);
    const auto roi = box({0.0, 0.0, 50e-3}, {4e-3, 1e-3, 1e-3});
    const auto s = subregion_stats(u, roi, 4);
    CHECK(s.mean == 2.0);
    CHECK(s.std_error == 0.0);
    CHECK(s.values.size() == 4);

    Volume<double> v(grid(), 0.0);
    for (std::size_t iz = 0; iz < 21; ++iz)
        for (std::size_t iy = 0; iy < 21; ++iy)
            for (std::size_t ix = 0; ix < 21; ++ix)
                v(ix, iy, iz) = 1.0 + 0.1 * double(ix * ix) + 0.01 * double(iy + iz);
    CHECK(subregion_stats(v, roi, 1).mean == doctest::Approx(roi_mean(v, roi)).epsilon(1e-12));

    // Slabs: x voxels {6,7,8}, {9,10}, {11,12}, {13,14}.
    const auto st = subregion_stats(v, roi, 4);
    REQUIRE(st.values.size() == 4);
    const double m[4] = {
        1.0 + 0.1 * (36 + 49 + 64) / 3.0 + 0.01 * 20.0,
        1.0 + 0.1 * (81 + 100) / 2.0 + 0.01 * 20.0,
        1.0 + 0.1 * (121 + 144) / 2.0 + 0.01 * 20.0,
        1.0 + 0.1 * (169 + 196) / 2.0 + 0.01 * 20.0,
    };
    const double mean = (m[0] + m[1] + m[2] + m[3]) / 4.0;
    double ss = 0.0;
    for (double x : m)
        ss += (x - mean) * (x - mean);
    CHECK(st.mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(st.std_error == doctest::Approx(std::sqrt(ss / 3.0) / 2.0).epsilon(1e-12));

    CHECK_THROWS_AS(subregion_stats(v, box({0, 0, 50e-3}, {0.2e-3, 1e-3, 1e-3}), 4), std::invalid_argument);

    const auto ratio = subregion_ratio_db(v, roi, roi, 4);
    CHECK(ratio.mean == 0.0);
    CHECK(ratio.std_error == 0.0);
}
