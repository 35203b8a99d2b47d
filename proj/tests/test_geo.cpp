#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fmm/geo.hpp"
#include "fmm/rng.hpp"

using namespace fmm;
using geo::GeoPoint;

namespace {

// Independent great-circle oracle: spherical law of cosines. Written before
// the haversine implementation; ill-conditioned only near antipodes.
double law_of_cosines_km(const GeoPoint& a, const GeoPoint& b) {
    const double la = geo::deg_to_rad(a.lat);
    const double lb = geo::deg_to_rad(b.lat);
    const double dl = geo::deg_to_rad(b.lng - a.lng);
    double c = std::sin(la) * std::sin(lb) + std::cos(la) * std::cos(lb) * std::cos(dl);
    c = std::max(-1.0, std::min(1.0, c));
    return geo::kEarthRadiusKm * std::acos(c);
}

GeoPoint random_point(Rng& rng) {
    return {rng.uniform(-90.0, 90.0), rng.uniform(-180.0, 180.0)};
}

constexpr GeoPoint kAustinAirport{30.20155, -97.66712};
constexpr GeoPoint kAppleHq{37.33188, -122.02963};

} // namespace

TEST_CASE("haversine zero separation") {
    Rng rng(11);
    for (int i = 0; i < 50; ++i) {
        const auto p = random_point(rng);
        CHECK(geo::haversine_km(p, p) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("haversine matches the law-of-cosines oracle on known venues") {
    const double expected = law_of_cosines_km(kAustinAirport, kAppleHq);
    CHECK(geo::haversine_km(kAustinAirport, kAppleHq) == doctest::Approx(expected).epsilon(1e-9));
    // Sanity: Austin to Cupertino is roughly 2400 km.
    CHECK(expected > 2300.0);
    CHECK(expected < 2500.0);
}

TEST_CASE("haversine antipodal on equator is half the circumference") {
    const double d = geo::haversine_km({0.0, 0.0}, {0.0, 180.0});
    CHECK(d == doctest::Approx(geo::kPi * geo::kEarthRadiusKm).epsilon(1e-12));
}

TEST_CASE("haversine rejects invalid coordinates") {
    CHECK_THROWS_AS(geo::haversine_km({95.0, 0.0}, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(geo::haversine_km({0.0, 0.0}, {0.0, 181.0}), std::invalid_argument);
    const double nan = std::nan("");
    CHECK_THROWS_AS(geo::haversine_km({nan, 0.0}, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("haversine symmetry, bounds, and triangle inequality") {
    Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        const auto a = random_point(rng);
        const auto b = random_point(rng);
        const auto c = random_point(rng);
        const double ab = geo::haversine_km(a, b);
        const double ba = geo::haversine_km(b, a);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-14));
        CHECK(ab >= 0.0);
        CHECK(ab <= geo::kPi * geo::kEarthRadiusKm + 1e-9);
        const double ac = geo::haversine_km(a, c);
        const double cb = geo::haversine_km(c, b);
        CHECK(ab <= ac + cb + 1e-9 * geo::kEarthRadiusKm);
    }
}

TEST_CASE("miller projection fixes the origin") {
    const auto p = geo::miller_project({0.0, 0.0});
    CHECK(p.x == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(p.y == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("miller projection is odd in latitude") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const double lat = rng.uniform(-89.0, 89.0);
        const double lng = rng.uniform(-180.0, 180.0);
        const auto up = geo::miller_project({lat, lng});
        const auto down = geo::miller_project({-lat, lng});
        CHECK(up.y == doctest::Approx(-down.y).epsilon(1e-12));
        CHECK(up.x == doctest::Approx(down.x).epsilon(1e-15));
    }
}

TEST_CASE("miller projection matches the textbook formula at the Austin airport") {
    // Oracle computed independently: x = lng in radians,
    // y = 1.25 * ln(tan(pi/4 + 0.4 * lat_rad)).
    const auto p = geo::miller_project(kAustinAirport);
    CHECK(p.x == doctest::Approx(-1.7046128149404043).epsilon(1e-12));
    CHECK(p.y == doctest::Approx(0.5434714420466864).epsilon(1e-12));
}

TEST_CASE("miller projection is strictly monotone in both axes") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const double lat = rng.uniform(-88.0, 88.0);
        const double lng = rng.uniform(-179.0, 179.0);
        const double dlat = rng.uniform(0.01, 1.0);
        const double dlng = rng.uniform(0.01, 1.0);
        CHECK(geo::miller_project({lat + dlat, lng}).y > geo::miller_project({lat, lng}).y);
        CHECK(geo::miller_project({lat, lng + dlng}).x > geo::miller_project({lat, lng}).x);
    }
}

TEST_CASE("fit_to_field: single point lands at the field center") {
    const GeoPoint p{42.0, -71.0};
    const auto fit = geo::fit_to_field(std::vector<GeoPoint>{p}, 2000.0, 1000.0);
    CHECK(fit.points.size() == 1);
    CHECK(fit.points[0].x == doctest::Approx(1000.0));
    CHECK(fit.points[0].y == doctest::Approx(500.0));
    CHECK(fit.transform.scale == doctest::Approx(1.0));
}

TEST_CASE("fit_to_field: identical points degenerate to the center") {
    const std::vector<GeoPoint> pts(4, GeoPoint{10.0, 10.0});
    const auto fit = geo::fit_to_field(pts, 500.0, 500.0);
    for (const auto& fp : fit.points) {
        CHECK(fp.x == doctest::Approx(250.0));
        CHECK(fp.y == doctest::Approx(250.0));
    }
}

TEST_CASE("fit_to_field: empty input and bad dimensions are rejected") {
    CHECK_THROWS_AS(geo::fit_to_field({}, 100.0, 100.0), std::invalid_argument);
    const std::vector<GeoPoint> pts{{0.0, 0.0}};
    CHECK_THROWS_AS(geo::fit_to_field(pts, 0.0, 100.0), std::invalid_argument);
}

TEST_CASE("fit_to_field: two points keep their projected length ratio") {
    const std::vector<GeoPoint> pts{{0.0, 0.0}, {0.0, 1.0}};
    const auto fit = geo::fit_to_field(pts, 1000.0, 1000.0);
    // Both on the equator: a horizontal segment spanning the limiting axis.
    CHECK(geo::field_distance(fit.points[0], fit.points[1]) == doctest::Approx(1000.0));
    CHECK(fit.points[0].y == doctest::Approx(fit.points[1].y));
}

TEST_CASE("fit_to_field: equatorial 1-degree cell fills the limiting dimension") {
    // Hand result: near the equator Miller is nearly conformal, so a 1x1 degree
    // cell projects to an almost-square axis-aligned rectangle.
    const std::vector<GeoPoint> pts{{0.0, 10.0}, {0.0, 11.0}, {1.0, 10.0}, {1.0, 11.0}};
    const auto fit = geo::fit_to_field(pts, 2000.0, 1000.0);
    const double w = geo::field_distance(fit.points[0], fit.points[1]);
    const double h = geo::field_distance(fit.points[0], fit.points[2]);
    CHECK(h == doctest::Approx(1000.0)); // height is the limiting axis
    CHECK(w == doctest::Approx(h).epsilon(2e-3));
    // Letterboxed horizontally: centered within the 2000 m width.
    CHECK(fit.points[0].x == doctest::Approx((2000.0 - w) / 2.0));
}

TEST_CASE("fit_to_field preserves distance ratios (uniform scaling)") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<GeoPoint> pts;
        for (int i = 0; i < 3; ++i) {
            pts.push_back({rng.uniform(-60.0, 60.0), rng.uniform(-170.0, 170.0)});
        }
        const auto proj_ab = geo::miller_project(pts[0]);
        const auto proj_b = geo::miller_project(pts[1]);
        const auto proj_c = geo::miller_project(pts[2]);
        const double pab = std::hypot(proj_ab.x - proj_b.x, proj_ab.y - proj_b.y);
        const double pac = std::hypot(proj_ab.x - proj_c.x, proj_ab.y - proj_c.y);
        if (pac < 1e-9) continue;
        const auto fit = geo::fit_to_field(pts, 2000.0, 2000.0);
        const double fab = geo::field_distance(fit.points[0], fit.points[1]);
        const double fac = geo::field_distance(fit.points[0], fit.points[2]);
        CHECK(fab / fac == doctest::Approx(pab / pac).epsilon(1e-9));
    }
}
