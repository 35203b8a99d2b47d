#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace fmm::geo {

constexpr double kEarthRadiusKm = 6371.0;
constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * (kPi / 180.0); }

struct GeoPoint {
    double lat = 0.0; // degrees, [-90, 90]
    double lng = 0.0; // degrees, [-180, 180]
};

bool is_valid(const GeoPoint& p);

// Throws std::invalid_argument when p is outside the valid range or non-finite.
void validate(const GeoPoint& p);

struct FieldPoint {
    double x = 0.0; // meters
    double y = 0.0; // meters
};

struct PlanarPoint {
    double x = 0.0;
    double y = 0.0;
};

// Great-circle distance in kilometers, stable asin(sqrt(phi)) form.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

// Miller cylindrical projection; input degrees, output radians-scaled planar units.
PlanarPoint miller_project(const GeoPoint& p);

// Similarity transform (uniform scale + translation) from Miller plane into
// a [0,width]x[0,height] field, content centered when aspect ratios differ.
struct FieldTransform {
    double scale = 1.0;
    double dx = 0.0;
    double dy = 0.0;

    FieldPoint apply(const PlanarPoint& p) const {
        return {scale * p.x + dx, scale * p.y + dy};
    }
    FieldPoint apply(const GeoPoint& p) const { return apply(miller_project(p)); }
};

struct FieldFit {
    std::vector<FieldPoint> points;
    FieldTransform transform;
};

// Projects all points and fits them into the field with one uniform scale.
// All-identical input degenerates to the field center at scale 1.
FieldFit fit_to_field(std::span<const GeoPoint> points, double width, double height);

inline double field_distance(const FieldPoint& a, const FieldPoint& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

} // namespace fmm::geo
