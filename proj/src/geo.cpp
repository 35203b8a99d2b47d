#include "fmm/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fmm::geo {

bool is_valid(const GeoPoint& p) {
    return std::isfinite(p.lat) && std::isfinite(p.lng) &&
           p.lat >= -90.0 && p.lat <= 90.0 &&
           p.lng >= -180.0 && p.lng <= 180.0;
}

void validate(const GeoPoint& p) {
    if (!is_valid(p)) {
        throw std::invalid_argument("GeoPoint out of range: lat=" + std::to_string(p.lat) +
                                    " lng=" + std::to_string(p.lng));
    }
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    validate(a);
    validate(b);
    const double lat_a = deg_to_rad(a.lat);
    const double lat_b = deg_to_rad(b.lat);
    const double dlat = deg_to_rad(a.lat - b.lat);
    const double dlng = deg_to_rad(a.lng - b.lng);

    const double s_lat = std::sin(dlat / 2.0);
    const double s_lng = std::sin(dlng / 2.0);
    double phi = s_lat * s_lat + std::cos(lat_a) * std::cos(lat_b) * s_lng * s_lng;
    phi = std::clamp(phi, 0.0, 1.0);
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(phi));
}

PlanarPoint miller_project(const GeoPoint& p) {
    validate(p);
    const double phi = deg_to_rad(p.lat);
    const double lambda = deg_to_rad(p.lng);
    return {lambda, 1.25 * std::log(std::tan(kPi / 4.0 + 0.4 * phi))};
}

FieldFit fit_to_field(std::span<const GeoPoint> points, double width, double height) {
    if (points.empty()) {
        throw std::invalid_argument("fit_to_field: empty point list");
    }
    if (!(width > 0.0) || !(height > 0.0)) {
        throw std::invalid_argument("fit_to_field: field dimensions must be positive");
    }

    std::vector<PlanarPoint> proj;
    proj.reserve(points.size());
    double min_x = std::numeric_limits<double>::infinity();
    double max_x = -std::numeric_limits<double>::infinity();
    double min_y = std::numeric_limits<double>::infinity();
    double max_y = -std::numeric_limits<double>::infinity();
    for (const auto& g : points) {
        PlanarPoint q = miller_project(g);
        min_x = std::min(min_x, q.x);
        max_x = std::max(max_x, q.x);
        min_y = std::min(min_y, q.y);
        max_y = std::max(max_y, q.y);
        proj.push_back(q);
    }

    const double span_x = max_x - min_x;
    const double span_y = max_y - min_y;

    FieldTransform tf;
    if (span_x == 0.0 && span_y == 0.0) {
        // Degenerate bounding box: place at field center, scale 1.
        tf.scale = 1.0;
        tf.dx = width / 2.0 - min_x;
        tf.dy = height / 2.0 - min_y;
    } else {
        double scale = std::numeric_limits<double>::infinity();
        if (span_x > 0.0) scale = std::min(scale, width / span_x);
        if (span_y > 0.0) scale = std::min(scale, height / span_y);
        tf.scale = scale;
        tf.dx = (width - scale * span_x) / 2.0 - scale * min_x;
        tf.dy = (height - scale * span_y) / 2.0 - scale * min_y;
    }

    FieldFit fit;
    fit.transform = tf;
    fit.points.reserve(proj.size());
    for (const auto& q : proj) {
        fit.points.push_back(tf.apply(q));
    }
    return fit;
}

} // namespace fmm::geo
