#include "granuscore/geometry.hpp"

#include "granuscore/errors.hpp"

#include <cmath>
#include <sstream>

namespace granuscore {

void validate_space(const SpaceDescriptor& space) {
    if (space.dimension < 1) {
        throw ConfigError("space dimension must be >= 1");
    }
    if (space.kind == SpaceKind::hyperbolic_ball && !(space.curvature > 0.0)) {
        throw ConfigError("hyperbolic ball requires curvature > 0");
    }
}

std::string space_kind_name(SpaceKind kind) {
    return kind == SpaceKind::hyperbolic_ball ? "hyperbolic_ball" : "flat";
}

SpaceKind space_kind_from_name(const std::string& name) {
    if (name == "hyperbolic_ball") return SpaceKind::hyperbolic_ball;
    if (name == "flat") return SpaceKind::flat;
    throw ConfigError("unknown space kind: " + name);
}

double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dot(const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

void validate_in_space(const EmbeddingVector& v, const std::string& context) {
    if (v.components.size() != v.space.dimension) {
        std::ostringstream os;
        os << "vector length " << v.components.size() << " does not match space dimension "
           << v.space.dimension;
        if (!context.empty()) os << " (" << context << ")";
        throw GeometryError(os.str());
    }
    for (double x : v.components) {
        if (!std::isfinite(x)) {
            throw GeometryError("non-finite component" + (context.empty() ? "" : " (" + context + ")"));
        }
    }
    if (v.space.kind == SpaceKind::hyperbolic_ball) {
        double r = std::sqrt(v.space.curvature) * l2_norm(v.components);
        if (r >= 1.0) {
            std::ostringstream os;
            os << "point on/outside the Poincare ball: sqrt(c)*||v|| = " << r;
            if (!context.empty()) os << " (" << context << ")";
            throw GeometryError(os.str());
        }
    }
}

double dist0(const EmbeddingVector& v) {
    double norm = l2_norm(v.components);
    if (v.space.kind == SpaceKind::flat) return norm;
    double sc = std::sqrt(v.space.curvature);
    double r = sc * norm;
    if (r >= 1.0) {
        std::ostringstream os;
        os << "dist0 undefined: sqrt(c)*||v|| = " << r << " >= 1";
        throw GeometryError(os.str());
    }
    return 2.0 / sc * std::atanh(r);
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.components.size() != v.components.size()) {
        throw SpaceMismatchError("cosine similarity on vectors of different dimension");
    }
    double nu = l2_norm(u.components);
    double nv = l2_norm(v.components);
    if (nu == 0.0 || nv == 0.0) {
        throw GeometryError("cosine similarity undefined for a zero vector");
    }
    double c = dot(u.components, v.components) / (nu * nv);
    // guard rounding drift out of [-1, 1]
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    return c;
}

std::vector<double> mobius_add(const std::vector<double>& u, const std::vector<double>& v,
                               double curvature) {
    double c = curvature;
    double uu = dot(u, u);
    double vv = dot(v, v);
    double uv = dot(u, v);
    double denom = 1.0 + 2.0 * c * uv + c * c * uu * vv;
    double cu = (1.0 + 2.0 * c * uv + c * vv) / denom;
    double cv = (1.0 - c * uu) / denom;
    std::vector<double> out(u.size());
    for (size_t i = 0; i < u.size(); ++i) out[i] = cu * u[i] + cv * v[i];
    return out;
}

double poincare_distance_gram(double uu, double vv, double uv, double c) {
    // (-u) (+)_c v = (A*(-u) + B*v)/denom with A = 1 - 2c<u,v> + c<v,v>,
    // B = 1 - c<u,u>; squared norm expands to the quadratic form below.
    double a = 1.0 - 2.0 * c * uv + c * vv;
    double b = 1.0 - c * uu;
    double denom = 1.0 - 2.0 * c * uv + c * c * uu * vv;
    double m2 = (a * a * uu - 2.0 * a * b * uv + b * b * vv) / (denom * denom);
    if (m2 < 0.0) m2 = 0.0;
    double sc = std::sqrt(c);
    double r = sc * std::sqrt(m2);
    if (r >= 1.0) r = std::nextafter(1.0, 0.0); // rounding at the boundary
    return 2.0 / sc * std::atanh(r);
}

double hyperbolic_distance(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.space != v.space) {
        throw SpaceMismatchError("distance between vectors from different spaces (" +
                                 space_kind_name(u.space.kind) + " dim " +
                                 std::to_string(u.space.dimension) + " vs " +
                                 space_kind_name(v.space.kind) + " dim " +
                                 std::to_string(v.space.dimension) + ")");
    }
    if (u.space.kind == SpaceKind::flat) {
        double s = 0.0;
        for (size_t i = 0; i < u.components.size(); ++i) {
            double d = u.components[i] - v.components[i];
            s += d * d;
        }
        return std::sqrt(s);
    }
    validate_in_space(u);
    validate_in_space(v);
    return poincare_distance_gram(dot(u.components, u.components), dot(v.components, v.components),
                                  dot(u.components, v.components), u.space.curvature);
}

double space_distance(const EmbeddingVector& u, const EmbeddingVector& v) {
    return hyperbolic_distance(u, v);
}

} // namespace granuscore
