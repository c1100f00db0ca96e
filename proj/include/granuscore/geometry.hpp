#pragma once

#include <string>
#include <vector>

namespace granuscore {

enum class SpaceKind { hyperbolic_ball, flat };

struct SpaceDescriptor {
    SpaceKind kind = SpaceKind::hyperbolic_ball;
    double curvature = 1.0; // c > 0, hyperbolic only
    size_t dimension = 0;

    bool operator==(const SpaceDescriptor& o) const {
        if (kind != o.kind || dimension != o.dimension) return false;
        return kind == SpaceKind::flat || curvature == o.curvature;
    }
    bool operator!=(const SpaceDescriptor& o) const { return !(*this == o); }
};

// Throws ConfigError if the descriptor violates its invariants.
void validate_space(const SpaceDescriptor& space);

std::string space_kind_name(SpaceKind kind);
SpaceKind space_kind_from_name(const std::string& name);

struct EmbeddingVector {
    std::vector<double> components;
    SpaceDescriptor space;
    std::string model_id;
};

double l2_norm(const std::vector<double>& v);
double dot(const std::vector<double>& u, const std::vector<double>& v);

// Throws GeometryError if v is not strictly inside the ball (hyperbolic only).
void validate_in_space(const EmbeddingVector& v, const std::string& context = "");

// Radial depth. Hyperbolic: (2/sqrt(c)) * artanh(sqrt(c) * ||v||).
// Flat: ||v||. Strictly increasing in ||v||.
double dist0(const EmbeddingVector& v);

// Symmetric, scale-invariant; throws GeometryError on a zero vector.
double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

// Mobius addition u (+)_c v on the ball of curvature c.
std::vector<double> mobius_add(const std::vector<double>& u, const std::vector<double>& v,
                               double curvature);

// Poincare distance from the Gram values uu=<u,u>, vv=<v,v>, uv=<u,v>.
// Expands ||(-u) (+)_c v|| algebraically, so bulk feature extraction and
// hyperbolic_distance share one code path.
double poincare_distance_gram(double uu, double vv, double uv, double curvature);

// Poincare distance d_c(u,v) = (2/sqrt(c)) * artanh(sqrt(c) * ||(-u) (+)_c v||).
// Flat spaces use the Euclidean distance. Throws SpaceMismatchError when the
// operands disagree on space.
double hyperbolic_distance(const EmbeddingVector& u, const EmbeddingVector& v);

// Metric distance in whichever space the operands live in.
double space_distance(const EmbeddingVector& u, const EmbeddingVector& v);

} // namespace granuscore
