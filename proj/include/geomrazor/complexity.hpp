#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "geomrazor/network.hpp"

namespace geomrazor {

struct Example {
    Vector x;
    Vector y;
};

struct Dataset {
    std::vector<Example> points;
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;
};

/// Validates shape consistency and fills the dims.
Dataset make_dataset(std::vector<Example> points);

// ---- feature polytopes -------------------------------------------------------

struct Interval {
    double lo;
    double hi;
};

struct Box {
    Vector lo;
    Vector hi;
};

struct HullFacet {
    Vector normal;  // unit outward normal
    double offset;  // inside iff normal·x ≤ offset (+ tol)
};

/// Convex hull with half-space representation, dim ≤ 3.
struct Hull {
    std::size_t dim = 0;
    std::vector<Vector> vertices;
    std::vector<HullFacet> facets;
    double volume = 0.0;
    Box bounding_box;
};

using FeaturePolytope = std::variant<Interval, Box, Hull>;

std::size_t polytope_dim(const FeaturePolytope& p);
double polytope_volume(const FeaturePolytope& p);
bool polytope_contains(const FeaturePolytope& p, const Vector& x, double tol = 1e-12);

class DegeneratePolytopeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class PolytopeMode { Auto, Interval, Box, Hull };

/// Tight polytope around the dataset's feature points.  Auto picks Interval
/// for d = 1, Hull for d ≤ 3 and Box otherwise.  Throws
/// DegeneratePolytopeError when the points span zero volume.
FeaturePolytope polytope_from_data(const Dataset& data, PolytopeMode mode = PolytopeMode::Auto);

// ---- quadrature ---------------------------------------------------------------

struct Grid1D {
    std::size_t n_segments;  // composite trapezoid rule, ≥ 2
};

struct MonteCarlo {
    std::size_t n_samples;
    std::uint64_t seed = 0;
};

using QuadratureSpec = std::variant<Grid1D, MonteCarlo>;

struct QuadratureEstimate {
    double value = 0.0;
    double std_error = 0.0;  // 0 for deterministic rules
    std::size_t n_nodes = 0;
};

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Nodes and weights for the given polytope/rule.  Weights sum to the
/// polytope volume.  Monte Carlo over a Hull rejection-samples from the
/// bounding box; efficiency below 1e−3 raises QuadratureError advising a Box
/// fallback.
struct QuadratureNodes {
    std::vector<Vector> points;
    std::vector<double> weights;
};
QuadratureNodes quadrature_nodes(const FeaturePolytope& p, const QuadratureSpec& quad);

// ---- complexity measures -------------------------------------------------------

struct ComplexityReport {
    double discrete_de = 0.0;
    std::optional<double> continuous_de;
    std::optional<double> graph_volume;
    std::optional<double> polytope_volume;
    std::optional<double> taylor_residual;
    std::optional<double> arc_length;
};

/// (1/(2|D|)) Σ ‖∇_x f(x)‖²_F over the data points.
double discrete_dirichlet_energy(const Mlp& mlp, const Dataset& data);

/// ½ ∫ ‖∇_x f‖²_F dx over the polytope, by the given rule.
double continuous_dirichlet_energy(const Mlp& mlp, const FeaturePolytope& p,
                                   const QuadratureSpec& quad);
QuadratureEstimate continuous_dirichlet_energy_estimate(const Mlp& mlp, const FeaturePolytope& p,
                                                        const QuadratureSpec& quad);

/// ∫ sqrt(1 + ‖∇_x f‖²_F) dx over the polytope.
double graph_volume(const Mlp& mlp, const FeaturePolytope& p, const QuadratureSpec& quad);
QuadratureEstimate graph_volume_estimate(const Mlp& mlp, const FeaturePolytope& p,
                                         const QuadratureSpec& quad);

/// First-order decomposition on shared nodes: graph_volume, polytope_volume,
/// continuous_de and their residual graph − vol − de (≤ 0).  discrete_de is
/// left at 0 for callers that have no dataset at hand.
ComplexityReport taylor_decomposition(const Mlp& mlp, const FeaturePolytope& p,
                                      const QuadratureSpec& quad);

/// (1/8) ∫ ‖∇_x f‖⁴ dx on the same nodes as taylor_decomposition; bounds the
/// magnitude of its residual.
double taylor_remainder_bound(const Mlp& mlp, const FeaturePolytope& p,
                              const QuadratureSpec& quad);

/// Polyline length of {(x, f(x))} at n_segments+1 uniform nodes; needs a
/// 1 → 1 network.
double arc_length_1d(const Mlp& mlp, const Interval& interval, std::size_t n_segments);

/// Length of the piecewise-linear path through the 1-D data points sorted by
/// x.  Duplicate x values with different y raise an error.
double chord_path_length(const Dataset& data);

/// Full measurement for reporting: discrete energy plus, when the polytope
/// is non-degenerate, the quadrature measures (and arc length for 1 → 1
/// networks).
ComplexityReport measure_complexity(const Mlp& mlp, const Dataset& data,
                                    PolytopeMode mode, const QuadratureSpec& quad,
                                    std::size_t arc_segments = 4096);

}  // namespace geomrazor
