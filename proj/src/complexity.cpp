#include "geomrazor/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <utility>

#include "geomrazor/rng.hpp"

namespace geomrazor {

Dataset make_dataset(std::vector<Example> points) {
    if (points.empty()) throw std::invalid_argument("make_dataset: dataset must be nonempty");
    Dataset d;
    d.input_dim = points.front().x.dim();
    d.output_dim = points.front().y.dim();
    if (d.input_dim == 0) throw std::invalid_argument("make_dataset: zero input dimension");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].x.dim() != d.input_dim || points[i].y.dim() != d.output_dim)
            throw std::invalid_argument("make_dataset: point " + std::to_string(i) +
                                        " has inconsistent dimensions");
    }
    d.points = std::move(points);
    return d;
}

// ---- polytopes -----------------------------------------------------------------

std::size_t polytope_dim(const FeaturePolytope& p) {
    if (std::holds_alternative<Interval>(p)) return 1;
    if (const auto* b = std::get_if<Box>(&p)) return b->lo.dim();
    return std::get<Hull>(p).dim;
}

double polytope_volume(const FeaturePolytope& p) {
    if (const auto* iv = std::get_if<Interval>(&p)) return iv->hi - iv->lo;
    if (const auto* b = std::get_if<Box>(&p)) {
        double v = 1.0;
        for (std::size_t i = 0; i < b->lo.dim(); ++i) v *= b->hi[i] - b->lo[i];
        return v;
    }
    return std::get<Hull>(p).volume;
}

bool polytope_contains(const FeaturePolytope& p, const Vector& x, double tol) {
    if (const auto* iv = std::get_if<Interval>(&p)) {
        return x.dim() == 1 && x[0] >= iv->lo - tol && x[0] <= iv->hi + tol;
    }
    if (const auto* b = std::get_if<Box>(&p)) {
        if (x.dim() != b->lo.dim()) return false;
        for (std::size_t i = 0; i < x.dim(); ++i)
            if (x[i] < b->lo[i] - tol || x[i] > b->hi[i] + tol) return false;
        return true;
    }
    const Hull& h = std::get<Hull>(p);
    if (x.dim() != h.dim) return false;
    for (const HullFacet& f : h.facets)
        if (dot(f.normal, x) > f.offset + tol) return false;
    return true;
}

namespace {

Box tight_box(const Dataset& data) {
    Box b;
    b.lo = data.points.front().x;
    b.hi = data.points.front().x;
    for (const Example& e : data.points) {
        for (std::size_t i = 0; i < e.x.dim(); ++i) {
            b.lo[i] = std::min(b.lo[i], e.x[i]);
            b.hi[i] = std::max(b.hi[i], e.x[i]);
        }
    }
    return b;
}

double box_extent(const Box& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < b.lo.dim(); ++i) m = std::max(m, b.hi[i] - b.lo[i]);
    return m;
}

Hull hull_1d(double lo, double hi) {
    Hull h;
    h.dim = 1;
    h.vertices = {Vector{lo}, Vector{hi}};
    h.facets = {{Vector{1.0}, hi}, {Vector{-1.0}, -lo}};
    h.volume = hi - lo;
    h.bounding_box = Box{Vector{lo}, Vector{hi}};
    return h;
}

double cross2(const Vector& o, const Vector& a, const Vector& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew monotone chain; returns the hull in counter-clockwise order.
std::vector<Vector> convex_hull_2d(std::vector<Vector> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vector& a, const Vector& b) {
        return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n < 3) return pts;

    std::vector<Vector> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {  // lower
        while (k >= 2 && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {  // upper
        while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

Hull make_hull_2d(const Dataset& data) {
    std::vector<Vector> pts;
    pts.reserve(data.points.size());
    for (const Example& e : data.points) pts.push_back(e.x);
    std::vector<Vector> verts = convex_hull_2d(std::move(pts));
    if (verts.size() < 3)
        throw DegeneratePolytopeError(
            "polytope_from_data: 2-D feature points are collinear; use discrete measures only");

    double area2 = 0.0;  // shoelace, doubled
    for (std::size_t i = 0; i < verts.size(); ++i) {
        const Vector& a = verts[i];
        const Vector& b = verts[(i + 1) % verts.size()];
        area2 += a[0] * b[1] - b[0] * a[1];
    }
    const double area = 0.5 * area2;
    if (!(area > 0.0))
        throw DegeneratePolytopeError(
            "polytope_from_data: 2-D hull has zero area; use discrete measures only");

    Hull h;
    h.dim = 2;
    h.vertices = verts;
    for (std::size_t i = 0; i < verts.size(); ++i) {
        const Vector& a = verts[i];
        const Vector& b = verts[(i + 1) % verts.size()];
        Vector n{b[1] - a[1], -(b[0] - a[0])};  // outward for a CCW polygon
        const double len = norm(n);
        n = scale(n, 1.0 / len);
        h.facets.push_back({n, dot(n, a)});
    }
    h.volume = area;

    Box bb;
    bb.lo = verts.front();
    bb.hi = verts.front();
    for (const Vector& v : verts)
        for (std::size_t i = 0; i < 2; ++i) {
            bb.lo[i] = std::min(bb.lo[i], v[i]);
            bb.hi[i] = std::max(bb.hi[i], v[i]);
        }
    h.bounding_box = bb;
    return h;
}

Vector cross3(const Vector& a, const Vector& b) {
    return Vector{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                  a[0] * b[1] - a[1] * b[0]};
}

struct Tri {
    std::size_t a, b, c;
    Vector normal;   // unit, outward
    double offset;   // plane: normal·x = offset
};

Tri make_tri(const std::vector<Vector>& pts, std::size_t a, std::size_t b, std::size_t c,
             const Vector& interior) {
    Vector n = cross3(sub(pts[b], pts[a]), sub(pts[c], pts[a]));
    const double len = norm(n);
    n = scale(n, 1.0 / len);
    if (dot(n, sub(interior, pts[a])) > 0.0) {
        std::swap(b, c);
        n = scale(n, -1.0);
    }
    return Tri{a, b, c, n, dot(n, pts[a])};
}

// Incremental convex hull over the point set, deterministic in index order.
Hull make_hull_3d(const Dataset& data) {
    std::vector<Vector> pts;
    pts.reserve(data.points.size());
    for (const Example& e : data.points) pts.push_back(e.x);

    const Box bb0 = tight_box(data);
    const double scale3 = std::max(box_extent(bb0), 1e-30);
    const double eps = 1e-10 * scale3;

    // Initial tetrahedron: spread out along successive dimensions.
    const std::size_t n = pts.size();
    std::size_t i0 = 0, i1 = 0;
    double best = -1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double d = norm_sq(sub(pts[i], pts[i0]));
        if (d > best) {
            best = d;
            i1 = i;
        }
    }
    if (!(best > eps * eps))
        throw DegeneratePolytopeError("polytope_from_data: 3-D points coincide; use discrete measures only");

    std::size_t i2 = 0;
    best = -1.0;
    const Vector dir = sub(pts[i1], pts[i0]);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = norm_sq(cross3(dir, sub(pts[i], pts[i0])));
        if (d > best) {
            best = d;
            i2 = i;
        }
    }
    if (!(std::sqrt(best) > eps * norm(dir)))
        throw DegeneratePolytopeError(
            "polytope_from_data: 3-D points are collinear; use discrete measures only");

    std::size_t i3 = 0;
    best = -1.0;
    const Vector base_n = cross3(dir, sub(pts[i2], pts[i0]));
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::abs(dot(base_n, sub(pts[i], pts[i0])));
        if (d > best) {
            best = d;
            i3 = i;
        }
    }
    if (!(best > eps * norm(base_n)))
        throw DegeneratePolytopeError(
            "polytope_from_data: 3-D points are coplanar; use discrete measures only");

    Vector interior(3, 0.0);
    for (std::size_t i : {i0, i1, i2, i3}) interior = add(interior, scale(pts[i], 0.25));

    std::vector<Tri> faces = {
        make_tri(pts, i0, i1, i2, interior), make_tri(pts, i0, i1, i3, interior),
        make_tri(pts, i0, i2, i3, interior), make_tri(pts, i1, i2, i3, interior)};

    for (std::size_t p = 0; p < n; ++p) {
        if (p == i0 || p == i1 || p == i2 || p == i3) continue;
        std::vector<std::size_t> visible;
        for (std::size_t f = 0; f < faces.size(); ++f)
            if (dot(faces[f].normal, pts[p]) > faces[f].offset + eps) visible.push_back(f);
        if (visible.empty()) continue;

        // Horizon: directed edges of visible faces whose reverse is not visible.
        std::map<std::pair<std::size_t, std::size_t>, int> edge_count;
        for (std::size_t f : visible) {
            const Tri& t = faces[f];
            for (auto [u, v] : {std::pair{t.a, t.b}, std::pair{t.b, t.c}, std::pair{t.c, t.a}}) {
                ++edge_count[{u, v}];
            }
        }
        std::vector<std::pair<std::size_t, std::size_t>> horizon;
        for (const auto& [edge, count] : edge_count) {
            (void)count;
            if (edge_count.find({edge.second, edge.first}) == edge_count.end())
                horizon.push_back(edge);
        }

        std::vector<Tri> kept;
        kept.reserve(faces.size());
        for (std::size_t f = 0; f < faces.size(); ++f)
            if (std::find(visible.begin(), visible.end(), f) == visible.end())
                kept.push_back(faces[f]);
        for (const auto& [u, v] : horizon) kept.push_back(make_tri(pts, u, v, p, interior));
        faces = std::move(kept);
    }

    Hull h;
    h.dim = 3;
    std::vector<std::size_t> used;
    for (const Tri& t : faces) {
        used.push_back(t.a);
        used.push_back(t.b);
        used.push_back(t.c);
    }
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    for (std::size_t i : used) h.vertices.push_back(pts[i]);

    double vol = 0.0;
    for (const Tri& t : faces) {
        h.facets.push_back({t.normal, t.offset});
        const Vector a = sub(pts[t.a], interior);
        const Vector b = sub(pts[t.b], interior);
        const Vector c = sub(pts[t.c], interior);
        vol += dot(a, cross3(b, c)) / 6.0;
    }
    h.volume = std::abs(vol);
    if (!(h.volume > 0.0))
        throw DegeneratePolytopeError(
            "polytope_from_data: 3-D hull has zero volume; use discrete measures only");

    Box bb;
    bb.lo = h.vertices.front();
    bb.hi = h.vertices.front();
    for (const Vector& v : h.vertices)
        for (std::size_t i = 0; i < 3; ++i) {
            bb.lo[i] = std::min(bb.lo[i], v[i]);
            bb.hi[i] = std::max(bb.hi[i], v[i]);
        }
    h.bounding_box = bb;
    return h;
}

}  // namespace

FeaturePolytope polytope_from_data(const Dataset& data, PolytopeMode mode) {
    const std::size_t d = data.input_dim;
    if (mode == PolytopeMode::Auto) {
        mode = (d == 1) ? PolytopeMode::Interval : (d <= 3 ? PolytopeMode::Hull : PolytopeMode::Box);
    }

    switch (mode) {
        case PolytopeMode::Interval: {
            if (d != 1) throw std::invalid_argument("polytope_from_data: Interval requires 1-D features");
            const Box b = tight_box(data);
            if (!(b.lo[0] < b.hi[0]))
                throw DegeneratePolytopeError(
                    "polytope_from_data: all feature values equal; use discrete measures only");
            return Interval{b.lo[0], b.hi[0]};
        }
        case PolytopeMode::Box: {
            const Box b = tight_box(data);
            for (std::size_t i = 0; i < d; ++i) {
                if (!(b.lo[i] < b.hi[i]))
                    throw DegeneratePolytopeError(
                        "polytope_from_data: coordinate " + std::to_string(i) +
                        " is constant across the dataset; use discrete measures only");
            }
            return b;
        }
        case PolytopeMode::Hull: {
            if (d > 3) throw std::invalid_argument("polytope_from_data: Hull requires dim <= 3");
            if (d == 1) {
                const Box b = tight_box(data);
                if (!(b.lo[0] < b.hi[0]))
                    throw DegeneratePolytopeError(
                        "polytope_from_data: all feature values equal; use discrete measures only");
                return hull_1d(b.lo[0], b.hi[0]);
            }
            return d == 2 ? FeaturePolytope(make_hull_2d(data)) : FeaturePolytope(make_hull_3d(data));
        }
        case PolytopeMode::Auto: break;
    }
    throw std::logic_error("polytope_from_data: unreachable");
}

// ---- quadrature -------------------------------------------------------------------

QuadratureNodes quadrature_nodes(const FeaturePolytope& p, const QuadratureSpec& quad) {
    QuadratureNodes out;
    if (const auto* grid = std::get_if<Grid1D>(&quad)) {
        const auto* iv = std::get_if<Interval>(&p);
        if (!iv) throw std::invalid_argument("quadrature_nodes: Grid1D requires an Interval polytope");
        if (grid->n_segments < 2)
            throw std::invalid_argument("quadrature_nodes: Grid1D needs n_segments >= 2");
        const std::size_t n = grid->n_segments;
        const double h = (iv->hi - iv->lo) / static_cast<double>(n);
        out.points.reserve(n + 1);
        out.weights.reserve(n + 1);
        for (std::size_t j = 0; j <= n; ++j) {
            out.points.push_back(Vector{iv->lo + static_cast<double>(j) * h});
            out.weights.push_back((j == 0 || j == n) ? 0.5 * h : h);
        }
        return out;
    }

    const auto& mc = std::get<MonteCarlo>(quad);
    if (mc.n_samples < 1) throw std::invalid_argument("quadrature_nodes: n_samples >= 1 required");
    Rng rng(mc.seed);

    if (const auto* iv = std::get_if<Interval>(&p)) {
        const double w = (iv->hi - iv->lo) / static_cast<double>(mc.n_samples);
        for (std::size_t j = 0; j < mc.n_samples; ++j) {
            out.points.push_back(Vector{rng.uniform(iv->lo, iv->hi)});
            out.weights.push_back(w);
        }
        return out;
    }
    if (const auto* b = std::get_if<Box>(&p)) {
        double vol = 1.0;
        for (std::size_t i = 0; i < b->lo.dim(); ++i) vol *= b->hi[i] - b->lo[i];
        const double w = vol / static_cast<double>(mc.n_samples);
        for (std::size_t j = 0; j < mc.n_samples; ++j) {
            Vector x(b->lo.dim());
            for (std::size_t i = 0; i < x.dim(); ++i) x[i] = rng.uniform(b->lo[i], b->hi[i]);
            out.points.push_back(std::move(x));
            out.weights.push_back(w);
        }
        return out;
    }

    const Hull& h = std::get<Hull>(p);
    const Box& bb = h.bounding_box;
    std::vector<Vector> accepted;
    for (std::size_t j = 0; j < mc.n_samples; ++j) {
        Vector x(h.dim);
        for (std::size_t i = 0; i < h.dim; ++i) x[i] = rng.uniform(bb.lo[i], bb.hi[i]);
        if (polytope_contains(FeaturePolytope(h), x)) accepted.push_back(std::move(x));
    }
    const double efficiency =
        static_cast<double>(accepted.size()) / static_cast<double>(mc.n_samples);
    if (efficiency < 1e-3) {
        throw QuadratureError(
            "quadrature_nodes: hull rejection efficiency " + std::to_string(efficiency) +
            " is below 1e-3; fall back to a Box polytope");
    }
    const double w = h.volume / static_cast<double>(accepted.size());
    out.points = std::move(accepted);
    out.weights.assign(out.points.size(), w);
    return out;
}

// ---- measures ------------------------------------------------------------------------

namespace {

double gradient_norm_sq_at(const Mlp& mlp, const Vector& x) {
    const ForwardTrace trace = forward(mlp, x);
    return frobenius_norm_sq(input_jacobian(mlp, trace));
}

QuadratureEstimate integrate(const Mlp& mlp, const FeaturePolytope& p, const QuadratureSpec& quad,
                             double (*transform)(double)) {
    const QuadratureNodes nodes = quadrature_nodes(p, quad);
    double acc = 0.0;
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t j = 0; j < nodes.points.size(); ++j) {
        const double g = transform(gradient_norm_sq_at(mlp, nodes.points[j]));
        acc += nodes.weights[j] * g;
        sum += g;
        sum_sq += g * g;
    }
    QuadratureEstimate est;
    est.value = acc;
    est.n_nodes = nodes.points.size();
    if (std::holds_alternative<MonteCarlo>(quad) && est.n_nodes > 1) {
        const double n = static_cast<double>(est.n_nodes);
        const double mean = sum / n;
        const double var = std::max(0.0, sum_sq / n - mean * mean) * n / (n - 1.0);
        double vol = 0.0;
        for (double w : nodes.weights) vol += w;
        est.std_error = vol * std::sqrt(var / n);
    }
    return est;
}

}  // namespace

double discrete_dirichlet_energy(const Mlp& mlp, const Dataset& data) {
    if (data.input_dim != mlp.input_dim())
        throw std::invalid_argument("discrete_dirichlet_energy: dataset input dim mismatch");
    double acc = 0.0;
    for (const Example& e : data.points) acc += gradient_norm_sq_at(mlp, e.x);
    return acc / (2.0 * static_cast<double>(data.points.size()));
}

QuadratureEstimate continuous_dirichlet_energy_estimate(const Mlp& mlp, const FeaturePolytope& p,
                                                        const QuadratureSpec& quad) {
    if (polytope_dim(p) != mlp.input_dim())
        throw std::invalid_argument("continuous_dirichlet_energy: polytope dim mismatch");
    return integrate(mlp, p, quad, [](double z) { return 0.5 * z; });
}

double continuous_dirichlet_energy(const Mlp& mlp, const FeaturePolytope& p,
                                   const QuadratureSpec& quad) {
    return continuous_dirichlet_energy_estimate(mlp, p, quad).value;
}

QuadratureEstimate graph_volume_estimate(const Mlp& mlp, const FeaturePolytope& p,
                                         const QuadratureSpec& quad) {
    if (polytope_dim(p) != mlp.input_dim())
        throw std::invalid_argument("graph_volume: polytope dim mismatch");
    return integrate(mlp, p, quad, [](double z) { return std::sqrt(1.0 + z); });
}

double graph_volume(const Mlp& mlp, const FeaturePolytope& p, const QuadratureSpec& quad) {
    return graph_volume_estimate(mlp, p, quad).value;
}

ComplexityReport taylor_decomposition(const Mlp& mlp, const FeaturePolytope& p,
                                      const QuadratureSpec& quad) {
    if (polytope_dim(p) != mlp.input_dim())
        throw std::invalid_argument("taylor_decomposition: polytope dim mismatch");
    const QuadratureNodes nodes = quadrature_nodes(p, quad);

    double graph = 0.0, vol = 0.0, de = 0.0;
    for (std::size_t j = 0; j < nodes.points.size(); ++j) {
        const double w = nodes.weights[j];
        const double z = gradient_norm_sq_at(mlp, nodes.points[j]);
        graph += w * std::sqrt(1.0 + z);
        vol += w;
        de += w * (0.5 * z);
    }

    ComplexityReport report;
    report.graph_volume = graph;
    report.polytope_volume = vol;
    report.continuous_de = de;
    report.taylor_residual = graph - vol - de;
    return report;
}

double taylor_remainder_bound(const Mlp& mlp, const FeaturePolytope& p,
                              const QuadratureSpec& quad) {
    const QuadratureNodes nodes = quadrature_nodes(p, quad);
    double acc = 0.0;
    for (std::size_t j = 0; j < nodes.points.size(); ++j) {
        const double z = gradient_norm_sq_at(mlp, nodes.points[j]);
        acc += nodes.weights[j] * z * z;
    }
    return acc / 8.0;
}

double arc_length_1d(const Mlp& mlp, const Interval& interval, std::size_t n_segments) {
    if (mlp.input_dim() != 1 || mlp.output_dim() != 1)
        throw std::invalid_argument("arc_length_1d: requires a 1 -> 1 network");
    if (n_segments < 1) throw std::invalid_argument("arc_length_1d: n_segments >= 1 required");
    if (!(interval.lo < interval.hi))
        throw std::invalid_argument("arc_length_1d: empty interval");

    const double h = (interval.hi - interval.lo) / static_cast<double>(n_segments);
    double length = 0.0;
    double x_prev = interval.lo;
    double y_prev = forward(mlp, Vector{x_prev}).output[0];
    for (std::size_t j = 1; j <= n_segments; ++j) {
        const double x = interval.lo + static_cast<double>(j) * h;
        const double y = forward(mlp, Vector{x}).output[0];
        length += std::hypot(x - x_prev, y - y_prev);
        x_prev = x;
        y_prev = y;
    }
    return length;
}

double chord_path_length(const Dataset& data) {
    if (data.input_dim != 1 || data.output_dim != 1)
        throw std::invalid_argument("chord_path_length: requires a 1-D dataset with scalar targets");
    if (data.points.size() < 2)
        throw std::invalid_argument("chord_path_length: need at least two points");

    std::vector<std::size_t> order(data.points.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return data.points[a].x[0] < data.points[b].x[0];
    });

    double length = 0.0;
    for (std::size_t i = 1; i < order.size(); ++i) {
        const Example& a = data.points[order[i - 1]];
        const Example& b = data.points[order[i]];
        if (a.x[0] == b.x[0] && a.y[0] != b.y[0])
            throw std::invalid_argument(
                "chord_path_length: duplicate x with different y, no interpolating function exists");
        length += std::hypot(b.x[0] - a.x[0], b.y[0] - a.y[0]);
    }
    return length;
}

ComplexityReport measure_complexity(const Mlp& mlp, const Dataset& data, PolytopeMode mode,
                                    const QuadratureSpec& quad, std::size_t arc_segments) {
    ComplexityReport report;
    report.discrete_de = discrete_dirichlet_energy(mlp, data);
    try {
        const FeaturePolytope p = polytope_from_data(data, mode);
        ComplexityReport taylor = taylor_decomposition(mlp, p, quad);
        report.continuous_de = taylor.continuous_de;
        report.graph_volume = taylor.graph_volume;
        report.polytope_volume = taylor.polytope_volume;
        report.taylor_residual = taylor.taylor_residual;
        if (mlp.input_dim() == 1 && mlp.output_dim() == 1) {
            if (const auto* iv = std::get_if<Interval>(&p)) {
                report.arc_length = arc_length_1d(mlp, *iv, arc_segments);
            } else if (const auto* hull = std::get_if<Hull>(&p); hull && hull->dim == 1) {
                report.arc_length =
                    arc_length_1d(mlp, Interval{hull->bounding_box.lo[0], hull->bounding_box.hi[0]},
                                  arc_segments);
            }
        }
    } catch (const DegeneratePolytopeError&) {
        // Discrete measures only; the continuous fields stay empty.
    }
    return report;
}

}  // namespace geomrazor
