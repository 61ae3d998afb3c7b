#include "pxk/mesh.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "pxk/exponents.hpp"
#include "pxk/format.hpp"
#include "pxk/spaces.hpp"

namespace pxk {

namespace {

using Triplet = Eigen::Triplet<double>;

// Axis-coordinate decomposition of a node index (row-major, x fastest).
inline Eigen::Index axis_index(Eigen::Index node, int axis, int n, int dim) {
    if (dim == 1) return node;
    return axis == 0 ? node % n : node / n;
}

} // namespace

std::shared_ptr<const Grid> Grid::create(int dim, const std::vector<double>& extents,
                                         int nodes_per_axis) {
    if (dim != 1 && dim != 2)
        throw BadGridSpec("grid dimension must be 1 or 2, got " + std::to_string(dim));
    // Three nested Laplacian-type stencils need interior depth 3.
    if (nodes_per_axis < 9)
        throw BadGridSpec("nodes_per_axis must be >= 9, got " + std::to_string(nodes_per_axis));
    if (static_cast<int>(extents.size()) != dim)
        throw BadGridSpec("extents list must have one entry per axis");
    for (double e : extents)
        if (!(e > 0.0)) throw BadGridSpec("extents must be positive");

    auto g = std::shared_ptr<Grid>(new Grid());
    g->dim_ = dim;
    g->n_ = nodes_per_axis;
    g->num_nodes_ = dim == 1 ? nodes_per_axis
                             : static_cast<Eigen::Index>(nodes_per_axis) * nodes_per_axis;
    for (int a = 0; a < dim; ++a) {
        g->extents_[static_cast<std::size_t>(a)] = extents[static_cast<std::size_t>(a)];
        g->h_[static_cast<std::size_t>(a)] =
            extents[static_cast<std::size_t>(a)] / static_cast<double>(nodes_per_axis - 1);
    }
    g->build_operators();
    return g;
}

void Grid::build_operators() {
    const int n = n_;
    const Eigen::Index N = num_nodes_;

    boundary_mask_.assign(static_cast<std::size_t>(N), false);
    node_w_.resize(N);
    for (Eigen::Index node = 0; node < N; ++node) {
        double w = 1.0;
        bool bnd = false;
        for (int a = 0; a < dim_; ++a) {
            const Eigen::Index i = axis_index(node, a, n, dim_);
            const double h = h_[static_cast<std::size_t>(a)];
            w *= (i == 0 || i == n - 1) ? h / 2.0 : h;
            bnd = bnd || i == 0 || i == n - 1;
        }
        node_w_[node] = w;
        boundary_mask_[static_cast<std::size_t>(node)] = bnd;
        if (!bnd) interior_.push_back(node);
    }

    // The Laplacian rows on the boundary ring are identically zero: that is
    // the trace lap u = 0, and it agrees with the odd-reflection ghost value
    // for every boundary-compliant field.  The first difference keeps its
    // ghost form at the walls (second-order for odd-extended fields).
    std::vector<Triplet> lap_t, diff_t[2];
    for (Eigen::Index node = 0; node < N; ++node) {
        const bool bnd = boundary_mask_[static_cast<std::size_t>(node)];
        for (int a = 0; a < dim_; ++a) {
            const double h = h_[static_cast<std::size_t>(a)];
            const double inv2 = 1.0 / (h * h);
            const double inv1 = 1.0 / (2.0 * h);
            const Eigen::Index i = axis_index(node, a, n, dim_);
            const Eigen::Index stride = (dim_ == 1 || a == 0) ? 1 : n;

            if (!bnd) {
                lap_t.emplace_back(node, node, -2.0 * inv2);
                lap_t.emplace_back(node, node - stride, inv2);
                lap_t.emplace_back(node, node + stride, inv2);
            }
            if (i > 0)
                diff_t[a].emplace_back(node, node - stride, -inv1);
            else
                diff_t[a].emplace_back(node, node + stride, inv1);
            if (i < n - 1)
                diff_t[a].emplace_back(node, node + stride, inv1);
            else
                diff_t[a].emplace_back(node, node - stride, -inv1);
        }
    }
    lap_.resize(N, N);
    lap_.setFromTriplets(lap_t.begin(), lap_t.end());
    for (int a = 0; a < dim_; ++a) {
        diff_[static_cast<std::size_t>(a)].resize(N, N);
        diff_[static_cast<std::size_t>(a)].setFromTriplets(diff_t[a].begin(), diff_t[a].end());
    }

    // Quadratic stiffness: s(u) = u^T K u / 2 at p == 2 with the trapezoid
    // weights folded in.
    Eigen::SparseMatrix<double> W(N, N);
    {
        std::vector<Triplet> wt;
        wt.reserve(static_cast<std::size_t>(N));
        for (Eigen::Index i = 0; i < N; ++i) wt.emplace_back(i, i, node_w_[i]);
        W.setFromTriplets(wt.begin(), wt.end());
    }
    Eigen::SparseMatrix<double> B(N, N);
    for (int a = 0; a < dim_; ++a) {
        const auto& D = diff_[static_cast<std::size_t>(a)];
        B = B + Eigen::SparseMatrix<double>(D.transpose() * W * D);
    }
    stiffness_ = lap_.transpose() * B * lap_;
    stiffness_.makeCompressed();
}

double Grid::coord(Eigen::Index node, int axis) const {
    const Eigen::Index i = axis_index(node, axis, n_, dim_);
    return static_cast<double>(i) * h_[static_cast<std::size_t>(axis)];
}

GridPtr build_grid(int dim, const std::vector<double>& extents, int nodes_per_axis) {
    return Grid::create(dim, extents, nodes_per_axis);
}

GridFunction::GridFunction(GridPtr grid, Eigen::ArrayXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->num_nodes())
        throw GridMismatch("GridFunction: value count does not match grid");
}

GridFunction::GridFunction(GridPtr grid)
    : grid_(std::move(grid)), values_(Eigen::ArrayXd::Zero(grid_->num_nodes())) {}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
    require_same_grid(*grid_, o.grid(), "GridFunction::operator+=");
    values_ += o.values_;
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
    require_same_grid(*grid_, o.grid(), "GridFunction::operator-=");
    values_ -= o.values_;
    return *this;
}

VectorField::VectorField(GridPtr grid, std::vector<Eigen::ArrayXd> components)
    : grid_(std::move(grid)), comp_(std::move(components)) {
    if (static_cast<int>(comp_.size()) != grid_->dim())
        throw GridMismatch("VectorField: component count must equal grid dimension");
}

GridFunction VectorField::magnitude() const {
    Eigen::ArrayXd e = Eigen::ArrayXd::Zero(grid_->num_nodes());
    for (const auto& c : comp_) e += c.square();
    return GridFunction(grid_, e.sqrt());
}

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (&a == &b) return;
    if (!a.same_layout(b)) throw GridMismatch(std::string(where) + ": grids differ");
}

GridFunction laplacian(const GridFunction& u) {
    Eigen::ArrayXd v = (u.grid().lap_op() * u.values().matrix()).array();
    return GridFunction(u.grid_ptr(), std::move(v));
}

VectorField grad_laplacian(const GridFunction& u) {
    const Eigen::VectorXd w = u.grid().lap_op() * u.values().matrix();
    std::vector<Eigen::ArrayXd> comps;
    comps.reserve(static_cast<std::size_t>(u.grid().dim()));
    for (int a = 0; a < u.grid().dim(); ++a)
        comps.emplace_back((u.grid().diff_op(a) * w).array());
    return VectorField(u.grid_ptr(), std::move(comps));
}

GridFunction apply_navier_bc(const GridFunction& u) {
    Eigen::ArrayXd v = u.values();
    for (Eigen::Index node = 0; node < v.size(); ++node)
        if (u.grid().is_boundary(node)) v[node] = 0.0;
    return GridFunction(u.grid_ptr(), std::move(v));
}

double integrate(const GridFunction& w) {
    return (w.grid().node_weights() * w.values()).sum();
}

double x_norm(const GridFunction& u, const ExponentField& p, double tol) {
    require_same_grid(u.grid(), p.grid(), "x_norm");
    return luxemburg_norm(grad_laplacian(u).magnitude(), p, tol).value;
}

void write_csv(const GridFunction& u, std::ostream& os) {
    const int d = u.grid().dim();
    os << (d == 1 ? "x,value" : "x,y,value") << "\n";
    for (Eigen::Index node = 0; node < u.size(); ++node) {
        os << fmt17(u.grid().coord(node, 0));
        if (d == 2) os << "," << fmt17(u.grid().coord(node, 1));
        os << "," << fmt17(u.values()[node]) << "\n";
    }
}

} // namespace pxk
