#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <iosfwd>
#include <memory>
#include <vector>

#include "pxk/errors.hpp"

namespace pxk {

class ExponentField;
class GridFunction;

// Uniform tensor grid on an axis-aligned interval (d=1) or rectangle (d=2)
// with the discrete operators used by the energy: centered second and first
// differences with odd-reflection ghost layers, which encode the boundary
// traces u = lap u = lap^2 u = 0 exactly.  The operators are cached as
// sparse matrices so adjoints in the residual assembly are exact to
// rounding.
class Grid {
public:
    static std::shared_ptr<const Grid> create(int dim, const std::vector<double>& extents,
                                              int nodes_per_axis);

    int dim() const { return dim_; }
    int nodes_per_axis() const { return n_; }
    Eigen::Index num_nodes() const { return num_nodes_; }
    double extent(int axis) const { return extents_[static_cast<std::size_t>(axis)]; }
    double spacing(int axis) const { return h_[static_cast<std::size_t>(axis)]; }

    // Node coordinate along `axis` (axis 0 = x, axis 1 = y).
    double coord(Eigen::Index node, int axis) const;

    bool is_boundary(Eigen::Index node) const { return boundary_mask_[node]; }
    const std::vector<bool>& boundary_mask() const { return boundary_mask_; }
    const std::vector<Eigen::Index>& interior_nodes() const { return interior_; }

    // Trapezoidal quadrature weights over nodes.
    const Eigen::ArrayXd& node_weights() const { return node_w_; }

    // Centered Laplacian (nodes -> nodes) with odd-reflection ghosts.
    const Eigen::SparseMatrix<double>& lap_op() const { return lap_; }
    // Centered first difference along `axis` (nodes -> nodes), same ghosts.
    const Eigen::SparseMatrix<double>& diff_op(int axis) const {
        return diff_[static_cast<std::size_t>(axis)];
    }

    // Stiffness of the quadratic gradient energy: s(u) = u^T K u / 2 at
    // p == 2, K = (D L)^T W (D L) summed over axes.
    const Eigen::SparseMatrix<double>& gradlap_stiffness() const { return stiffness_; }

    bool same_layout(const Grid& other) const {
        return dim_ == other.dim_ && n_ == other.n_ && extents_ == other.extents_;
    }

private:
    Grid() = default;
    void build_operators();

    int dim_ = 0;
    int n_ = 0;
    Eigen::Index num_nodes_ = 0;
    std::array<double, 2> extents_{0.0, 0.0};
    std::array<double, 2> h_{0.0, 0.0};
    std::vector<bool> boundary_mask_;
    std::vector<Eigen::Index> interior_;
    Eigen::ArrayXd node_w_;
    Eigen::SparseMatrix<double> lap_;
    std::array<Eigen::SparseMatrix<double>, 2> diff_;
    Eigen::SparseMatrix<double> stiffness_;
};

using GridPtr = std::shared_ptr<const Grid>;

// build_grid(1, {1.0}, 129) -> unit interval, 129 nodes.
GridPtr build_grid(int dim, const std::vector<double>& extents, int nodes_per_axis);

// Real-valued field on grid nodes.  Value semantics; the grid is shared.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(GridPtr grid, Eigen::ArrayXd values);
    // Zero field.
    explicit GridFunction(GridPtr grid);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const Eigen::ArrayXd& values() const { return values_; }
    Eigen::ArrayXd& values() { return values_; }

    Eigen::Index size() const { return values_.size(); }
    double max_abs() const { return values_.size() ? values_.abs().maxCoeff() : 0.0; }

    GridFunction& operator+=(const GridFunction& o);
    GridFunction& operator-=(const GridFunction& o);
    GridFunction& operator*=(double t) {
        values_ *= t;
        return *this;
    }

    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(double t, GridFunction a) { return a *= t; }
    friend GridFunction operator*(GridFunction a, double t) { return a *= t; }

private:
    GridPtr grid_;
    Eigen::ArrayXd values_;
};

// Per-axis nodal components of a gradient-type field.
class VectorField {
public:
    VectorField(GridPtr grid, std::vector<Eigen::ArrayXd> components);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    int component_count() const { return static_cast<int>(comp_.size()); }
    const Eigen::ArrayXd& component(int axis) const {
        return comp_[static_cast<std::size_t>(axis)];
    }

    // Pointwise Euclidean magnitude.
    GridFunction magnitude() const;

private:
    GridPtr grid_;
    std::vector<Eigen::ArrayXd> comp_;
};

void require_same_grid(const Grid& a, const Grid& b, const char* where);

// Centered second-difference Laplacian; exact on quadratics in the interior.
GridFunction laplacian(const GridFunction& u);

// Centered first differences of laplacian(u); in 1D the discrete third
// derivative, exact on cubics in the interior.
VectorField grad_laplacian(const GridFunction& u);

// Zeroes the boundary trace; the remaining traces lap u = lap^2 u = 0 are
// encoded by the odd-reflection stencils.
GridFunction apply_navier_bc(const GridFunction& u);

// Trapezoidal quadrature of a nodal field.
double integrate(const GridFunction& w);

// Computational X-norm: Luxemburg norm of |grad lap u|.
double x_norm(const GridFunction& u, const ExponentField& p, double tol = 1e-10);

// CSV serialization: header, then one row per node (coordinates, value).
void write_csv(const GridFunction& u, std::ostream& os);

} // namespace pxk
