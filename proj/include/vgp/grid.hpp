#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace vgp {

/// Quadrature grid on [0,1]: strictly increasing nodes 0 = t_0 < ... < t_M = 1
/// with nonnegative trapezoidal weights summing to 1.
///
/// Grids are immutable and shared by reference; functions sampled on a grid
/// keep a shared_ptr to it.
class TimeGrid {
public:
    using Ptr = std::shared_ptr<const TimeGrid>;

    /// Uniform grid with `cells` equal intervals (cells+1 nodes).
    static Ptr uniform(std::size_t cells);

    /// Grid {0} U {q^n : n = n_max..n_min} U {1} for the small-time experiments.
    static Ptr geometric(double q, int n_min, int n_max);

    /// Arbitrary node set; validated against the grid invariants.
    static Ptr from_nodes(std::vector<double> nodes);

    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return nodes_.size(); }        // node count M+1
    std::size_t cells() const { return nodes_.size() - 1; }
    double node(std::size_t i) const { return nodes_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }

    bool is_uniform() const { return uniform_; }
    /// Cell width; valid only for uniform grids.
    double spacing() const;

    /// Index of the largest node <= t (t clamped to [0,1]).
    std::size_t floor_index(double t) const;
    /// Index of the node closest to t.
    std::size_t nearest_index(double t) const;

    /// Trapezoid rule for node samples over the sub-interval [t_i0, t_i1].
    double segment_integral(std::span<const double> values,
                            std::size_t i0, std::size_t i1) const;

    bool same_as(const TimeGrid& other) const;

private:
    explicit TimeGrid(std::vector<double> nodes);
    std::vector<double> nodes_;
    std::vector<double> weights_;
    bool uniform_ = false;
};

/// An element of L2([0,1]) sampled at the nodes of a TimeGrid.
class GridFunction {
public:
    GridFunction(TimeGrid::Ptr grid, std::vector<double> values);

    /// All-zero function.
    static GridFunction zero(TimeGrid::Ptr grid);
    /// Constant 1 on [0,1].
    static GridFunction one(TimeGrid::Ptr grid);
    /// Node-sampled indicator of [a,b].
    static GridFunction indicator(TimeGrid::Ptr grid, double a, double b);
    /// Sample an arbitrary callable at the nodes.
    template <typename F>
    static GridFunction sample(TimeGrid::Ptr grid, F&& f) {
        std::vector<double> v(grid->size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid->node(i));
        return GridFunction(std::move(grid), std::move(v));
    }

    const TimeGrid& grid() const { return *grid_; }
    TimeGrid::Ptr grid_ptr() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    double norm_sq() const;

    GridFunction operator+(const GridFunction& o) const;
    GridFunction operator-(const GridFunction& o) const;
    GridFunction scaled(double a) const;

    /// CSV serialization: header "t,value", 17 significant digits.
    void write_csv(const std::string& path) const;

private:
    TimeGrid::Ptr grid_;
    std::vector<double> values_;
};

/// Throws std::invalid_argument unless both functions live on the same grid.
void require_same_grid(const GridFunction& f, const GridFunction& g);

} // namespace vgp
