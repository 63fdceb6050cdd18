#include "vgp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "vgp/io.hpp"

namespace vgp {

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw std::invalid_argument("TimeGrid: need at least 2 nodes");
    if (nodes_.front() != 0.0) throw std::invalid_argument("TimeGrid: first node must be 0");
    if (nodes_.back() != 1.0) throw std::invalid_argument("TimeGrid: last node must be 1");
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (!(nodes_[i] > nodes_[i - 1]))
            throw std::invalid_argument("TimeGrid: nodes must be strictly increasing");
    }

    const std::size_t m = nodes_.size();
    weights_.assign(m, 0.0);
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double half = 0.5 * (nodes_[i + 1] - nodes_[i]);
        weights_[i] += half;
        weights_[i + 1] += half;
    }

    double wsum = 0.0;
    for (double w : weights_) wsum += w;
    if (std::abs(wsum - 1.0) > 1e-12)
        throw std::invalid_argument("TimeGrid: quadrature weights must sum to 1");

    uniform_ = true;
    const double h = nodes_[1] - nodes_[0];
    for (std::size_t i = 1; i + 1 < m; ++i) {
        if (std::abs((nodes_[i + 1] - nodes_[i]) - h) > 1e-12 * std::max(1.0, h)) {
            uniform_ = false;
            break;
        }
    }
}

TimeGrid::Ptr TimeGrid::uniform(std::size_t cells) {
    if (cells < 1) throw std::invalid_argument("TimeGrid::uniform: cells must be >= 1");
    std::vector<double> nodes(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i)
        nodes[i] = static_cast<double>(i) / static_cast<double>(cells);
    nodes.back() = 1.0;
    return Ptr(new TimeGrid(std::move(nodes)));
}

TimeGrid::Ptr TimeGrid::geometric(double q, int n_min, int n_max) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("TimeGrid::geometric: q must be in (0,1)");
    if (n_min > n_max) throw std::invalid_argument("TimeGrid::geometric: n_min must be <= n_max");
    if (n_min < 0) throw std::invalid_argument("TimeGrid::geometric: n_min must be >= 0");
    std::vector<double> nodes;
    nodes.push_back(0.0);
    for (int n = n_max; n >= n_min; --n) nodes.push_back(std::pow(q, n));
    if (nodes.back() < 1.0) nodes.push_back(1.0);
    else nodes.back() = 1.0;
    return Ptr(new TimeGrid(std::move(nodes)));
}

TimeGrid::Ptr TimeGrid::from_nodes(std::vector<double> nodes) {
    return Ptr(new TimeGrid(std::move(nodes)));
}

double TimeGrid::spacing() const {
    if (!uniform_) throw std::logic_error("TimeGrid::spacing: grid is not uniform");
    return nodes_[1] - nodes_[0];
}

std::size_t TimeGrid::floor_index(double t) const {
    if (t <= 0.0) return 0;
    if (t >= 1.0) return nodes_.size() - 1;
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

std::size_t TimeGrid::nearest_index(double t) const {
    const std::size_t lo = floor_index(t);
    if (lo + 1 >= nodes_.size()) return lo;
    return (t - nodes_[lo] <= nodes_[lo + 1] - t) ? lo : lo + 1;
}

double TimeGrid::segment_integral(std::span<const double> values,
                                  std::size_t i0, std::size_t i1) const {
    if (values.size() != nodes_.size())
        throw std::invalid_argument("segment_integral: value count does not match grid");
    if (i1 >= nodes_.size() || i0 > i1)
        throw std::invalid_argument("segment_integral: bad index range");
    double acc = 0.0;
    for (std::size_t i = i0; i < i1; ++i)
        acc += 0.5 * (values[i] + values[i + 1]) * (nodes_[i + 1] - nodes_[i]);
    return acc;
}

bool TimeGrid::same_as(const TimeGrid& other) const {
    if (this == &other) return true;
    return nodes_ == other.nodes_;
}

GridFunction::GridFunction(TimeGrid::Ptr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw std::invalid_argument("GridFunction: null grid");
    if (values_.size() != grid_->size())
        throw std::invalid_argument("GridFunction: value count does not match grid");
}

GridFunction GridFunction::zero(TimeGrid::Ptr grid) {
    std::vector<double> v(grid->size(), 0.0);
    return GridFunction(std::move(grid), std::move(v));
}

GridFunction GridFunction::one(TimeGrid::Ptr grid) {
    std::vector<double> v(grid->size(), 1.0);
    return GridFunction(std::move(grid), std::move(v));
}

GridFunction GridFunction::indicator(TimeGrid::Ptr grid, double a, double b) {
    std::vector<double> v(grid->size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double t = grid->node(i);
        if (t >= a && t <= b) v[i] = 1.0;
    }
    return GridFunction(std::move(grid), std::move(v));
}

double GridFunction::norm_sq() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i)
        acc += grid_->weight(i) * values_[i] * values_[i];
    return acc;
}

GridFunction GridFunction::operator+(const GridFunction& o) const {
    require_same_grid(*this, o);
    std::vector<double> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.values_[i];
    return GridFunction(grid_, std::move(v));
}

GridFunction GridFunction::operator-(const GridFunction& o) const {
    require_same_grid(*this, o);
    std::vector<double> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.values_[i];
    return GridFunction(grid_, std::move(v));
}

GridFunction GridFunction::scaled(double a) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= a;
    return GridFunction(grid_, std::move(v));
}

void GridFunction::write_csv(const std::string& path) const {
    CsvWriter csv(path, {"t", "value"});
    for (std::size_t i = 0; i < values_.size(); ++i)
        csv.row({grid_->node(i), values_[i]});
}

void require_same_grid(const GridFunction& f, const GridFunction& g) {
    if (f.grid_ptr() == g.grid_ptr()) return;
    if (!f.grid().same_as(g.grid()))
        throw std::invalid_argument("grid mismatch between grid functions");
}

} // namespace vgp
