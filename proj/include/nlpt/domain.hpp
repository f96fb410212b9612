#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nlpt/far_field.hpp"
#include "nlpt/point.hpp"

namespace nlpt {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

/// Uniform cell-centred lattice on an axis-aligned box in one or two dimensions.
///
/// Cells are closed cubes sampled at their centres (midpoint rule). Flat cell
/// indices run over axis 0 fastest.
class Grid {
public:
    Grid(std::vector<Interval> box, std::vector<int> resolution);

    int dim() const { return dim_; }
    std::size_t size() const { return size_; }
    int resolution(int axis) const { return resolution_[axis]; }
    double spacing(int axis) const { return spacing_[axis]; }
    /// Largest spacing over the axes.
    double spacing() const;
    const Interval& bounds(int axis) const { return box_[axis]; }
    double cell_volume() const { return volume_; }
    double box_volume() const;

    Point center(std::size_t cell) const;
    std::array<int, 2> index(std::size_t cell) const;
    std::size_t flat(int ix, int iy = 0) const;
    bool valid_index(int ix, int iy = 0) const;

    /// True if y lies in the closed box.
    bool contains(const Point& y) const;
    /// Distance from an interior point x to the box boundary along unit direction e.
    double exit_distance(const Point& x, const Point& e) const;
    /// Largest |y| over the box corners.
    double outer_radius() const;

    bool operator==(const Grid& other) const;

private:
    int dim_;
    std::vector<Interval> box_;
    std::array<int, 2> resolution_{1, 1};
    std::array<double, 2> spacing_{1.0, 1.0};
    double volume_ = 1.0;
    std::size_t size_ = 0;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Construction error on degenerate boxes, n outside {1,2}, or resolution < 4.
GridPtr build_grid(const std::vector<Interval>& box, const std::vector<int>& resolution);

enum class Label : unsigned char { Interior, Buffer, Exterior };

/// Interior / buffer / exterior partition of the grid cells.
class RegionMask {
public:
    RegionMask(GridPtr grid, std::vector<Label> labels);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    Label label(std::size_t cell) const { return labels_[cell]; }
    bool is_interior(std::size_t cell) const { return labels_[cell] == Label::Interior; }
    std::span<const Label> labels() const { return labels_; }
    std::span<const std::size_t> interior() const { return interior_; }
    std::size_t interior_count() const { return interior_.size(); }
    /// Position of a cell in interior(), or npos.
    std::size_t interior_slot(std::size_t cell) const { return slot_[cell]; }

    /// Every interior cell of `inner` is interior here.
    bool contains(const RegionMask& inner) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    GridPtr grid_;
    std::vector<Label> labels_;
    std::vector<std::size_t> interior_;
    std::vector<std::size_t> slot_;
};

using CellPredicate = std::function<bool(const Point&)>;

/// Interior = cells whose centre satisfies the predicate; buffer = the next
/// `buffer_width` rings (Chebyshev index distance). The buffer must fit inside
/// the grid.
RegionMask make_mask(GridPtr grid, const CellPredicate& interior, int buffer_width);

/// Mask with an explicit interior cell set (used for sub-domains).
RegionMask make_mask_from_cells(GridPtr grid, std::span<const std::size_t> cells, int buffer_width);

/// Grid samples plus the analytic model used outside the box.
class FieldFunction {
public:
    FieldFunction(GridPtr grid, std::vector<double> values, FarFieldModel far);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t cell) const { return values_[cell]; }
    std::size_t size() const { return values_.size(); }
    const FarFieldModel& far() const { return far_; }

    /// Value at an arbitrary point: cell sample inside the box, far model outside.
    double evaluate(const Point& y) const;

    FieldFunction with_values(std::vector<double> values) const;
    FieldFunction with_far(FarFieldModel far) const;
    FieldFunction negated() const;

private:
    GridPtr grid_;
    std::vector<double> values_;
    FarFieldModel far_;
};

using ValueRule = std::function<double(const Point&)>;

/// v_i = rule(x_i). Non-finite samples are rejected with the offending cell.
FieldFunction sample_field(GridPtr grid, const ValueRule& rule, FarFieldModel far);

double sup_norm_difference(const FieldFunction& a, const FieldFunction& b);

/// CSV: one row per cell, coordinates then value, 17 significant digits.
void write_field_csv(std::ostream& out, const FieldFunction& field);
void write_values_csv(std::ostream& out, const Grid& grid, std::span<const double> values,
                      const std::string& value_name = "value");
/// Reads values back; coordinates must match the grid cell centres.
std::vector<double> read_field_csv(std::istream& in, const Grid& grid);

std::string format_double(double v);

struct Ball {
    Point center{0.0, 0.0};
    double radius = 1.0;
};

/// Cells whose centre lies in the open ball.
std::vector<std::size_t> cells_in_ball(const Grid& grid, const Ball& ball);

/// True when the closed ball lies inside the grid box.
bool ball_in_box(const Grid& grid, const Ball& ball);

}  // namespace nlpt
