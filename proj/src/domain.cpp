#include "nlpt/domain.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "nlpt/error.hpp"

namespace nlpt {

Grid::Grid(std::vector<Interval> box, std::vector<int> resolution) : dim_(static_cast<int>(box.size())) {
    if (dim_ != 1 && dim_ != 2) throw ConfigError("grid: dimension must be 1 or 2");
    if (resolution.size() != box.size()) throw ConfigError("grid: one resolution per axis required");
    box_ = std::move(box);
    size_ = 1;
    volume_ = 1.0;
    for (int a = 0; a < dim_; ++a) {
        const Interval& iv = box_[a];
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.hi > iv.lo))
            throw ConfigError("grid: degenerate box on axis " + std::to_string(a));
        if (resolution[a] < 4) throw ConfigError("grid: resolution must be >= 4 on every axis");
        resolution_[a] = resolution[a];
        spacing_[a] = iv.length() / resolution[a];
        volume_ *= spacing_[a];
        size_ *= static_cast<std::size_t>(resolution[a]);
    }
}

double Grid::spacing() const { return dim_ == 1 ? spacing_[0] : std::max(spacing_[0], spacing_[1]); }

double Grid::box_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= box_[a].length();
    return v;
}

Point Grid::center(std::size_t cell) const {
    const auto idx = index(cell);
    Point x{0.0, 0.0};
    for (int a = 0; a < dim_; ++a) x[a] = box_[a].lo + (idx[a] + 0.5) * spacing_[a];
    return x;
}

std::array<int, 2> Grid::index(std::size_t cell) const {
    if (dim_ == 1) return {static_cast<int>(cell), 0};
    const auto nx = static_cast<std::size_t>(resolution_[0]);
    return {static_cast<int>(cell % nx), static_cast<int>(cell / nx)};
}

std::size_t Grid::flat(int ix, int iy) const {
    return static_cast<std::size_t>(ix) + static_cast<std::size_t>(iy) * static_cast<std::size_t>(resolution_[0]);
}

bool Grid::valid_index(int ix, int iy) const {
    if (ix < 0 || ix >= resolution_[0]) return false;
    if (dim_ == 1) return iy == 0;
    return iy >= 0 && iy < resolution_[1];
}

bool Grid::contains(const Point& y) const {
    for (int a = 0; a < dim_; ++a)
        if (y[a] < box_[a].lo || y[a] > box_[a].hi) return false;
    return true;
}

double Grid::exit_distance(const Point& x, const Point& e) const {
    double t = std::numeric_limits<double>::infinity();
    for (int a = 0; a < dim_; ++a) {
        if (e[a] > 0.0) t = std::min(t, (box_[a].hi - x[a]) / e[a]);
        if (e[a] < 0.0) t = std::min(t, (box_[a].lo - x[a]) / e[a]);
    }
    return t;
}

double Grid::outer_radius() const {
    double r2 = 0.0;
    for (int a = 0; a < dim_; ++a) {
        const double m = std::max(std::abs(box_[a].lo), std::abs(box_[a].hi));
        r2 += m * m;
    }
    return std::sqrt(r2);
}

bool Grid::operator==(const Grid& o) const {
    if (dim_ != o.dim_) return false;
    for (int a = 0; a < dim_; ++a)
        if (box_[a].lo != o.box_[a].lo || box_[a].hi != o.box_[a].hi || resolution_[a] != o.resolution_[a])
            return false;
    return true;
}

GridPtr build_grid(const std::vector<Interval>& box, const std::vector<int>& resolution) {
    return std::make_shared<const Grid>(box, resolution);
}

RegionMask::RegionMask(GridPtr grid, std::vector<Label> labels) : grid_(std::move(grid)), labels_(std::move(labels)) {
    if (!grid_) throw ConfigError("mask: null grid");
    if (labels_.size() != grid_->size()) throw ConfigError("mask: label count does not match grid size");
    slot_.assign(labels_.size(), npos);
    for (std::size_t c = 0; c < labels_.size(); ++c) {
        if (labels_[c] == Label::Interior) {
            slot_[c] = interior_.size();
            interior_.push_back(c);
        }
    }
    if (interior_.empty()) throw ConfigError("mask: interior is empty");
    // One-ring separation: interior cells never touch exterior cells or the grid edge.
    const Grid& g = *grid_;
    for (std::size_t c : interior_) {
        const auto id = g.index(c);
        const int ry = g.dim() == 2 ? 1 : 0;
        for (int dy = -ry; dy <= ry; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (!g.valid_index(id[0] + dx, id[1] + dy))
                    throw ConfigError("mask: interior touches the grid boundary (no room for a buffer ring)");
                if (labels_[g.flat(id[0] + dx, id[1] + dy)] == Label::Exterior)
                    throw ConfigError("mask: interior cell adjacent to an exterior cell");
            }
        }
    }
}

bool RegionMask::contains(const RegionMask& inner) const {
    if (!(inner.grid() == grid())) return false;
    return std::all_of(inner.interior_.begin(), inner.interior_.end(),
                       [&](std::size_t c) { return labels_[c] == Label::Interior; });
}

namespace {

RegionMask mask_from_flags(GridPtr grid, std::vector<char> inside, int buffer_width) {
    if (buffer_width < 1) throw ConfigError("mask: buffer_width must be >= 1");
    const Grid& g = *grid;
    std::vector<Label> labels(g.size(), Label::Exterior);
    bool any = false;
    for (std::size_t c = 0; c < g.size(); ++c) {
        if (inside[c]) {
            labels[c] = Label::Interior;
            any = true;
        }
    }
    if (!any) throw ConfigError("mask: interior predicate selects no cell");
    const int w = buffer_width;
    const int ry = g.dim() == 2 ? w : 0;
    for (std::size_t c = 0; c < g.size(); ++c) {
        if (!inside[c]) continue;
        const auto id = g.index(c);
        for (int dy = -ry; dy <= ry; ++dy) {
            for (int dx = -w; dx <= w; ++dx) {
                if (!g.valid_index(id[0] + dx, id[1] + dy))
                    throw ConfigError("mask: interior plus " + std::to_string(w) +
                                      " buffer rings does not fit inside the grid box");
                const std::size_t n = g.flat(id[0] + dx, id[1] + dy);
                if (labels[n] == Label::Exterior) labels[n] = Label::Buffer;
            }
        }
    }
    return RegionMask(std::move(grid), std::move(labels));
}

}  // namespace

RegionMask make_mask(GridPtr grid, const CellPredicate& interior, int buffer_width) {
    if (!grid) throw ConfigError("mask: null grid");
    std::vector<char> inside(grid->size(), 0);
    for (std::size_t c = 0; c < grid->size(); ++c) inside[c] = interior(grid->center(c)) ? 1 : 0;
    return mask_from_flags(std::move(grid), std::move(inside), buffer_width);
}

RegionMask make_mask_from_cells(GridPtr grid, std::span<const std::size_t> cells, int buffer_width) {
    if (!grid) throw ConfigError("mask: null grid");
    std::vector<char> inside(grid->size(), 0);
    for (std::size_t c : cells) {
        if (c >= grid->size()) throw ConfigError("mask: cell index out of range");
        inside[c] = 1;
    }
    return mask_from_flags(std::move(grid), std::move(inside), buffer_width);
}

FieldFunction::FieldFunction(GridPtr grid, std::vector<double> values, FarFieldModel far)
    : grid_(std::move(grid)), values_(std::move(values)), far_(std::move(far)) {
    if (!grid_) throw ConfigError("field: null grid");
    if (values_.size() != grid_->size()) throw ConfigError("field: value count does not match grid size");
    for (std::size_t c = 0; c < values_.size(); ++c)
        if (!std::isfinite(values_[c]))
            throw ValidationError("field: non-finite value at cell " + std::to_string(c));
}

double FieldFunction::evaluate(const Point& y) const {
    const Grid& g = *grid_;
    if (!g.contains(y)) return far_.value(y);
    int id[2] = {0, 0};
    for (int a = 0; a < g.dim(); ++a) {
        const int k = static_cast<int>(std::floor((y[a] - g.bounds(a).lo) / g.spacing(a)));
        id[a] = std::clamp(k, 0, g.resolution(a) - 1);
    }
    return values_[g.flat(id[0], id[1])];
}

FieldFunction FieldFunction::with_values(std::vector<double> values) const {
    return FieldFunction(grid_, std::move(values), far_);
}

FieldFunction FieldFunction::with_far(FarFieldModel far) const { return FieldFunction(grid_, values_, std::move(far)); }

FieldFunction FieldFunction::negated() const {
    std::vector<double> v(values_.size());
    std::transform(values_.begin(), values_.end(), v.begin(), [](double t) { return -t; });
    return FieldFunction(grid_, std::move(v), far_.negated());
}

FieldFunction sample_field(GridPtr grid, const ValueRule& rule, FarFieldModel far) {
    if (!grid) throw ConfigError("sample_field: null grid");
    std::vector<double> v(grid->size());
    for (std::size_t c = 0; c < v.size(); ++c) {
        v[c] = rule(grid->center(c));
        if (!std::isfinite(v[c])) {
            const Point x = grid->center(c);
            std::ostringstream os;
            os << "sample_field: non-finite sample at cell " << c << " (x = " << format_double(x[0]);
            if (grid->dim() == 2) os << ", " << format_double(x[1]);
            os << ")";
            throw ValidationError(os.str());
        }
    }
    return FieldFunction(std::move(grid), std::move(v), std::move(far));
}

double sup_norm_difference(const FieldFunction& a, const FieldFunction& b) {
    if (!(a.grid() == b.grid())) throw ConfigError("sup_norm_difference: grids differ");
    double m = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) m = std::max(m, std::abs(a[c] - b[c]));
    return m;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_values_csv(std::ostream& out, const Grid& grid, std::span<const double> values,
                      const std::string& value_name) {
    out << (grid.dim() == 1 ? "x," : "x,y,") << value_name << '\n';
    for (std::size_t c = 0; c < grid.size(); ++c) {
        const Point x = grid.center(c);
        out << format_double(x[0]) << ',';
        if (grid.dim() == 2) out << format_double(x[1]) << ',';
        out << format_double(values[c]) << '\n';
    }
}

void write_field_csv(std::ostream& out, const FieldFunction& field) {
    write_values_csv(out, field.grid(), field.values());
}

std::vector<double> read_field_csv(std::istream& in, const Grid& grid) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("csv: empty input");
    const int cols = grid.dim() + 1;
    std::vector<double> values;
    values.reserve(grid.size());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> parts;
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t end = line.find(',', start);
            if (end == std::string::npos) end = line.size();
            const std::string tok = line.substr(start, end - start);
            double v = 0.0;
            const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
                throw ConfigError("csv: row " + std::to_string(row + 2) + ": cannot parse '" + tok + "'");
            parts.push_back(v);
            start = end + 1;
        }
        if (static_cast<int>(parts.size()) != cols)
            throw ConfigError("csv: row " + std::to_string(row + 2) + ": expected " + std::to_string(cols) +
                              " columns");
        if (row >= grid.size()) throw ConfigError("csv: more rows than grid cells");
        const Point x = grid.center(row);
        for (int a = 0; a < grid.dim(); ++a) {
            if (std::abs(parts[a] - x[a]) > 1e-9 * (1.0 + std::abs(x[a])))
                throw ConfigError("csv: row " + std::to_string(row + 2) + ": coordinates do not match cell centre");
        }
        values.push_back(parts[cols - 1]);
        ++row;
    }
    if (values.size() != grid.size())
        throw ConfigError("csv: expected " + std::to_string(grid.size()) + " rows, got " +
                          std::to_string(values.size()));
    return values;
}

std::vector<std::size_t> cells_in_ball(const Grid& grid, const Ball& ball) {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < grid.size(); ++c)
        if (distance(grid.center(c), ball.center) < ball.radius) out.push_back(c);
    return out;
}

bool ball_in_box(const Grid& grid, const Ball& ball) {
    for (int a = 0; a < grid.dim(); ++a) {
        const Interval& b = grid.bounds(a);
        if (ball.center[a] - ball.radius < b.lo || ball.center[a] + ball.radius > b.hi) return false;
    }
    return true;
}

}  // namespace nlpt
