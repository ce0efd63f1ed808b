#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "forward.hpp"
#include "geometry.hpp"
#include "spectral.hpp"

namespace orbit_imager {

class SamplingGrid
{
public:
    SamplingGrid(const Point& origin, const Vec3& spacing, std::array<int, 3> dims)
        : origin_(origin), spacing_(spacing), dims_(dims)
    {
        for (int a = 0; a < 3; ++a) {
            if (!(spacing_(a) > 0.0) || !std::isfinite(spacing_(a)))
                throw DomainError("grid spacing must be positive");
            if (dims_[a] < 2)
                throw DomainError("grid needs at least 2 points per axis");
        }
    }

    static SamplingGrid from_bounds(const Point& lo, const Point& hi, std::array<int, 3> dims)
    {
        Vec3 spacing;
        for (int a = 0; a < 3; ++a) {
            if (dims[a] < 2)
                throw DomainError("grid needs at least 2 points per axis");
            if (!(hi(a) > lo(a)))
                throw DomainError("grid max must exceed grid min on every axis");
            spacing(a) = (hi(a) - lo(a)) / (dims[a] - 1);
        }
        return {lo, spacing, dims};
    }

    const Point& origin() const noexcept { return origin_; }
    const Vec3& spacing() const noexcept { return spacing_; }
    const std::array<int, 3>& dims() const noexcept { return dims_; }
    std::size_t size() const noexcept
    {
        return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
    }
    double coordinate(int axis, int i) const noexcept { return origin_(axis) + i * spacing_(axis); }
    double extent_max(int axis) const noexcept { return coordinate(axis, dims_[axis] - 1); }

    // x-fastest ordering.
    std::size_t index(int i, int j, int k) const noexcept
    {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(dims_[0]) * (j + static_cast<std::size_t>(dims_[1]) * k);
    }
    std::array<int, 3> ijk(std::size_t idx) const noexcept
    {
        const int i = static_cast<int>(idx % dims_[0]);
        const std::size_t rest = idx / dims_[0];
        return {i, static_cast<int>(rest % dims_[1]), static_cast<int>(rest / dims_[1])};
    }
    Point point(std::size_t idx) const noexcept
    {
        const auto [i, j, k] = ijk(idx);
        return {coordinate(0, i), coordinate(1, j), coordinate(2, k)};
    }

    bool operator==(const SamplingGrid&) const = default;

private:
    Point origin_;
    Vec3 spacing_;
    std::array<int, 3> dims_;
};

struct FieldMeta
{
    std::vector<int> points_used;
    std::vector<int> points_dropped;
    std::optional<double> threshold;
    std::optional<std::uint64_t> seed;
    std::optional<FrequencyBand> band;
    bool all_dropped = false;
    std::string scenario_hash;
};

struct ScalarField
{
    SamplingGrid grid;
    std::vector<double> values;
    FieldMeta meta;

    double at(int i, int j, int k) const { return values[grid.index(i, j, k)]; }
};

namespace detail {

inline unsigned worker_count()
{
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ORBIT_IMAGER_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1)
            n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return n;
}

// Runs body(begin, end) over disjoint chunks of [0, count).
template <class Body>
void parallel_chunks(std::size_t count, Body&& body)
{
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), std::max<std::size_t>(count, 1)));
    if (workers <= 1) {
        body(std::size_t{0}, count);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t b = w * chunk;
        const std::size_t e = std::min(count, b + chunk);
        if (b >= e)
            break;
        pool.emplace_back([&body, b, e] { body(b, e); });
    }
    for (auto& t : pool)
        t.join();
}

} // namespace detail

struct PicardFields
{
    SamplingGrid grid;
    std::vector<Point> points;
    std::vector<std::vector<double>> sums; // sums[j][grid index]
    std::vector<SharpEigensystem> eigensystems;
    std::optional<FrequencyBand> band;
};

inline PicardFields picard_sums(const std::vector<NearFieldRecord>& records, const SamplingGrid& grid,
                                double t_min, double t_max, const Medium& medium,
                                EigenMethod method = EigenMethod::PaperShortcut,
                                std::optional<double> lambda_floor = std::nullopt)
{
    PicardFields out{grid, {}, {}, {}, std::nullopt};
    for (const auto& rec : records) {
        if (out.band && !(*out.band == rec.band))
            throw DomainError("picard_sums: all records must share one frequency band");
        out.band = rec.band;
    }
    for (const auto& rec : records) {
        SharpEigensystem eig = sharp_eigensystem(assemble(rec), method);
        const double floor = lambda_floor.value_or(default_lambda_floor(eig));
        const PicardEvaluator eval(eig, rec.band, t_min, t_max, medium, floor);
        std::vector<double> field(grid.size());
        detail::parallel_chunks(grid.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t idx = b; idx < e; ++idx)
                field[idx] = eval.sum_at(rec.x, grid.point(idx));
        });
        out.points.push_back(rec.x);
        out.sums.push_back(std::move(field));
        out.eigensystems.push_back(std::move(eig));
    }
    return out;
}

inline ScalarField single_indicator(const PicardFields& sums, std::size_t j)
{
    ScalarField f{sums.grid, std::vector<double>(sums.grid.size()), {}};
    for (std::size_t idx = 0; idx < f.values.size(); ++idx)
        f.values[idx] = detail::reciprocal_or_zero(sums.sums.at(j)[idx]);
    f.meta.points_used = {static_cast<int>(j)};
    f.meta.band = sums.band;
    return f;
}

/// Drops every point whose smallest Picard sum exceeds M', then W = 1 / sum of the rest.
inline ScalarField fuse(const PicardFields& sums, double M_prime)
{
    if (sums.sums.empty())
        throw DomainError("fuse: needs at least one field");
    if (!(M_prime > 0.0))
        throw DomainError("fuse: threshold must be positive");
    ScalarField f{sums.grid, std::vector<double>(sums.grid.size(), 0.0), {}};
    f.meta.threshold = M_prime;
    f.meta.band = sums.band;
    std::vector<double> total(sums.grid.size(), 0.0);
    for (std::size_t j = 0; j < sums.sums.size(); ++j) {
        const auto& s = sums.sums[j];
        const double lowest = *std::min_element(s.begin(), s.end());
        if (lowest > M_prime) {
            f.meta.points_dropped.push_back(static_cast<int>(j));
            continue;
        }
        f.meta.points_used.push_back(static_cast<int>(j));
        for (std::size_t idx = 0; idx < s.size(); ++idx)
            total[idx] += s[idx];
    }
    f.meta.all_dropped = f.meta.points_used.empty();
    if (!f.meta.all_dropped)
        for (std::size_t idx = 0; idx < total.size(); ++idx)
            f.values[idx] = detail::reciprocal_or_zero(total[idx]);
    return f;
}

enum class Axis { X1 = 0, X2 = 1, X3 = 2 };

inline const char* to_string(Axis a)
{
    switch (a) {
    case Axis::X1: return "x1";
    case Axis::X2: return "x2";
    default: return "x3";
    }
}

inline Axis parse_axis(const std::string& s)
{
    if (s == "x1" || s == "y1") return Axis::X1;
    if (s == "x2" || s == "y2") return Axis::X2;
    if (s == "x3" || s == "y3") return Axis::X3;
    throw DomainError("unknown slice axis '" + s + "'");
}

// A grid plane; u and v are the two remaining axes in increasing order, values row-major over (v, u).
struct Slice
{
    Axis axis = Axis::X3;
    double value = 0.0;
    int plane = 0;
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> values;

    double at(std::size_t row, std::size_t col) const { return values[row * u.size() + col]; }
};

namespace detail {

inline std::array<int, 2> slice_axes(Axis axis)
{
    switch (axis) {
    case Axis::X1: return {1, 2};
    case Axis::X2: return {0, 2};
    default: return {0, 1};
    }
}

inline std::size_t slice_grid_index(const SamplingGrid& g, Axis axis, int plane, int col, int row)
{
    std::array<int, 3> ijk{};
    const auto [ua, va] = slice_axes(axis);
    ijk[static_cast<int>(axis)] = plane;
    ijk[ua] = col;
    ijk[va] = row;
    return g.index(ijk[0], ijk[1], ijk[2]);
}

} // namespace detail

inline Slice extract_slice(const ScalarField& field, Axis axis, double value)
{
    const int a = static_cast<int>(axis);
    const SamplingGrid& g = field.grid;
    const double h = g.spacing()(a);
    const double lo = g.coordinate(a, 0);
    const double hi = g.extent_max(a);
    if (!(value >= lo - 0.5 * h && value <= hi + 0.5 * h))
        throw DomainError("extract_slice: value outside grid extent");
    const int plane = std::clamp(static_cast<int>(std::lround((value - lo) / h)), 0, g.dims()[a] - 1);

    const auto [ua, va] = detail::slice_axes(axis);
    Slice s;
    s.axis = axis;
    s.plane = plane;
    s.value = g.coordinate(a, plane);
    for (int i = 0; i < g.dims()[ua]; ++i)
        s.u.push_back(g.coordinate(ua, i));
    for (int i = 0; i < g.dims()[va]; ++i)
        s.v.push_back(g.coordinate(va, i));
    s.values.reserve(s.u.size() * s.v.size());
    for (int row = 0; row < g.dims()[va]; ++row)
        for (int col = 0; col < g.dims()[ua]; ++col)
            s.values.push_back(field.values[detail::slice_grid_index(g, axis, plane, col, row)]);
    return s;
}

// Writes slice values back into their plane of the field.
inline void embed_slice(ScalarField& field, const Slice& s)
{
    const auto [ua, va] = detail::slice_axes(s.axis);
    const auto& d = field.grid.dims();
    if (static_cast<int>(s.u.size()) != d[ua] || static_cast<int>(s.v.size()) != d[va])
        throw DomainError("embed_slice: slice shape does not match grid");
    for (int row = 0; row < d[va]; ++row)
        for (int col = 0; col < d[ua]; ++col)
            field.values[detail::slice_grid_index(field.grid, s.axis, s.plane, col, row)] =
                s.values[static_cast<std::size_t>(row) * d[ua] + col];
}

// Grid points whose value lies in the top (1 - q) fraction.
inline std::vector<bool> quantile_mask(const std::vector<double>& values, double q = 0.9)
{
    if (values.empty())
        return {};
    std::vector<double> sorted = values;
    const std::size_t k = std::min(sorted.size() - 1, static_cast<std::size_t>(std::floor(q * sorted.size())));
    std::nth_element(sorted.begin(), sorted.begin() + k, sorted.end());
    const double cut = sorted[k];
    std::vector<bool> mask(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        mask[i] = values[i] >= cut;
    return mask;
}

// Grid points y with r_lo <= |x - y| <= r_hi.
inline std::vector<bool> shell_mask(const SamplingGrid& grid, const Point& x, double r_lo, double r_hi)
{
    std::vector<bool> mask(grid.size());
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        const double r = (grid.point(idx) - x).norm();
        mask[idx] = r >= r_lo && r <= r_hi;
    }
    return mask;
}

// One-cell dilation over the 26-neighbourhood.
inline std::vector<bool> dilate(const SamplingGrid& grid, const std::vector<bool>& mask)
{
    std::vector<bool> out(mask.size(), false);
    const auto& d = grid.dims();
    for (std::size_t idx = 0; idx < mask.size(); ++idx) {
        if (!mask[idx])
            continue;
        const auto [i, j, k] = grid.ijk(idx);
        for (int dk = -1; dk <= 1; ++dk)
            for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di) {
                    const int a = i + di, b = j + dj, c = k + dk;
                    if (a >= 0 && b >= 0 && c >= 0 && a < d[0] && b < d[1] && c < d[2])
                        out[grid.index(a, b, c)] = true;
                }
    }
    return out;
}

// Fraction of `subset` points that are also in `region`; 1 when the subset is empty.
inline double containment_fraction(const std::vector<bool>& subset, const std::vector<bool>& region)
{
    std::size_t total = 0, inside = 0;
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (!subset[i])
            continue;
        ++total;
        inside += region[i] ? 1 : 0;
    }
    return total == 0 ? 1.0 : static_cast<double>(inside) / total;
}

namespace detail {

inline std::string format_g9(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline void ensure_written(std::ostream& os, const std::string& path)
{
    if (!os)
        throw IoError(path + ": write failed");
}

} // namespace detail

enum class FieldFormat { Vtk, Csv };

inline void write_field_vtk(const std::string& path, const ScalarField& field)
{
    using detail::format_g9;
    std::ofstream os(path);
    if (!os)
        throw IoError(path + ": cannot open for writing");
    const auto& g = field.grid;
    os << "# vtk DataFile Version 3.0\n";
    os << "orbit_imager W";
    if (!field.meta.scenario_hash.empty())
        os << " scenario_hash=" << field.meta.scenario_hash;
    os << "\nASCII\nDATASET STRUCTURED_POINTS\n";
    os << "DIMENSIONS " << g.dims()[0] << ' ' << g.dims()[1] << ' ' << g.dims()[2] << '\n';
    os << "ORIGIN " << format_g9(g.origin()(0)) << ' ' << format_g9(g.origin()(1)) << ' '
       << format_g9(g.origin()(2)) << '\n';
    os << "SPACING " << format_g9(g.spacing()(0)) << ' ' << format_g9(g.spacing()(1)) << ' '
       << format_g9(g.spacing()(2)) << '\n';
    os << "POINT_DATA " << field.values.size() << '\n';
    os << "SCALARS W double 1\nLOOKUP_TABLE default\n";
    for (double v : field.values)
        os << format_g9(v) << '\n';
    detail::ensure_written(os, path);
}

inline ScalarField read_field_vtk(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError(path + ": cannot open for reading");
    std::string line, word;
    std::array<int, 3> dims{};
    Point origin = Point::Zero();
    Vec3 spacing = Vec3::Ones();
    std::size_t count = 0;
    bool have_dims = false;
    while (is >> word) {
        if (word == "DIMENSIONS") {
            is >> dims[0] >> dims[1] >> dims[2];
            have_dims = true;
        } else if (word == "ORIGIN") {
            is >> origin(0) >> origin(1) >> origin(2);
        } else if (word == "SPACING") {
            is >> spacing(0) >> spacing(1) >> spacing(2);
        } else if (word == "POINT_DATA") {
            is >> count;
        } else if (word == "LOOKUP_TABLE") {
            is >> word;
            break;
        }
    }
    if (!is || !have_dims)
        throw IoError(path + ": not a structured-points VTK file");
    ScalarField f{SamplingGrid(origin, spacing, dims), {}, {}};
    if (count != f.grid.size())
        throw IoError(path + ": POINT_DATA count does not match DIMENSIONS");
    f.values.resize(count);
    for (auto& v : f.values)
        if (!(is >> v))
            throw IoError(path + ": truncated scalar data");
    return f;
}

inline void write_field_csv(const std::string& path, const ScalarField& field)
{
    using detail::format_g9;
    std::ofstream os(path);
    if (!os)
        throw IoError(path + ": cannot open for writing");
    if (!field.meta.scenario_hash.empty())
        os << "# scenario_hash=" << field.meta.scenario_hash << '\n';
    os << "x,y,z,W\n";
    for (std::size_t idx = 0; idx < field.values.size(); ++idx) {
        const Point p = field.grid.point(idx);
        os << format_g9(p(0)) << ',' << format_g9(p(1)) << ',' << format_g9(p(2)) << ','
           << format_g9(field.values[idx]) << '\n';
    }
    detail::ensure_written(os, path);
}

inline ScalarField read_field_csv(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError(path + ": cannot open for reading");
    std::array<std::map<double, int>, 3> axes;
    std::vector<std::array<double, 4>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'x')
            continue;
        std::array<double, 4> r{};
        std::stringstream ss(line);
        char comma = 0;
        if (!(ss >> r[0] >> comma >> r[1] >> comma >> r[2] >> comma >> r[3]))
            throw IoError(path + ": malformed row '" + line + "'");
        for (int a = 0; a < 3; ++a)
            axes[a].emplace(r[a], 0);
        rows.push_back(r);
    }
    std::array<int, 3> dims{};
    Point origin;
    Vec3 spacing;
    for (int a = 0; a < 3; ++a) {
        int i = 0;
        for (auto& [coord, slot] : axes[a])
            slot = i++;
        dims[a] = i;
        if (i < 2)
            throw IoError(path + ": field needs at least 2 points per axis");
        origin(a) = axes[a].begin()->first;
        spacing(a) = (axes[a].rbegin()->first - origin(a)) / (i - 1);
    }
    ScalarField f{SamplingGrid(origin, spacing, dims), {}, {}};
    if (rows.size() != f.grid.size())
        throw IoError(path + ": row count does not match a full grid");
    f.values.assign(rows.size(), 0.0);
    for (const auto& r : rows)
        f.values[f.grid.index(axes[0][r[0]], axes[1][r[1]], axes[2][r[2]])] = r[3];
    return f;
}

inline void export_field(const ScalarField& field, FieldFormat format, const std::string& path)
{
    if (format == FieldFormat::Vtk)
        write_field_vtk(path, field);
    else
        write_field_csv(path, field);
}

inline void write_slice_csv(const std::string& path, const Slice& s, const std::string& scenario_hash = {})
{
    using detail::format_g9;
    std::ofstream os(path);
    if (!os)
        throw IoError(path + ": cannot open for writing");
    const auto [ua, va] = detail::slice_axes(s.axis);
    os << "# axis=" << to_string(s.axis) << " value=" << format_g9(s.value) << '\n';
    if (!scenario_hash.empty())
        os << "# scenario_hash=" << scenario_hash << '\n';
    os << to_string(static_cast<Axis>(ua)) << ',' << to_string(static_cast<Axis>(va)) << ",W\n";
    for (std::size_t row = 0; row < s.v.size(); ++row)
        for (std::size_t col = 0; col < s.u.size(); ++col)
            os << format_g9(s.u[col]) << ',' << format_g9(s.v[row]) << ',' << format_g9(s.at(row, col)) << '\n';
    detail::ensure_written(os, path);
}

} // namespace orbit_imager
