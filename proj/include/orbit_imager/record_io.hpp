#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "forward.hpp"

namespace orbit_imager {

namespace detail {

inline std::string format_g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    return out;
}

inline double parse_double(const std::string& text, const std::string& context)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (text.find_first_not_of(" \t\r", used) != std::string::npos)
            throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw IoError(context + ": cannot parse number '" + text + "'");
    }
}

} // namespace detail

/// Writes a record as `# x1,x2,x3,kappa,K,N` metadata followed by `omega,re,im` rows.
inline void write_record_csv(std::ostream& os, const NearFieldRecord& rec, const std::string& scenario_hash = {})
{
    using detail::format_g17;
    if (!rec.complete())
        throw AssemblyError("write_record_csv: record is missing samples");
    os << "# x1,x2,x3,kappa,K,N\n";
    os << "# " << format_g17(rec.x.x()) << ',' << format_g17(rec.x.y()) << ',' << format_g17(rec.x.z())
       << ',' << format_g17(rec.band.kappa()) << ',' << format_g17(rec.band.K()) << ',' << rec.band.N()
       << '\n';
    if (!scenario_hash.empty())
        os << "# scenario_hash=" << scenario_hash << '\n';
    os << "omega,re,im\n";
    for (const auto& [omega, u] : rec.ascending())
        os << format_g17(omega) << ',' << format_g17(u.real()) << ',' << format_g17(u.imag()) << '\n';
}

inline void write_record_csv(const std::string& path, const NearFieldRecord& rec,
                             const std::string& scenario_hash = {})
{
    std::ofstream os(path);
    if (!os)
        throw IoError(path + ": cannot open for writing");
    write_record_csv(os, rec, scenario_hash);
    if (!os)
        throw IoError(path + ": write failed");
}

inline NearFieldRecord read_record_csv(std::istream& is, const std::string& context = "record")
{
    std::string line;
    if (!std::getline(is, line) || line.rfind("# x1,x2,x3,kappa,K,N", 0) != 0)
        throw IoError(context + ": missing '# x1,x2,x3,kappa,K,N' header");
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0)
        throw IoError(context + ": missing metadata line");
    const auto meta = detail::split_csv(line.substr(2));
    if (meta.size() != 6)
        throw IoError(context + ": metadata line needs 6 values");
    const Point x(detail::parse_double(meta[0], context), detail::parse_double(meta[1], context),
                  detail::parse_double(meta[2], context));
    const double kappa = detail::parse_double(meta[3], context);
    const double K = detail::parse_double(meta[4], context);
    const double n_value = detail::parse_double(meta[5], context);
    if (n_value < 1 || n_value != std::floor(n_value))
        throw IoError(context + ": N must be a positive integer");
    const int N = static_cast<int>(n_value);

    std::vector<std::pair<double, Complex>> rows;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("omega", 0) == 0)
            continue;
        const auto cells = detail::split_csv(line);
        if (cells.size() != 3)
            throw IoError(context + ": expected 'omega,re,im' row, got '" + line + "'");
        rows.emplace_back(detail::parse_double(cells[0], context),
                          Complex(detail::parse_double(cells[1], context),
                                  detail::parse_double(cells[2], context)));
    }
    if (static_cast<int>(rows.size()) != 2 * N - 1)
        throw IoError(context + ": expected " + std::to_string(2 * N - 1) + " frequency rows, found " +
                      std::to_string(rows.size()));

    NearFieldRecord rec;
    rec.x = x;
    rec.band = FrequencyBand(kappa, K, N);
    rec.provenance = Loaded{};
    for (int n = N - 2; n >= 0; --n)
        rec.samples_minus.push_back(rows[n].second);
    for (int n = 0; n < N; ++n)
        rec.samples_plus.push_back(rows[N - 1 + n].second);
    return rec;
}

inline NearFieldRecord read_record_csv(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError(path + ": cannot open for reading");
    return read_record_csv(is, path);
}

} // namespace orbit_imager
