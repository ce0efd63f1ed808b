#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "errors.hpp"
#include "forward.hpp"
#include "geometry.hpp"
#include "imaging.hpp"
#include "spectral.hpp"
#include "trajectory.hpp"

namespace orbit_imager {

using Triple = std::array<double, 3>;

inline Point to_point(const Triple& t) { return {t[0], t[1], t[2]}; }

struct LineSpec
{
    Triple p0{}, p1{};
    double t_min = 0.0, t_max = 1.0;
    bool operator==(const LineSpec&) const = default;
};

struct ArcSpec
{
    Triple center{};
    double radius = 1.0;
    Triple u{1, 0, 0}, v{0, 1, 0};
    double angle_begin = 0.0, angle_end = 0.0;
    double t_min = 0.0, t_max = 1.0;
    bool operator==(const ArcSpec&) const = default;
};

struct KnotSpec
{
    double t = 0.0;
    Triple position{};
    bool operator==(const KnotSpec&) const = default;
};

struct SampledSpec
{
    std::vector<KnotSpec> knots;
    bool operator==(const SampledSpec&) const = default;
};

struct StationarySpec
{
    Triple position{};
    double t_min = 0.0, t_max = 1.0;
    bool operator==(const StationarySpec&) const = default;
};

using TrajectorySpec = std::variant<LineSpec, ArcSpec, SampledSpec, StationarySpec>;

inline Trajectory build_trajectory(const TrajectorySpec& spec)
{
    return std::visit(
        [](const auto& s) -> Trajectory {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, LineSpec>) {
                return Trajectory::line(to_point(s.p0), to_point(s.p1), s.t_min, s.t_max);
            } else if constexpr (std::is_same_v<S, ArcSpec>) {
                return Trajectory::arc(CircularArc{to_point(s.center), s.radius, to_point(s.u), to_point(s.v),
                                                   s.angle_begin, s.angle_end},
                                       s.t_min, s.t_max);
            } else if constexpr (std::is_same_v<S, SampledSpec>) {
                std::vector<Knot> knots;
                for (const auto& k : s.knots)
                    knots.push_back({k.t, to_point(k.position)});
                return Trajectory::sampled(std::move(knots));
            } else {
                return Trajectory::stationary(to_point(s.position), s.t_min, s.t_max);
            }
        },
        spec);
}

struct AmplitudeSpec
{
    std::vector<double> coefficients{1.0}; // ascending powers of t; one entry means constant
    bool polynomial = false;
    bool operator==(const AmplitudeSpec&) const = default;
};

struct CartesianPoint
{
    Triple x{};
    bool operator==(const CartesianPoint&) const = default;
};

struct SphericalPoint
{
    double R = 1.0, theta = 0.0, phi = 0.0;
    bool operator==(const SphericalPoint&) const = default;
};

using ObservationSpec = std::variant<CartesianPoint, SphericalPoint>;

inline Point observation_point(const ObservationSpec& spec)
{
    if (const auto* c = std::get_if<CartesianPoint>(&spec))
        return to_point(c->x);
    const auto& s = std::get<SphericalPoint>(spec);
    return from_spherical(s.R, s.theta, s.phi);
}

struct BandSpec
{
    double omega_max = 6.0;
    int N = 10;
    bool symmetric_extension = true;
    std::optional<double> omega_min;
    bool operator==(const BandSpec&) const = default;

    FrequencyBand build() const
    {
        if (symmetric_extension)
            return FrequencyBand::symmetric(omega_max, N);
        return FrequencyBand::from_interval(*omega_min, omega_max, N);
    }
};

struct GridSpec
{
    Triple min{-2, -2, -2}, max{2, 2, 2};
    std::array<int, 3> dims{64, 64, 64};
    bool operator==(const GridSpec&) const = default;

    SamplingGrid build() const { return SamplingGrid::from_bounds(to_point(min), to_point(max), dims); }
};

struct NoiseSpec
{
    double delta = 0.0;
    std::uint64_t seed = 0;
    bool operator==(const NoiseSpec&) const = default;
};

struct SliceSpec
{
    Axis axis = Axis::X2;
    double value = 0.0;
    bool operator==(const SliceSpec&) const = default;
};

struct OutputSpec
{
    std::string dir = ".";
    std::vector<FieldFormat> formats{FieldFormat::Vtk, FieldFormat::Csv};
    bool operator==(const OutputSpec&) const = default;
};

struct QuadratureConfig
{
    double panels_per_cycle = 8.0;
    int min_panels = 16;
    int nodes_per_panel = 16;
    bool operator==(const QuadratureConfig&) const = default;

    QuadratureSpec build() const
    {
        QuadratureSpec q{GaussLegendreComposite{panels_per_cycle, min_panels}, nodes_per_panel};
        q.validate();
        return q;
    }
};

struct Scenario
{
    std::string name;
    std::string description;
    TrajectorySpec trajectory;
    std::optional<TrajectorySpec> second_trajectory;
    AmplitudeSpec amplitude;
    double c = 1.0;
    BandSpec band;
    std::vector<ObservationSpec> observation_points;
    GridSpec grid;
    NoiseSpec noise;
    double threshold = 1e5;
    EigenMethod method = EigenMethod::PaperShortcut;
    std::vector<SliceSpec> slices;
    OutputSpec output;
    QuadratureConfig quadrature;

    bool operator==(const Scenario&) const = default;

    Trajectory build_trajectory() const { return orbit_imager::build_trajectory(trajectory); }
    Medium medium() const { return Medium(c); }
    Amplitude build_amplitude() const
    {
        const Trajectory t = build_trajectory();
        return amplitude.polynomial ? Amplitude::polynomial(amplitude.coefficients, t.t_min(), t.t_max())
                                    : Amplitude::constant(amplitude.coefficients.at(0), t.t_min(), t.t_max());
    }
    std::vector<Point> points() const
    {
        std::vector<Point> out;
        for (const auto& p : observation_points)
            out.push_back(observation_point(p));
        return out;
    }
};

namespace detail {

using json = nlohmann::json;

// Reads one JSON object, remembering consumed keys so leftovers can be reported.
class ObjectReader
{
public:
    ObjectReader(const json& j, std::string pointer) : j_(j), pointer_(std::move(pointer))
    {
        if (!j_.is_object())
            throw ConfigError(pointer_.empty() ? "/" : pointer_, "expected a JSON object");
    }

    const std::string& pointer() const noexcept { return pointer_; }
    std::string child(const std::string& key) const { return pointer_ + "/" + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json& require(const std::string& key)
    {
        if (!j_.contains(key))
            throw ConfigError(child(key), "missing required key '" + key + "'");
        used_.insert(key);
        return j_.at(key);
    }

    const json* optional(const std::string& key)
    {
        if (!j_.contains(key))
            return nullptr;
        used_.insert(key);
        return &j_.at(key);
    }

    void finish() const
    {
        for (const auto& [key, value] : j_.items())
            if (!used_.count(key))
                throw ConfigError(child(key), "unknown key '" + key + "'");
    }

private:
    const json& j_;
    std::string pointer_;
    std::set<std::string> used_;
};

inline double read_number(const json& j, const std::string& ptr)
{
    if (!j.is_number())
        throw ConfigError(ptr, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        throw ConfigError(ptr, "expected a finite number");
    return v;
}

// Angles and times may be numbers or strings such as "pi", "3pi/4", "-pi/2", "7*pi/9".
inline double read_angle(const json& j, const std::string& ptr)
{
    if (j.is_number())
        return read_number(j, ptr);
    if (!j.is_string())
        throw ConfigError(ptr, "expected an angle (number or expression like \"3pi/4\")");
    static const std::regex pattern(R"(^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$)");
    const std::string text = j.get<std::string>();
    std::smatch m;
    if (!std::regex_match(text, m, pattern))
        throw ConfigError(ptr, "cannot parse angle '" + text + "'");
    double factor = 1.0;
    const std::string lead = m[1].str();
    if (lead == "-")
        factor = -1.0;
    else if (!lead.empty() && lead != "+")
        factor = std::stod(lead);
    const double divisor = m[2].matched ? std::stod(m[2].str()) : 1.0;
    if (divisor == 0.0)
        throw ConfigError(ptr, "angle divides by zero");
    return factor * std::numbers::pi / divisor;
}

inline int read_int(const json& j, const std::string& ptr)
{
    if (!j.is_number_integer())
        throw ConfigError(ptr, "expected an integer");
    return j.get<int>();
}

inline bool read_bool(const json& j, const std::string& ptr)
{
    if (!j.is_boolean())
        throw ConfigError(ptr, "expected true or false");
    return j.get<bool>();
}

inline std::string read_string(const json& j, const std::string& ptr)
{
    if (!j.is_string())
        throw ConfigError(ptr, "expected a string");
    return j.get<std::string>();
}

inline Triple read_triple(const json& j, const std::string& ptr)
{
    if (!j.is_array() || j.size() != 3)
        throw ConfigError(ptr, "expected an array of 3 numbers");
    return {read_number(j[0], ptr + "/0"), read_number(j[1], ptr + "/1"), read_number(j[2], ptr + "/2")};
}

inline TrajectorySpec read_trajectory(const json& j, const std::string& ptr)
{
    ObjectReader r(j, ptr);
    const std::string kind = read_string(r.require("kind"), r.child("kind"));
    auto time = [&](const char* key) { return read_angle(r.require(key), r.child(key)); };
    TrajectorySpec spec;
    if (kind == "line") {
        spec = LineSpec{read_triple(r.require("p0"), r.child("p0")), read_triple(r.require("p1"), r.child("p1")),
                        time("t_min"), time("t_max")};
    } else if (kind == "arc") {
        ArcSpec a;
        a.center = read_triple(r.require("center"), r.child("center"));
        a.radius = read_number(r.require("radius"), r.child("radius"));
        a.u = read_triple(r.require("u"), r.child("u"));
        a.v = read_triple(r.require("v"), r.child("v"));
        a.angle_begin = read_angle(r.require("angle_begin"), r.child("angle_begin"));
        a.angle_end = read_angle(r.require("angle_end"), r.child("angle_end"));
        a.t_min = time("t_min");
        a.t_max = time("t_max");
        spec = a;
    } else if (kind == "sampled") {
        const json& knots = r.require("knots");
        if (!knots.is_array())
            throw ConfigError(r.child("knots"), "expected an array of knots");
        SampledSpec s;
        for (std::size_t i = 0; i < knots.size(); ++i) {
            const std::string kp = r.child("knots") + "/" + std::to_string(i);
            ObjectReader kr(knots[i], kp);
            s.knots.push_back({read_angle(kr.require("t"), kr.child("t")),
                               read_triple(kr.require("position"), kr.child("position"))});
            kr.finish();
        }
        spec = s;
    } else if (kind == "stationary") {
        spec = StationarySpec{read_triple(r.require("position"), r.child("position")), time("t_min"),
                              time("t_max")};
    } else {
        throw ConfigError(r.child("kind"), "unknown trajectory kind '" + kind + "'");
    }
    r.finish();
    try {
        build_trajectory(spec);
    } catch (const Error& e) {
        throw ConfigError(ptr, e.what());
    }
    return spec;
}

inline json write_trajectory(const TrajectorySpec& spec)
{
    return std::visit(
        [](const auto& s) -> json {
            using S = std::decay_t<decltype(s)>;
            json j;
            if constexpr (std::is_same_v<S, LineSpec>) {
                j = {{"kind", "line"}, {"p0", s.p0}, {"p1", s.p1}, {"t_min", s.t_min}, {"t_max", s.t_max}};
            } else if constexpr (std::is_same_v<S, ArcSpec>) {
                j = {{"kind", "arc"},       {"center", s.center}, {"radius", s.radius},
                     {"u", s.u},            {"v", s.v},           {"angle_begin", s.angle_begin},
                     {"angle_end", s.angle_end}, {"t_min", s.t_min}, {"t_max", s.t_max}};
            } else if constexpr (std::is_same_v<S, SampledSpec>) {
                json knots = json::array();
                for (const auto& k : s.knots)
                    knots.push_back({{"t", k.t}, {"position", k.position}});
                j = {{"kind", "sampled"}, {"knots", knots}};
            } else {
                j = {{"kind", "stationary"}, {"position", s.position}, {"t_min", s.t_min}, {"t_max", s.t_max}};
            }
            return j;
        },
        spec);
}

inline const char* format_name(FieldFormat f) { return f == FieldFormat::Vtk ? "vtk" : "csv"; }

} // namespace detail

inline EigenMethod parse_method(const std::string& s)
{
    if (s == "paper")
        return EigenMethod::PaperShortcut;
    if (s == "direct")
        return EigenMethod::DirectHermitian;
    throw DomainError("unknown eigen method '" + s + "' (expected paper or direct)");
}

inline std::vector<FieldFormat> parse_formats(const std::string& list)
{
    std::vector<FieldFormat> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "vtk")
            out.push_back(FieldFormat::Vtk);
        else if (item == "csv")
            out.push_back(FieldFormat::Csv);
        else
            throw DomainError("unknown field format '" + item + "' (expected vtk or csv)");
    }
    if (out.empty())
        throw DomainError("at least one field format is required");
    return out;
}

inline Scenario parse_scenario(const nlohmann::json& root)
{
    using namespace detail;
    ObjectReader r(root, "");
    Scenario s;
    s.name = read_string(r.require("name"), "/name");
    if (s.name.empty() || s.name.find_first_of("/\\ ") != std::string::npos)
        throw ConfigError("/name", "name must be non-empty without spaces or path separators");
    if (const json* d = r.optional("description"))
        s.description = read_string(*d, "/description");
    s.trajectory = read_trajectory(r.require("trajectory"), "/trajectory");
    if (const json* t = r.optional("second_trajectory"))
        s.second_trajectory = read_trajectory(*t, "/second_trajectory");

    {
        ObjectReader a(r.require("amplitude"), "/amplitude");
        const std::string kind = read_string(a.require("kind"), a.child("kind"));
        if (kind == "constant") {
            s.amplitude = {{read_number(a.require("value"), a.child("value"))}, false};
        } else if (kind == "polynomial") {
            const json& cs = a.require("coefficients");
            if (!cs.is_array() || cs.empty())
                throw ConfigError(a.child("coefficients"), "expected a non-empty array of numbers");
            s.amplitude.polynomial = true;
            s.amplitude.coefficients.clear();
            for (std::size_t i = 0; i < cs.size(); ++i)
                s.amplitude.coefficients.push_back(read_number(cs[i], a.child("coefficients") + "/" + std::to_string(i)));
        } else {
            throw ConfigError(a.child("kind"), "unknown amplitude kind '" + kind + "'");
        }
        a.finish();
    }

    if (const json* c = r.optional("c"))
        s.c = read_number(*c, "/c");

    {
        ObjectReader b(r.require("band"), "/band");
        s.band.omega_max = read_number(b.require("omega_max"), b.child("omega_max"));
        s.band.N = read_int(b.require("N"), b.child("N"));
        if (s.band.N < 1)
            throw ConfigError(b.child("N"), "N must be at least 1");
        if (const json* e = b.optional("symmetric_extension"))
            s.band.symmetric_extension = read_bool(*e, b.child("symmetric_extension"));
        if (const json* m = b.optional("omega_min"))
            s.band.omega_min = read_number(*m, b.child("omega_min"));
        if (!s.band.symmetric_extension && !s.band.omega_min)
            throw ConfigError(b.child("omega_min"), "omega_min is required without symmetric_extension");
        b.finish();
        try {
            s.band.build();
        } catch (const Error& e) {
            throw ConfigError("/band", e.what());
        }
    }

    {
        const json& pts = r.require("observation_points");
        if (!pts.is_array() || pts.empty())
            throw ConfigError("/observation_points", "expected a non-empty array");
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const std::string pp = "/observation_points/" + std::to_string(i);
            ObjectReader p(pts[i], pp);
            if (const json* cart = p.optional("cartesian")) {
                s.observation_points.push_back(CartesianPoint{read_triple(*cart, p.child("cartesian"))});
            } else if (const json* sph = p.optional("spherical")) {
                ObjectReader q(*sph, p.child("spherical"));
                SphericalPoint sp{read_number(q.require("R"), q.child("R")),
                                  read_angle(q.require("theta"), q.child("theta")),
                                  read_angle(q.require("phi"), q.child("phi"))};
                q.finish();
                s.observation_points.push_back(sp);
            } else {
                throw ConfigError(pp, "expected 'cartesian' or 'spherical'");
            }
            p.finish();
        }
    }

    if (const json* g = r.optional("grid")) {
        ObjectReader gr(*g, "/grid");
        if (const json* v = gr.optional("min"))
            s.grid.min = read_triple(*v, "/grid/min");
        if (const json* v = gr.optional("max"))
            s.grid.max = read_triple(*v, "/grid/max");
        if (const json* v = gr.optional("dims")) {
            if (!v->is_array() || v->size() != 3)
                throw ConfigError("/grid/dims", "expected an array of 3 integers");
            for (int a = 0; a < 3; ++a)
                s.grid.dims[a] = read_int((*v)[a], "/grid/dims/" + std::to_string(a));
        }
        gr.finish();
        try {
            s.grid.build();
        } catch (const Error& e) {
            throw ConfigError("/grid", e.what());
        }
    }

    if (const json* n = r.optional("noise")) {
        ObjectReader nr(*n, "/noise");
        if (const json* d = nr.optional("delta"))
            s.noise.delta = read_number(*d, "/noise/delta");
        if (const json* seed = nr.optional("seed")) {
            if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<long long>() >= 0))
                throw ConfigError("/noise/seed", "expected a nonnegative integer");
            s.noise.seed = seed->get<std::uint64_t>();
        }
        if (s.noise.delta < 0.0)
            throw ConfigError("/noise/delta", "delta must be nonnegative");
        nr.finish();
    }

    if (const json* t = r.optional("threshold")) {
        s.threshold = read_number(*t, "/threshold");
        if (!(s.threshold > 0.0))
            throw ConfigError("/threshold", "threshold must be positive");
    }

    if (const json* m = r.optional("method")) {
        try {
            s.method = parse_method(read_string(*m, "/method"));
        } catch (const DomainError& e) {
            throw ConfigError("/method", e.what());
        }
    }

    if (const json* sl = r.optional("slices")) {
        if (!sl->is_array())
            throw ConfigError("/slices", "expected an array");
        for (std::size_t i = 0; i < sl->size(); ++i) {
            const std::string sp = "/slices/" + std::to_string(i);
            ObjectReader q((*sl)[i], sp);
            SliceSpec slice;
            try {
                slice.axis = parse_axis(read_string(q.require("axis"), q.child("axis")));
            } catch (const DomainError& e) {
                throw ConfigError(q.child("axis"), e.what());
            }
            slice.value = read_number(q.require("value"), q.child("value"));
            q.finish();
            s.slices.push_back(slice);
        }
    }

    if (const json* o = r.optional("output")) {
        ObjectReader orr(*o, "/output");
        if (const json* d = orr.optional("dir"))
            s.output.dir = read_string(*d, "/output/dir");
        if (const json* f = orr.optional("formats")) {
            if (!f->is_array())
                throw ConfigError("/output/formats", "expected an array of \"vtk\"/\"csv\"");
            std::string joined;
            for (std::size_t i = 0; i < f->size(); ++i)
                joined += (i ? "," : "") + read_string((*f)[i], "/output/formats/" + std::to_string(i));
            try {
                s.output.formats = parse_formats(joined);
            } catch (const DomainError& e) {
                throw ConfigError("/output/formats", e.what());
            }
        }
        orr.finish();
    }

    if (const json* q = r.optional("quadrature")) {
        ObjectReader qr(*q, "/quadrature");
        if (const json* v = qr.optional("panels_per_cycle"))
            s.quadrature.panels_per_cycle = read_number(*v, "/quadrature/panels_per_cycle");
        if (const json* v = qr.optional("min_panels"))
            s.quadrature.min_panels = read_int(*v, "/quadrature/min_panels");
        if (const json* v = qr.optional("nodes_per_panel"))
            s.quadrature.nodes_per_panel = read_int(*v, "/quadrature/nodes_per_panel");
        qr.finish();
        try {
            s.quadrature.build();
        } catch (const Error& e) {
            throw ConfigError("/quadrature", e.what());
        }
    }

    r.finish();

    try {
        s.medium();
        s.build_amplitude();
    } catch (const Error& e) {
        throw ConfigError("/", e.what());
    }
    const Trajectory traj = s.build_trajectory();
    for (std::size_t i = 0; i < s.observation_points.size(); ++i) {
        try {
            detail::require_off_trajectory(traj, observation_point(s.observation_points[i]));
        } catch (const Error& e) {
            throw ConfigError("/observation_points/" + std::to_string(i), e.what());
        }
    }
    return s;
}

inline Scenario parse_scenario_text(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("/", std::string("invalid JSON: ") + e.what());
    }
    return parse_scenario(j);
}

inline Scenario parse_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError(path + ": cannot open config");
    std::stringstream ss;
    ss << is.rdbuf();
    try {
        return parse_scenario_text(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(e.pointer(), path + ": " + e.what());
    }
}

inline nlohmann::ordered_json serialize(const Scenario& s)
{
    using detail::json;
    nlohmann::ordered_json j;
    j["name"] = s.name;
    if (!s.description.empty())
        j["description"] = s.description;
    j["trajectory"] = detail::write_trajectory(s.trajectory);
    if (s.second_trajectory)
        j["second_trajectory"] = detail::write_trajectory(*s.second_trajectory);
    if (s.amplitude.polynomial)
        j["amplitude"] = {{"kind", "polynomial"}, {"coefficients", s.amplitude.coefficients}};
    else
        j["amplitude"] = {{"kind", "constant"}, {"value", s.amplitude.coefficients.at(0)}};
    j["c"] = s.c;
    nlohmann::ordered_json band;
    band["omega_max"] = s.band.omega_max;
    band["N"] = s.band.N;
    band["symmetric_extension"] = s.band.symmetric_extension;
    if (s.band.omega_min)
        band["omega_min"] = *s.band.omega_min;
    j["band"] = band;
    nlohmann::ordered_json pts = nlohmann::ordered_json::array();
    for (const auto& p : s.observation_points) {
        if (const auto* c = std::get_if<CartesianPoint>(&p)) {
            pts.push_back({{"cartesian", c->x}});
        } else {
            const auto& sp = std::get<SphericalPoint>(p);
            nlohmann::ordered_json inner;
            inner["R"] = sp.R;
            inner["theta"] = sp.theta;
            inner["phi"] = sp.phi;
            pts.push_back({{"spherical", inner}});
        }
    }
    j["observation_points"] = pts;
    j["grid"] = {{"min", s.grid.min}, {"max", s.grid.max}, {"dims", s.grid.dims}};
    j["noise"] = {{"delta", s.noise.delta}, {"seed", s.noise.seed}};
    j["threshold"] = s.threshold;
    j["method"] = to_string(s.method);
    nlohmann::ordered_json slices = nlohmann::ordered_json::array();
    for (const auto& sl : s.slices)
        slices.push_back({{"axis", to_string(sl.axis)}, {"value", sl.value}});
    j["slices"] = slices;
    nlohmann::ordered_json formats = nlohmann::ordered_json::array();
    for (auto f : s.output.formats)
        formats.push_back(detail::format_name(f));
    j["output"] = {{"dir", s.output.dir}, {"formats", formats}};
    j["quadrature"] = {{"panels_per_cycle", s.quadrature.panels_per_cycle},
                       {"min_panels", s.quadrature.min_panels},
                       {"nodes_per_panel", s.quadrature.nodes_per_panel}};
    return j;
}

// FNV-1a over the canonical serialization; output location does not affect the hash.
inline std::string scenario_hash(const Scenario& s)
{
    auto j = serialize(s);
    j.erase("output");
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace orbit_imager
