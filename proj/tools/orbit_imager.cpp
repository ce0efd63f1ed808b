#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "orbit_imager/pipeline.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Multi-frequency factorization imaging of a moving point source"};
    std::string command = "full";
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> method;
    std::optional<std::string> formats;
    bool print_config = false;

    app.add_option("command", command, "classify | synthesize | invert | validate | full")
        ->check(CLI::IsMember({"classify", "synthesize", "invert", "validate", "full"}));
    app.add_option("-c,--config", config, "scenario JSON file")->required();
    app.add_option("-o,--out", out, "output directory (overrides output.dir)");
    app.add_option("--seed", seed, "noise seed (overrides noise.seed)");
    app.add_option("--method", method, "eigen-system method")->check(CLI::IsMember({"paper", "direct"}));
    app.add_option("--format", formats, "field formats, comma separated (vtk,csv)");
    app.add_flag("--print-config", print_config, "print the normalized scenario and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    using namespace orbit_imager;
    try {
        Scenario s = parse_config(config);
        if (out)
            s.output.dir = *out;
        if (seed)
            s.noise.seed = *seed;
        if (method)
            s.method = parse_method(*method);
        if (formats)
            s.output.formats = parse_formats(*formats);
        if (print_config) {
            std::cout << serialize(s).dump(2) << '\n';
            return 0;
        }
        return run(s, parse_command(command));
    } catch (const ConfigError& e) {
        std::cerr << "config error " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
