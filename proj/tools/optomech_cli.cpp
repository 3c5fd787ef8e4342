// optomech-cli: figure tables, Wigner grids and point evaluations.
//
// Settings are layered: built-in defaults, figure defaults, --config file,
// OPTOMECH_<KEY> environment variables, then command-line flags.
// Exit codes: 0 ok, 2 configuration error, 3 numerical failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <optomech/app/commands.hpp>

namespace {

using namespace optomech;
using namespace optomech::app;

std::string quoted(std::string s)
{
    for (char& c : s)
        if (c == '"' || c == '\n') c = c == '"' ? '\'' : ' ';
    return "\"" + s + "\"";
}

int config_failure(const std::string& key, const std::string& msg)
{
    std::cerr << "error=config key=" << (key.empty() ? "-" : key) << " message=" << quoted(msg) << '\n';
    return 2;
}

int numerical_failure(const std::string& kind, const std::string& msg)
{
    std::cerr << "error=numerical kind=" << kind << " message=" << quoted(msg) << '\n';
    return 3;
}

struct Flags {
    std::optional<std::string> config, out, format, freq_convention, max_over;
    std::optional<int> jobs;
    std::optional<double> tolerance;
    std::vector<std::string> sets;
    bool print_config = false;
};

void add_common(CLI::App& app, Flags& f)
{
    app.add_option("--config", f.config, "Config file with key = value lines");
    app.add_option("--out", f.out, "Output file (default: stdout)");
    app.add_option("--format", f.format, "csv or json");
    app.add_option("--jobs", f.jobs, "Worker threads (0: hardware concurrency)");
    app.add_option("--tolerance", f.tolerance, "Relative tolerance of the cubature");
    app.add_option("--freq-convention", f.freq_convention, "angular (omega_m in rad/s) or ordinary (Hz)");
    app.add_option("--max-over", f.max_over, "Maximize I over t, x, t+x or none");
    app.add_option("--set", f.sets, "Override any key: --set key=value (repeatable)");
    app.add_flag("--print-config", f.print_config, "Print the merged configuration and exit");
}

RunConfig build_config(Command cmd, const Flags& f, const std::vector<std::pair<std::string, std::string>>& positional)
{
    RunConfig cfg;
    for (const auto& [k, v] : command_defaults(cmd)) cfg.set(k, v);
    if (f.config) cfg.load_file(*f.config);
    cfg.load_environment();
    if (f.out) cfg.set("output", *f.out);
    if (f.format) cfg.set("format", *f.format);
    if (f.jobs) cfg.set("jobs", std::to_string(*f.jobs));
    if (f.tolerance) cfg.set("tolerance", format_number(*f.tolerance));
    if (f.freq_convention) cfg.set("freq_convention", *f.freq_convention);
    if (f.max_over) cfg.set("max_over", *f.max_over);
    for (const auto& s : f.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(s, "--set expects key=value");
        cfg.set(app::detail::trim(s.substr(0, eq)), app::detail::trim(s.substr(eq + 1)));
    }
    for (const auto& [k, v] : positional) cfg.set(k, v);
    return cfg;
}

void emit(const Output& o, const RunConfig& cfg)
{
    std::ostringstream buf;
    if (cfg.text("format") == "json") {
        if (o.json)
            buf << o.json->dump(2) << '\n';
        else
            write_json(buf, o.table);
    } else {
        write_csv(buf, o.table);
    }
    const std::string& path = cfg.text("output");
    if (path.empty() || path == "-") {
        std::cout << buf.str();
        std::cout.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("output", "cannot open '" + path + "' for writing");
    f << buf.str();
    if (!f) throw ConfigError("output", "write to '" + path + "' failed");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Macroscopicity of optomechanical superposition states"};
    app.require_subcommand(1);
    Flags flags;
    add_common(app, flags);
    app.fallthrough();

    std::string fig2_panel, fig3_panel;
    std::optional<std::string> benchmark;
    auto* fig1b = app.add_subcommand("fig1b", "I against coupling k for the end-mirror state");
    auto* fig2 = app.add_subcommand("fig2", "Thermal input: a) I vs k, b) M vs k, c) max I vs nbar");
    fig2->add_option("panel", fig2_panel, "a, b or c")->required()->check(CLI::IsMember({"a", "b", "c"}));
    auto* fig3 = app.add_subcommand("fig3", "Membrane: a) |zeta(n)| vs k, b) branch weights, d) I vs r");
    fig3->add_option("panel", fig3_panel, "a, b or d")->required()->check(CLI::IsMember({"a", "b", "d"}));
    auto* wig = app.add_subcommand("wigner", "Wigner function on a grid (x, p, W)");
    auto* cat = app.add_subcommand("cat-benchmark", "Equivalent even-cat amplitude for given I values");
    cat->add_option("I", benchmark, "I value(s); same syntax as benchmark_I");
    auto* eval = app.add_subcommand("eval", "Evaluate I and M of any model over the configured ranges");
    for (auto* s : {fig1b, fig2, fig3, wig, cat, eval}) s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return config_failure("-", e.what());
    }

    Command cmd = Command::eval;
    if (*fig1b) cmd = Command::fig1b;
    else if (*fig2) cmd = fig2_panel == "a" ? Command::fig2a : fig2_panel == "b" ? Command::fig2b : Command::fig2c;
    else if (*fig3) cmd = fig3_panel == "a" ? Command::fig3a : fig3_panel == "b" ? Command::fig3b : Command::fig3d;
    else if (*wig) cmd = Command::wigner;
    else if (*cat) cmd = Command::cat_benchmark;

    std::vector<std::pair<std::string, std::string>> positional;
    if (benchmark) positional.emplace_back("benchmark_I", *benchmark);

    try {
        const RunConfig cfg = build_config(cmd, flags, positional);
        if (flags.print_config) {
            validate_for(cmd, cfg);
            std::cout << cfg.serialize();
            return 0;
        }
        emit(run(cmd, cfg), cfg);
        return 0;
    } catch (const ConfigError& e) {
        return config_failure(e.key(), e.what());
    } catch (const NumericalError& e) {
        return numerical_failure(e.kind(), e.what());
    } catch (const std::domain_error& e) {
        return numerical_failure("domain", e.what());
    } catch (const std::invalid_argument& e) {
        return config_failure("-", e.what());
    } catch (const std::exception& e) {
        return numerical_failure("internal", e.what());
    }
}
