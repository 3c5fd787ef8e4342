#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "optomech/app/commands.hpp"

using namespace optomech;
using namespace optomech::app;

namespace {

double num(const Table& t, std::size_t row, const std::string& col)
{
    return std::get<double>(t.rows.at(row).at(t.column(col)));
}

std::string csv(const Output& o)
{
    std::ostringstream s;
    write_csv(s, o.table);
    return s.str();
}

RunConfig config_for(Command c, std::initializer_list<std::pair<const char*, const char*>> overrides = {})
{
    RunConfig cfg;
    for (const auto& [k, v] : command_defaults(c)) cfg.set(k, v);
    for (const auto& [k, v] : overrides) cfg.set(k, v);
    return cfg;
}

struct CliRun {
    int code;
    std::string out, err;
};

std::string slurp(const std::string& path)
{
    std::ifstream f(path);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

CliRun cli(const std::string& args, const std::string& env = "")
{
    const std::string out = testing::TempDir() + "cli_out.txt", err = testing::TempDir() + "cli_err.txt";
    const std::string cmd = env + " '" + std::string(OPTOMECH_CLI_PATH) + "' " + args + " >" + out + " 2>" + err;
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

const std::regex config_line(R"(^error=config key=\S+ message="[^"\n]*"\n$)");
const std::regex numerical_line(R"(^error=numerical kind=[a-z_]+ message="[^"\n]*"\n$)");

} // namespace

TEST(Range, ListAndLinspace)
{
    EXPECT_EQ(parse_range("k", "1,2.5,pi").values, (std::vector<double>{1.0, 2.5, pi}));
    const auto r = parse_range("k", "0:1:5");
    ASSERT_EQ(r.values.size(), 5u);
    EXPECT_DOUBLE_EQ(r.values[1], 0.25);
    EXPECT_EQ(r.values.back(), 1.0);
    const auto g = parse_range("nbar", "1e-4:1e-1:4:log");
    EXPECT_NEAR(g.values[1], 1e-3, 1e-18);
    EXPECT_EQ(g.values.back(), 1e-1);
    EXPECT_DOUBLE_EQ(parse_range("t", "2pi").front(), 2.0 * pi);
}

TEST(Range, Rejections)
{
    for (const char* bad : {"", "1:2", "1:2:0", "2:1:3", "1:2:1", "0:1:3:log", "1:2:3:cubic", "a", "1,,2", "nan"})
        EXPECT_THROW(parse_range("k", bad), ConfigError) << bad;
    try {
        parse_range("alpha", "x");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "alpha");
    }
}

TEST(Config, SerializeRoundTrip)
{
    RunConfig a;
    a.set("k", "0:2:11");
    a.set("nbar", "1e-3,1e-2");
    a.set("method", "quadrature");
    a.set("tolerance", "1e-8");
    a.set("cov_xx", "1");
    a.set("cov_xp", "0");
    a.set("cov_pp", "1");
    a.set("output", "out.csv");
    RunConfig b;
    b.load_text(a.serialize());
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.serialize(), b.serialize());
    // Canonical form does not depend on spelling.
    RunConfig c;
    c.set("t", "pi");
    RunConfig d;
    d.set("t", "3.141592653589793");
    EXPECT_EQ(c.serialize(), d.serialize());
}

TEST(Config, FileSyntax)
{
    RunConfig c;
    c.load_text("# comment\nk = 2   # trailing\n\nalpha=0.5\n");
    EXPECT_EQ(c.number("alpha"), 0.5);
    EXPECT_EQ(c.range("k").front(), 2.0);
    EXPECT_THROW(c.load_text("k = 1\nk = 2\n"), ConfigError);
    EXPECT_THROW(c.load_text("nonsense = 1\n"), ConfigError);
    EXPECT_THROW(c.load_text("k 1\n"), ConfigError);
    EXPECT_THROW(c.load_file("/nonexistent/optomech.cfg"), ConfigError);
}

TEST(Config, EnvironmentOverride)
{
    EXPECT_EQ(env_name("max_over"), "OPTOMECH_MAX_OVER");
    ::setenv("OPTOMECH_ALPHA", "1.25", 1);
    ::setenv("OPTOMECH_METHOD", "quadrature", 1);
    RunConfig c;
    c.load_text("alpha = 0.3\n");
    c.load_environment();
    ::unsetenv("OPTOMECH_ALPHA");
    ::unsetenv("OPTOMECH_METHOD");
    EXPECT_EQ(c.number("alpha"), 1.25);
    EXPECT_EQ(c.text("method"), "quadrature");
    ::setenv("OPTOMECH_JOBS", "many", 1);
    RunConfig d;
    EXPECT_THROW(d.load_environment(), ConfigError);
    ::unsetenv("OPTOMECH_JOBS");
}

TEST(Config, Validation)
{
    const auto fails = [](std::initializer_list<std::pair<const char*, const char*>> kv, const char* key) {
        RunConfig c;
        for (const auto& [k, v] : kv) c.set(k, v);
        try {
            c.validate();
        } catch (const ConfigError& e) {
            return e.key() == key;
        }
        return false;
    };
    EXPECT_TRUE(fails({{"nbar", "-1"}}, "nbar"));
    EXPECT_TRUE(fails({{"tolerance", "0"}}, "tolerance"));
    EXPECT_TRUE(fails({{"temperature", "1e-3"}}, "freq_convention"));
    EXPECT_TRUE(fails({{"temperature", "1e-3"}, {"freq_convention", "angular"}, {"nbar", "0.1"}}, "temperature"));
    EXPECT_TRUE(fails({{"cov_pp", "1"}}, "cov_xx"));
    EXPECT_THROW(RunConfig().set("format", "xml"), ConfigError);
    EXPECT_THROW(RunConfig().set("max_over", "k"), ConfigError);
}

TEST(Config, CommandChecks)
{
    EXPECT_THROW(run(Command::fig3a, config_for(Command::fig3a, {{"alpha", "0.1,0.2"}})), ConfigError);
    EXPECT_THROW(run(Command::eval, config_for(Command::eval, {{"model", "membrane"}, {"nbar", "0.1"}})),
                 ConfigError);
    EXPECT_THROW(run(Command::eval, config_for(Command::eval, {{"model", "membrane"}, {"method", "exact"}})),
                 ConfigError);
    EXPECT_THROW(run(Command::wigner, config_for(Command::wigner, {{"k", "1,2"}})), ConfigError);
    EXPECT_THROW(run(Command::eval, config_for(Command::eval, {{"model", "gaussian"}, {"cov_xx", "0.1"},
                                                                {"cov_xp", "0"}, {"cov_pp", "0.1"}})),
                 ConfigError);
}

TEST(Table, NumberFormatting)
{
    EXPECT_EQ(format12(1.0 / 3.0), "0.333333333333");
    EXPECT_EQ(format12(-0.0), "0");
    EXPECT_EQ(format12(2.0), "2");
    EXPECT_EQ(format12(1e-300), "1e-300");
    EXPECT_EQ(format12(std::nan("")), "nan");
    EXPECT_TRUE(json_number(INFINITY).is_null());
}

TEST(Fig1b, HeadlinePointAndLimits)
{
    const auto out = run(Command::fig1b, config_for(Command::fig1b));
    const Table& t = out.table;
    ASSERT_EQ(t.rows.size(), 101u);
    EXPECT_EQ(std::vector<std::string>(t.columns.begin(), t.columns.begin() + 11), standard_columns());
    EXPECT_EQ(num(t, 0, "k"), 0.0);
    EXPECT_NEAR(num(t, 0, "I"), 0.0, 1e-12);
    EXPECT_NEAR(num(t, 0, "M"), 4.0, 1e-12);
    EXPECT_NEAR(num(t, 10, "k"), 1.0, 1e-14);
    EXPECT_NEAR(num(t, 10, "I"), 1.49, 0.03);
    for (std::size_t i = 0; i < t.rows.size(); ++i) EXPECT_LE(num(t, i, "I"), num(t, i, "M") + 1e-9) << i;
}

TEST(Fig1b, QuadratureMatchesExact)
{
    auto cfg = config_for(Command::fig1b, {{"k", "0.5,1"}});
    const auto exact = run(Command::fig1b, cfg);
    cfg.set("method", "quadrature");
    const auto quad = run(Command::fig1b, cfg);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(num(exact.table, i, "I"), num(quad.table, i, "I"), 1e-6);
    EXPECT_EQ(std::get<std::string>(quad.table.rows[0][quad.table.column("method")]), "quadrature");
}

TEST(Sweep, DeterministicAcrossJobCounts)
{
    auto cfg = config_for(Command::fig2a, {{"k", "0:3:13"}});
    cfg.set("jobs", "1");
    const std::string a = csv(run(Command::fig2a, cfg));
    cfg.set("jobs", "4");
    EXPECT_EQ(a, csv(run(Command::fig2a, cfg)));
    EXPECT_EQ(a, csv(run(Command::fig2a, cfg)));
}

TEST(Fig2, ThermalOrderingAndMeanPhonon)
{
    const auto out = run(Command::fig2a, config_for(Command::fig2a));
    const Table& t = out.table;
    ASSERT_EQ(t.rows.size(), 3u * 81u);
    // Blocks of 81 k values, nbar ascending.
    for (std::size_t i = 0; i < 81; ++i) {
        const double k = num(t, i, "k");
        EXPECT_EQ(num(t, 81 + i, "k"), k);
        if (k > 0) {
            EXPECT_GT(num(t, i, "I"), num(t, 81 + i, "I"));
            EXPECT_GE(num(t, 81 + i, "I"), num(t, 162 + i, "I"));
        }
        // Thermal input only shifts M by nbar.
        for (int b = 1; b < 3; ++b)
            EXPECT_NEAR(num(t, 81 * b + i, "M") - num(t, i, "M"), num(t, 81 * b + i, "nbar") - num(t, i, "nbar"),
                        1e-9);
    }
    EXPECT_EQ(csv(out), csv(run(Command::fig2b, config_for(Command::fig2b))));
}

TEST(Fig2, PanelCDecaysAndReportsTemperatures)
{
    const auto out = run(Command::fig2c, config_for(Command::fig2c, {{"omega_m", "1e6"}}));
    const Table& t = out.table;
    ASSERT_EQ(t.rows.size(), 41u);
    for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_LT(num(t, i, "I"), num(t, i - 1, "I"));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double nb = num(t, i, "nbar");
        EXPECT_NEAR(occupation_from_temperature(num(t, i, "T_angular"), 1e6, FrequencyConvention::angular), nb,
                    1e-9 * nb);
        EXPECT_NEAR(num(t, i, "T_ordinary") / num(t, i, "T_angular"), 2.0 * pi, 1e-9);
    }
}

TEST(Sweep, TemperatureDrivesOccupation)
{
    auto cfg = config_for(Command::eval, {{"temperature", "1e-6,2e-6"}, {"freq_convention", "angular"}});
    const auto out = run(Command::eval, cfg);
    ASSERT_EQ(out.table.rows.size(), 2u);
    EXPECT_NEAR(num(out.table, 0, "nbar"), occupation_from_temperature(1e-6, 1e6), 1e-15);
    EXPECT_EQ(num(out.table, 1, "temperature"), 2e-6);
}

TEST(Sweep, MaxOverKeepsArgmax)
{
    auto cfg = config_for(Command::eval, {{"t", "1:pi:9"}, {"k", "1"}});
    const auto all = run(Command::eval, cfg);
    double best = 0, best_t = 0;
    for (std::size_t i = 0; i < all.table.rows.size(); ++i)
        if (num(all.table, i, "I") > best) {
            best = num(all.table, i, "I");
            best_t = num(all.table, i, "t");
        }
    cfg.set("max_over", "t");
    const auto mx = run(Command::eval, cfg);
    ASSERT_EQ(mx.table.rows.size(), 1u);
    EXPECT_EQ(num(mx.table, 0, "I"), best);
    EXPECT_EQ(num(mx.table, 0, "t"), best_t);
}

TEST(Eval, ModelsAgreeWithLibrary)
{
    const auto cat = run(Command::eval, config_for(Command::eval, {{"model", "cat"}, {"alpha", "1.27"}}));
    EXPECT_NEAR(num(cat.table, 0, "I"), 1.27 * 1.27 * std::tanh(1.27 * 1.27), 1e-9);
    EXPECT_NEAR(num(cat.table, 0, "M"), num(cat.table, 0, "I"), 1e-9);

    const auto g = run(Command::eval, config_for(Command::eval, {{"model", "gaussian"}, {"r", "0.5"}, {"nbar", "0.2"}, {"beta0", "0"}}));
    auto cfg = config_for(Command::eval, {{"model", "gaussian"}, {"r", "0.5"}, {"nbar", "0.2"}, {"beta0", "0"}, {"method", "quadrature"}});
    const auto gq = run(Command::eval, cfg);
    EXPECT_NEAR(num(g.table, 0, "raw_integral"), num(gq.table, 0, "raw_integral"), 1e-7);
    EXPECT_NEAR(num(g.table, 0, "M"), std::sinh(0.5) * std::sinh(0.5) * 1.4 + 0.2, 1e-9);

    const auto two = run(Command::eval, config_for(Command::eval, {{"model", "membrane"},
                                                                    {"membrane_state", "two-term"},
                                                                    {"k", "17"}}));
    EXPECT_NEAR(num(two.table, 0, "I"), eq9_closed_form(squeeze_degree(1, pi, 17).modulus()).I, 1e-12);
}

TEST(Fig3, PanelA)
{
    const auto out = run(Command::fig3a, config_for(Command::fig3a, {{"k", "0,1,17"}}));
    const Table& t = out.table;
    EXPECT_EQ(num(t, 0, "zeta1"), 0.0);
    EXPECT_NEAR(num(t, 1, "zeta1"), 0.5724, 1e-4);
    EXPECT_GE(num(t, 2, "zeta1"), 1.85);
    EXPECT_LE(num(t, 2, "zeta1"), 2.10);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(num(t, i, "zeta0"), 0.0);
}

TEST(Fig3, PanelBWeightsNormalized)
{
    const auto out = run(Command::fig3b, config_for(Command::fig3b));
    const Table& t = out.table;
    double s = 0.0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        EXPECT_EQ(num(t, i, "n"), double(i));
        s += num(t, i, "weight_abs") * num(t, i, "weight_abs");
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
    EXPECT_LE(num(t, 0, "I"), num(t, 0, "M") + 1e-9);
}

TEST(Fig3, PanelDCrossChecked)
{
    const auto out = run(Command::fig3d, config_for(Command::fig3d, {{"r", "0:3:7"}}));
    const Table& t = out.table;
    ASSERT_EQ(t.rows.size(), 7u);
    int checked = 0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double r = num(t, i, "r");
        EXPECT_NEAR(squeeze_degree(1, pi, num(t, i, "k")).modulus(), r, 1e-9);
        EXPECT_NEAR(num(t, i, "I"), eq9_closed_form(r).I, 1e-12);
        if (!std::isnan(num(t, i, "check_I"))) {
            ++checked;
            EXPECT_NEAR(num(t, i, "check_I"), num(t, i, "I"), 1e-5);
        }
    }
    EXPECT_EQ(checked, 3);
}

TEST(Wigner, VacuumPeakAndJsonShape)
{
    auto cfg = config_for(Command::wigner, {{"model", "cat"}, {"alpha", "0"}, {"grid_resolution", "65"},
                                            {"grid_half_width", "3"}});
    const auto out = run(Command::wigner, cfg);
    ASSERT_EQ(out.table.rows.size(), 65u * 65u);
    const std::size_t centre = 32 * 65 + 32;
    EXPECT_NEAR(std::get<double>(out.table.rows[centre][2]), 1.0 / pi, 1e-12);
    ASSERT_TRUE(out.json.has_value());
    EXPECT_EQ((*out.json)["W"].size(), 65u);
    EXPECT_EQ((*out.json)["W"][0].size(), 65u);
    EXPECT_EQ((*out.json)["x"].size(), 65u);
}

TEST(CatBenchmark, Amplitude)
{
    const auto out = run(Command::cat_benchmark, config_for(Command::cat_benchmark, {{"benchmark_I", "1.49,4"}}));
    EXPECT_EQ(out.table.columns, (std::vector<std::string>{"I", "alpha", "M"}));
    EXPECT_NEAR(num(out.table, 0, "alpha"), 1.27, 0.01);
    EXPECT_NEAR(num(out.table, 1, "M"), 4.0, 1e-9);
}

TEST(Cli, CsvToStdoutAndFile)
{
    const CliRun r = cli("fig1b --set k=0,1");
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.err.empty());
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "k,nbar,t,x,alpha,beta0,I,M,raw_integral,error_estimate,method");
    EXPECT_NE(r.out.find("\n1,0,3.14159265359,0,0.8,2,1.48661521651,"), std::string::npos) << r.out;

    const std::string path = testing::TempDir() + "fig1b.json";
    const CliRun j = cli("fig1b --set k=1 --format json --out " + path);
    EXPECT_EQ(j.code, 0) << j.err;
    const auto doc = nlohmann::json::parse(slurp(path));
    ASSERT_EQ(doc.size(), 1u);
    EXPECT_NEAR(doc[0]["I"].get<double>(), 1.48661521651, 1e-11);
    EXPECT_EQ(doc[0]["method"], "analytic-coherent");
}

TEST(Cli, Precedence)
{
    const std::string path = testing::TempDir() + "prec.cfg";
    std::ofstream(path) << "alpha = 0.5\nk = 2\nbeta0 = 1\n";
    const CliRun r = cli("eval --print-config --config " + path + " --set beta0=3", "OPTOMECH_K=4");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("alpha = 0.5\n"), std::string::npos);
    EXPECT_NE(r.out.find("k = 4\n"), std::string::npos);
    EXPECT_NE(r.out.find("beta0 = 3\n"), std::string::npos);
    // The printed configuration reproduces itself.
    const std::string again = testing::TempDir() + "again.cfg";
    std::ofstream(again) << r.out;
    EXPECT_EQ(cli("eval --print-config --config " + again).out, r.out);
}

TEST(Cli, ConfigErrorsExitTwo)
{
    for (const std::string args : {"fig1b --set k=-1", "fig2 z", "eval --set nope=1", "fig1b --format xml",
                                   "eval --config /nonexistent.cfg", "eval --set temperature=1e-3"}) {
        const CliRun r = cli(args);
        EXPECT_EQ(r.code, 2) << args;
        EXPECT_TRUE(std::regex_match(r.err, config_line)) << args << ": " << r.err;
        EXPECT_TRUE(r.out.empty()) << args;
    }
    const CliRun env = cli("eval", "OPTOMECH_TOLERANCE=lots");
    EXPECT_EQ(env.code, 2);
    EXPECT_NE(env.err.find("key=tolerance"), std::string::npos) << env.err;
}

TEST(Cli, NumericalErrorsExitThree)
{
    const CliRun r = cli("eval --set alpha=0 --set x=40");
    EXPECT_EQ(r.code, 3);
    EXPECT_TRUE(std::regex_match(r.err, numerical_line)) << r.err;
    EXPECT_NE(r.err.find("kind=zero_norm"), std::string::npos);
    EXPECT_TRUE(r.out.empty());
}

TEST(Cli, DeterministicOutput)
{
    const CliRun a = cli("fig2 c --jobs 1"), b = cli("fig2 c --jobs 3");
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
}
