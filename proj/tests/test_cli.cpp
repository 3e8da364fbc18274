#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "eplab/cli/commands.hpp"
#include "eplab/cli/output.hpp"
#include "eplab/cli/range_spec.hpp"
#include "eplab/cli/svg_plot.hpp"
#include "eplab/errors.hpp"
#include "eplab/format.hpp"

using namespace eplab;
using namespace eplab::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

std::vector<std::string> split(const std::string& line, char sep = ',')
{
    std::vector<std::string> out;
    std::istringstream is(line);
    for (std::string c; std::getline(is, c, sep);) out.push_back(c);
    return out;
}

double num(const std::string& s) { return std::stod(s); }

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Value of `key=...` in key=value output.
std::string field(const std::string& text, const std::string& key)
{
    for (const auto& l : lines(text))
        if (l.rfind(key + "=", 0) == 0)
            return l.substr(key.size() + 1);
    return {};
}

struct TempDir {
    fs::path path;
    TempDir()
    {
        std::random_device rd;
        path = fs::temp_directory_path() / ("eplab-test-" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("range specs")
{
    const auto r = parse_range("-1:0:2001");
    CHECK(r.lo == -1.0);
    CHECK(r.hi == 0.0);
    CHECK(r.count == 2001);
    const auto v = r.values();
    REQUIRE(v.size() == 2001);
    CHECK(v.front() == -1.0);
    CHECK(v.back() == 0.0);
    CHECK(parse_range(r.str()).count == 2001);
    CHECK(parse_range("+0.5:0.5:1").values() == std::vector<double>{0.5});
    CHECK(parse_range("1e-3:2e-3:2").values() == std::vector<double>{1e-3, 2e-3});

    for (const char* bad : {"", "1:2", "1:2:3:4", "a:1:2", "0:1:0", "0:1:1", "0:1:-3", "0:inf:3",
                            "0:1:2.5", "0: 1:3"})
        CHECK_THROWS_AS(parse_range(bad), UsageError);

    CHECK(parse_number("2.5e-3", "x") == 2.5e-3);
    CHECK(parse_number("+1", "x") == 1.0);
    CHECK_THROWS_AS(parse_number("1.0x", "x"), UsageError);
    CHECK_THROWS_AS(parse_number("nan", "x"), UsageError);
    CHECK_THROWS_AS(parse_number("", "x"), UsageError);
}

TEST_CASE("csv table")
{
    CsvTable t("a,b");
    t.add_row({cell(0.1), cell(true)});
    CHECK(t.rows() == 1);
    CHECK(t.text() == "a,b\n0.1,1\n");
    CHECK_THROWS_AS(t.add_row({"1"}), Error);
    CHECK(cell(-5.521585938684307e-4) == "-0.0005521585938684307");
    CHECK(cell(false) == "0");
}

TEST_CASE("spectrum output")
{
    const auto r = run({"spectrum"});
    REQUIRE(r.code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 2002);
    CHECK(ls[0] == "d0,re1,im1,re2,im2,re3,im3,ov12,ov13,ov23,disc");
    for (std::size_t i = 1; i < ls.size(); ++i) REQUIRE(split(ls[i]).size() == 11);
    CHECK(num(split(ls[1])[0]) == -1.0);
    CHECK(num(split(ls.back())[0]) == 0.0);
    CHECK(run({"spectrum"}).out == r.out);
}

TEST_CASE("spectrum merge topology with correlation")
{
    const auto r = run({"--gamma-cor", "1.5e-3", "spectrum", "--d0", "-1:0:2001"});
    REQUIRE(r.code == 0);
    const auto ls = lines(r.out);
    int transitions = 0;
    bool prev_complex = true;
    for (std::size_t i = 1; i < ls.size(); ++i) {
        const auto c = split(ls[i]);
        CHECK(num(c[2]) == 0.0);
        CHECK(num(c[4]) == -num(c[6]));
        const bool complex_pair = num(c[4]) != 0.0;
        CHECK(complex_pair == (num(c[10]) < 0.0));
        if (complex_pair != prev_complex)
            ++transitions;
        prev_complex = complex_pair;
    }
    CHECK(transitions == 1);
    CHECK(!prev_complex);
}

TEST_CASE("ep single run")
{
    const auto r = run({"ep"});
    REQUIRE(r.code == 0);
    CHECK(num(field(r.out, "d0_ep")) == doctest::Approx(-5.521585938684307e-4).epsilon(1e-9));
    CHECK(num(field(r.out, "overlap_ep")) >= 0.999);
    CHECK(num(field(r.out, "bracket_width")) <= 1e-12);
    CHECK(num(field(r.out, "eigenvalue_gap")) <= 1e-6);
    CHECK(field(r.out, "mode") == "coupled");
    CHECK(field(r.out, "gamma_cor") == "0");

    const auto frozen = run({"--mode", "frozen", "--gamma-p", "1e-5", "ep"});
    CHECK(field(frozen.out, "mode") == "frozen");
}

TEST_CASE("ep without coupling exits 4")
{
    const auto r = run({"--omega-r", "0", "ep"});
    CHECK(r.code == kExitNoEp);
    CHECK(r.err.find("-0.999999") != std::string::npos);
    CHECK(run({"--omega-r", "0", "ep", "--search", "-0.5:-0.1:11"}).err.find("-0.5") !=
          std::string::npos);
}

TEST_CASE("ep locus")
{
    const auto r = run({"ep", "--locus", "0:1e-2:21"});
    REQUIRE(r.code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 22);
    CHECK(ls[0] == "gamma_cor,d0_ep,gamma_p_ep,overlap_ep,bracket_width");
    for (std::size_t i = 2; i < ls.size(); ++i)
        CHECK(num(split(ls[i])[1]) < num(split(ls[i - 1])[1]));
    CHECK(num(split(ls.back())[0]) == 1e-2);

    const auto failed = run({"--omega-r", "0", "ep", "--locus", "0:1e-3:2"});
    CHECK(failed.code == kExitNoEp);
    CHECK(split(lines(failed.out)[1])[1] == "nan");
}

TEST_CASE("splitting")
{
    const auto r = run({"splitting", "--d0", "-0.9:-0.1:5"});
    REQUIRE(r.code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 6);
    CHECK(ls[0] == "d0,dim,dre");
    CHECK(num(split(ls[1])[1]) >= 5e-3);
}

TEST_CASE("dst")
{
    const auto r = run({"dst"});
    REQUIRE(r.code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 42);
    CHECK(ls[0] == "pump_ratio,D_st,D_0,converged");
    CHECK(split(ls[1])[0] == "0");
    CHECK(split(ls[1])[2] == "-1");
    CHECK(split(ls.back())[0] == "2");

    const auto one = run({"dst", "--ratio", "1:1:1"});
    REQUIRE(lines(one.out).size() == 2);
    CHECK(split(lines(one.out)[1])[2] == "0");
}

TEST_CASE("oracle")
{
    const auto cor = run({"oracle", "--dissipator", "cor", "--rate", "1e-3"});
    REQUIRE(cor.code == 0);
    const auto ls = lines(cor.out);
    CHECK(ls[0] == "dissipator,observable,fitted_rate,analytic_rate,rel_err");
    bool saw_ratio = false;
    for (std::size_t i = 1; i < ls.size(); ++i) {
        const auto c = split(ls[i]);
        CHECK(num(c[4]) <= 5e-3);
        if (c[1] == "ratio") {
            saw_ratio = true;
            CHECK(num(c[2]) == doctest::Approx(4.0).epsilon(1e-6));
        }
    }
    CHECK(saw_ratio);
    CHECK(cor.err.find("PASS") != std::string::npos);

    const auto ph = run({"oracle", "--dissipator", "ph", "--rate", "5e-4"});
    REQUIRE(ph.code == 0);
    for (const auto& l : lines(ph.out))
        if (split(l)[1] == "ratio")
            CHECK(num(split(l)[2]) == doctest::Approx(2.0).epsilon(1e-6));

    // Rate taken from the parameter set when --rate is absent.
    const auto cav = run({"oracle", "--dissipator", "cavity"});
    REQUIRE(cav.code == 0);
    const auto row = split(lines(cav.out)[1]);
    CHECK(row[1] == "n");
    CHECK(num(row[3]) == doctest::Approx(1e-4));

    CHECK(run({"oracle", "--dissipator", "bogus", "--rate", "1e-3"}).code == kExitUsage);
    CHECK(run({"oracle", "--dissipator", "pump"}).code == kExitUsage);
    CHECK(run({"oracle"}).code == kExitUsage);
}

TEST_CASE("audit")
{
    const auto r = run({"audit", "--d0", "-1/3,-0.5"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("d0=-0.3333333333333333") != std::string::npos);
    CHECK(r.out.find("d0=-0.5") != std::string::npos);
    CHECK(r.out.find("exact linear solve") != std::string::npos);
    CHECK(r.out.find("printed/exact") != std::string::npos);
    const auto zero = run({"audit", "--d0", "0"});
    CHECK(zero.code == 0);
    CHECK(zero.out.find("unavailable") != std::string::npos);
    CHECK(run({"audit", "--d0", "1/0"}).code == kExitUsage);
}

TEST_CASE("trajectory")
{
    const auto r = run({"trajectory", "--d0", "-0.5", "--t-end", "1000", "--samples", "11"});
    REQUIRE(r.code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 12);
    CHECK(ls[0] == "t,n,D,phi,s");
    CHECK(num(split(ls.back())[0]) == 1000.0);

    const auto init = run({"trajectory", "--t-end", "10", "--samples", "2", "--init", "0.1,-1,0,0"});
    REQUIRE(init.code == 0);
    CHECK(lines(init.out)[1] == "0,0.1,-1,0,0");
}

TEST_CASE("usage errors exit 2")
{
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"nonsense"}).code == kExitUsage);
    CHECK(run({"--gamma-a", "-1", "ep"}).code == kExitUsage);
    CHECK(run({"--gamma-a", "abc", "ep"}).code == kExitUsage);
    CHECK(run({"--n-mol", "1", "ep"}).code == kExitUsage);
    CHECK(run({"--mode", "sideways", "ep"}).code == kExitUsage);
    CHECK(run({"spectrum", "--d0", "0:1:0"}).code == kExitUsage);
    CHECK(run({"spectrum", "--d0", "-2:0:3"}).code == kExitUsage);
    CHECK(run({"--config", "/nonexistent/file", "ep"}).code == kExitUsage);
    CHECK(run({"--help"}).code == 0);
    const auto v = run({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out.find(std::string(kToolVersion)) != std::string::npos);
}

TEST_CASE("config file and flag precedence")
{
    TempDir dir;
    const auto cfg = dir.path / "params.conf";
    write_atomic(cfg, "# test\ngamma_cor = 5e-3\nomega_r = 2e-5\n");
    const auto from_file = run({"--config", cfg.string(), "ep"});
    REQUIRE(from_file.code == 0);
    CHECK(field(from_file.out, "gamma_cor") == "0.005");

    const auto flag = run({"--config", cfg.string(), "--gamma-cor", "1e-3", "ep"});
    CHECK(field(flag.out, "gamma_cor") == "0.001");
    CHECK(field(flag.out, "d0_ep") != field(from_file.out, "d0_ep"));

    write_atomic(cfg, "gamma_q = 1\n");
    CHECK(run({"--config", cfg.string(), "ep"}).code == kExitUsage);
}

TEST_CASE("files, manifests and replay")
{
    TempDir dir;
    const auto csv = dir.path / "spec.csv";
    const auto svg = dir.path / "spec.svg";
    const auto r = run({"--gamma-cor", "1e-3", "--out", csv.string(), "--svg", svg.string(),
                        "spectrum", "--d0", "-1:0:101"});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    REQUIRE(fs::exists(csv));
    REQUIRE(fs::exists(svg));
    REQUIRE(fs::exists(manifest_path(csv)));
    REQUIRE(fs::exists(manifest_path(svg)));

    const auto j = nlohmann::json::parse(slurp(manifest_path(csv)));
    CHECK(j.at("subcommand") == "spectrum");
    CHECK(j.at("version") == std::string(kToolVersion));
    CHECK(j.at("pump_mode") == "coupled");
    CHECK(j.at("params").at("gamma_cor").get<double>() == 1e-3);
    CHECK(!j.at("timestamp").get<std::string>().empty());
    CHECK(j.dump().find("-1:0:101") != std::string::npos);
    const auto m = RunManifest::from_json(j);
    CHECK(m.params.gamma_cor == 1e-3);
    CHECK(m.subcommand == "spectrum");

    const std::string before = slurp(csv);
    const std::string svg_before = slurp(svg);
    fs::remove(csv);
    fs::remove(svg);
    const auto again = run({"replay", manifest_path(csv).string()});
    REQUIRE(again.code == 0);
    CHECK(slurp(csv) == before);
    CHECK(slurp(svg) == svg_before);

    for (const auto& e : fs::directory_iterator(dir.path))
        CHECK(e.path().filename().string().find(".tmp") == std::string::npos);
}

TEST_CASE("svg rendering")
{
    Panel p{"title & more", "x", "y", {{"a<b", {0, 1, 2, 3}, {1, NAN, 2, 3}}, {"c", {0, 1}, {0, 0}}}};
    const auto svg = render_svg({p, p});
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("title &amp; more") != std::string::npos);
    CHECK(svg.find("a&lt;b") != std::string::npos);
    CHECK(svg.find("nan") == std::string::npos);
    CHECK(render_svg({p, p}) == svg);
    CHECK(render_svg({}).find("</svg>") != std::string::npos);
}
