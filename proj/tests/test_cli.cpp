#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "app.hpp"
#include "doctest.h"
#include "latdiff/errors.hpp"
#include "output.hpp"
#include "scenario.hpp"

using namespace latdiff;
using namespace latdiff::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "latdiff_test_XXXXXX").string();
    REQUIRE(mkdtemp(tmpl.data()) != nullptr);
    path = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string write(const std::string& name, const std::string& content) const {
    std::ofstream(path / name) << content;
    return (path / name).string();
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int invoke(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "latdiff");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int rc = run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return rc;
}

const char* kSquare = "0 0\n1 0\n2 0\n0 1\n1 1\n2 1\n0 2\n1 2\n2 2\n";

}  // namespace

TEST_CASE("number rendering") {
  CHECK(num(0.1) == "0.10000000000000001");
  CHECK(num(-0.0) == "0");
  CHECK(num(1.0 / 0.0) == "inf");
  CHECK(num(-1.0 / 0.0) == "-inf");
  CHECK(num(3.0) == "3");
}

TEST_CASE("scenario validation") {
  TempDir t;
  t.write("sq.txt", kSquare);
  auto parse = [&](const std::string& text) { return parse_scenario(text, t.path.string(), "s.json"); };
  auto message = [&](const std::string& text) {
    try {
      parse(text);
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string();
  };

  Scenario s = parse(R"({"wavenumber": {"re": 0.6, "im": 0.1}, "obstacle": "sq.txt", "incidence": [1, "inf", {"angle": 1.0}],
                          "observations": {"count": 10, "range": [0, 3.14]}, "seed": 4})");
  CHECK(s.obstacle_path == (t.path / "sq.txt").string());
  REQUIRE(s.incidences.size() == 3);
  CHECK(s.incidences[1].same_ray(Direction(1, 0)));
  CHECK(s.observations.directions().size() == 10);
  CHECK(s.seed == 4);

  CHECK(message(R"({"obstacle": "sq.txt"})").find("'wavenumber'") != std::string::npos);
  CHECK(message(R"({"wavenumber": {"re": 0.6, "im": 0.0}})").find("'wavenumber'") != std::string::npos);
  CHECK(message(R"({"wavenumber": {"re": 0.6, "im": 0.1}, "obstacle": "missing.txt"})").find("'obstacle'") !=
        std::string::npos);
  CHECK(message(R"({"wavenumber": {"re": 0.6, "im": 0.1}, "observations": {"count": 0}})")
            .find("'observations.count'") != std::string::npos);
  CHECK(message(R"({"wavenumber": {"re": 0.6, "im": 0.1}, "colour": 1})").find("'colour'") != std::string::npos);
  CHECK(message(R"({"wavenumber": {"re": 0.6, "im": 0.1}, "incidence": "up"})").find("'incidence'") !=
        std::string::npos);
  CHECK(message("{\"wavenumber\": \n {\"re\": 0.6,, }}").find("line 2") != std::string::npos);
}

TEST_CASE("directivity CSV round trip") {
  std::vector<DirectivityRow> rows = {{Direction(1, 0), {0.5, -1.25}, {1e-20, 3.0}, false},
                                      {Direction(-0.3, 0.7), {-2.0, 0.1}, {0.0, 0.0}, true}};
  std::string text = directivity_csv(rows);
  CHECK(text.rfind("beta,obs_m,obs_n,S_re,S_im,Smod_re,Smod_im,flag\n", 0) == 0);
  auto back = parse_directivity_csv(text, "t");
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].observation.m() == rows[i].observation.m());
    CHECK(back[i].observation.n() == rows[i].observation.n());
    CHECK(back[i].S == rows[i].S);
    CHECK(back[i].smod == rows[i].smod);
    CHECK(back[i].flagged == rows[i].flagged);
  }
  CHECK(directivity_csv(back) == text);
  CHECK_THROWS_AS(parse_directivity_csv("beta,obs_m\n", "t"), InputError);
  CHECK_THROWS_AS(parse_directivity_csv(text + "1,2,3\n", "t"), InputError);
}

TEST_CASE("rank CSV layout") {
  std::string text = rank_csv({{1, 1, {2.0}}, {2, 1, {2.0, 1e-9}}});
  CHECK(text == "M,rank,sigma_1,sigma_2\n1,1,2,\n2,1,2,1.0000000000000001e-09\n");
}

TEST_CASE("embed and rank commands") {
  TempDir t;
  t.write("sq.txt", kSquare);
  std::string scen = t.write("embed.json", R"({
    "command": "embed", "wavenumber": {"re": 0.6, "im": 0.01}, "obstacle": "sq.txt", "incidence": 1.0,
    "observations": {"count": 40}, "rank": {"M_min": 6, "M_max": 10}, "outputs": "out"})");
  std::string text;
  REQUIRE(invoke({"run", "--scenario", scen}, &text) == 0);
  CHECK(text.find("max_rel_dev=") != std::string::npos);
  for (const char* f : {"direct.csv", "embedded.csv", "coefficients.csv", "embed_summary.txt", "embed.svg"})
    CHECK(fs::exists(t.path / "out" / f));
  auto direct = load_directivity_csv((t.path / "out" / "direct.csv").string());
  auto embedded = load_directivity_csv((t.path / "out" / "embedded.csv").string());
  REQUIRE(direct.size() == 40);
  REQUIRE(embedded.size() == 40);
  for (std::size_t i = 0; i < 40; ++i)
    if (!embedded[i].flagged) CHECK(std::abs(direct[i].S - embedded[i].S) < 1e-6 * std::abs(direct[i].S));

  REQUIRE(invoke({"rank", "--scenario", scen, "--out", (t.path / "r").string()}, &text) == 0);
  CHECK(text.find("rank=8") != std::string::npos);
  std::istringstream rank(slurp(t.path / "r" / "rank.csv"));
  std::string line;
  std::getline(rank, line);
  CHECK(line == "M,rank,sigma_1,sigma_2,sigma_3,sigma_4,sigma_5,sigma_6,sigma_7,sigma_8,sigma_9,sigma_10");
  int M = 6;
  while (std::getline(rank, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    CHECK(std::stoi(cells[0]) == M);
    CHECK(std::count(line.begin(), line.end(), ',') == 11);
    for (std::size_t i = 2; i < cells.size(); ++i) CHECK(cells[i].empty() == (i >= static_cast<std::size_t>(2 + M)));
    for (int i = 3; i < 2 + M; ++i) CHECK(std::stod(cells[i]) <= std::stod(cells[i - 1]));
    ++M;
  }
  CHECK(M == 11);

  REQUIRE(invoke({"rank", "--scenario", scen, "--out", (t.path / "r2").string(), "--threshold", "100"}, &text) == 0);
  CHECK(text.find("rank=0") != std::string::npos);
}

TEST_CASE("error exits") {
  TempDir t;
  t.write("empty.txt", "# nothing\n");
  t.write("sq.txt", kSquare);
  std::string text;
  std::string empty = t.write("e.json", R"({"wavenumber": {"re": 0.6, "im": 0.1}, "obstacle": "empty.txt", "incidence": 1})");
  CHECK(invoke({"solve", "--scenario", empty}, &text) == 1);
  CHECK(text.find("no sites") != std::string::npos);

  std::string ok = t.write("ok.json", R"({"wavenumber": {"re": 0.6, "im": 0.1}, "obstacle": "sq.txt", "incidence": 1})");
  CHECK(invoke({"solve", "--scenario", ok, "--out", "/dev/null/forbidden"}, &text) == 1);
  CHECK(invoke({"solve", "--scenario", (t.path / "missing.json").string()}) == 1);
  CHECK(invoke({"solve"}) == 1);
  std::string short_basis = t.write("sb.json", R"({"wavenumber": {"re": 0.6, "im": 0.1}, "obstacle": "sq.txt", "incidence": 1,
      "basis": [0.5, 1.5, 3.0]})");
  CHECK(invoke({"embed", "--scenario", short_basis, "--out", (t.path / "o").string()}, &text) == 1);
  std::string bad = t.write("b.json", R"({"wavenumber": {"re": 0.6, "im": 0.1}, "obstacle": "sq.txt", "incidence": 1, "tolerance": 1e-30})");
  CHECK(invoke({"embed", "--scenario", bad, "--out", (t.path / "o").string()}, &text) == 2);
  CHECK(invoke({"run", "--scenario", ok}, &text) == 1);
}

TEST_CASE("outputs are byte identical across runs and thread counts") {
  TempDir t;
  t.write("sq.txt", kSquare);
  std::string scen = t.write("d.json", R"({"wavenumber": {"re": 0.6, "im": 0.01}, "obstacle": "sq.txt",
      "incidence": [1, -2.5], "observations": {"count": 30}, "field_box": [-4, 6, -4, 6]})");
  for (const char* cmd : {"directivity", "field", "solve"}) {
    CAPTURE(cmd);
    REQUIRE(invoke({cmd, "--scenario", scen, "--out", (t.path / "a").string(), "--threads", "1", "--no-svg"}) == 0);
    REQUIRE(invoke({cmd, "--scenario", scen, "--out", (t.path / "b").string(), "--threads", "1", "--no-svg"}) == 0);
    REQUIRE(invoke({cmd, "--scenario", scen, "--out", (t.path / "c").string(), "--threads", "4", "--no-svg"}) == 0);
  }
  int files = 0;
  for (const auto& e : fs::directory_iterator(t.path / "a")) {
    if (e.path().extension() != ".csv") continue;
    ++files;
    std::string a = slurp(e.path());
    CHECK(a == slurp(t.path / "b" / e.path().filename()));
    CHECK(a == slurp(t.path / "c" / e.path().filename()));
  }
  CHECK(files == 4);
  CHECK_FALSE(fs::exists(t.path / "a" / "directivity_0.svg"));
}

TEST_CASE("tabulated half-plane embedding through the command line") {
  TempDir t;
  std::string seg;
  for (int m = 0; m < 300; ++m) seg += std::to_string(m) + " 0\n";
  t.write("seg.txt", seg);
  const char* obs = R"([{"m": -1, "n": 1}, {"m": -3, "n": 1}, {"m": -1, "n": -0.5}, {"m": -1, "n": 1.7}])";
  t.write("aux.json", std::string(R"({"wavenumber": {"re": 0.6, "im": 0.1}, "obstacle": "seg.txt",
      "incidence": {"m": -1, "n": 1.7}, "observations": )") + obs + R"(, "outputs": "aux"})");
  t.write("dir.json", std::string(R"({"wavenumber": {"re": 0.6, "im": 0.1}, "obstacle": "seg.txt",
      "incidence": {"m": -3, "n": 1}, "observations": )") + obs + R"(, "outputs": "direct"})");
  REQUIRE(invoke({"directivity", "--scenario", (t.path / "aux.json").string()}) == 0);
  REQUIRE(invoke({"directivity", "--scenario", (t.path / "dir.json").string()}) == 0);
  t.write("hp.json", std::string(R"({"wavenumber": {"re": 0.6, "im": 0.1}, "incidence": {"m": -3, "n": 1},
      "observations": )") + obs + R"(, "outputs": "hp",
      "canonical": {"formula": "halfplane", "aux1": "aux/directivity.csv", "beta1": {"m": -1, "n": 1.7}}})");
  REQUIRE(invoke({"canonical", "--scenario", (t.path / "hp.json").string()}) == 0);
  auto direct = load_directivity_csv((t.path / "direct" / "directivity.csv").string());
  auto formula = load_directivity_csv((t.path / "hp" / "canonical.csv").string());
  REQUIRE(direct.size() == formula.size());
  for (std::size_t i = 0; i < direct.size(); ++i) {
    CHECK_FALSE(formula[i].flagged);
    CHECK(std::abs(formula[i].S - direct[i].S) < 1e-8 * std::abs(direct[i].S));
    CHECK(std::abs(formula[i].smod - direct[i].smod) <= 1e-8 * std::abs(direct[i].smod));
  }
}

TEST_CASE("canonical constants and validate") {
  TempDir t;
  t.write("sq.txt", kSquare);
  std::string c = t.write("c.json", R"({"wavenumber": {"re": 0.6, "im": 0.1}, "canonical": {"formula": "constants"}})");
  std::string text;
  CHECK(invoke({"canonical", "--scenario", c, "--out", (t.path / "c").string()}, &text) == 0);
  CHECK(fs::exists(t.path / "c" / "constants.csv"));
  std::string v = t.write("v.json", R"({"wavenumber": {"re": 0.6, "im": 0.01}, "obstacle": "sq.txt", "incidence": 1,
      "basis": [0.2, 0.5, 0.9, 1.4, 2.1, 3.3, 5.0, 9.0], "green": {"radius": 8}, "pairs": 4, "seed": 3})");
  CHECK(invoke({"validate", "--scenario", v, "--out", (t.path / "v").string()}, &text) == 0);
  CHECK(text.find("FAIL") == std::string::npos);
  CHECK(slurp(t.path / "v" / "validate.csv").rfind("check,value,limit,status\n", 0) == 0);
}
