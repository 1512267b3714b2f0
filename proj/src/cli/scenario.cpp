#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "latdiff/embedding.hpp"
#include "latdiff/errors.hpp"

namespace latdiff::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& label, const std::string& field, const std::string& what) {
  throw InputError(label + ": field '" + field + "': " + what);
}

double number(const json& j, const std::string& label, const std::string& field) {
  if (!j.is_number()) fail(label, field, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& label, const std::string& field) {
  if (!j.is_number_integer()) fail(label, field, "expected an integer");
  return j.get<int>();
}

Direction direction(const json& j, const std::string& label, const std::string& field) {
  try {
    if (j.is_number()) return Direction::from_beta(j.get<double>());
    if (j.is_string()) {
      auto s = j.get<std::string>();
      if (s == "inf" || s == "+inf") return Direction::from_beta(std::numeric_limits<double>::infinity());
      if (s == "-inf") return Direction::from_beta(-std::numeric_limits<double>::infinity());
      fail(label, field, "unknown direction '" + s + "'");
    }
    if (j.is_object()) {
      if (j.contains("angle")) return Direction::from_angle(number(j["angle"], label, field + ".angle"));
      if (j.contains("beta")) return direction(j["beta"], label, field + ".beta");
      if (j.contains("m") && j.contains("n"))
        return Direction(number(j["m"], label, field + ".m"), number(j["n"], label, field + ".n"));
    }
  } catch (const InputError& e) {
    if (std::string(e.what()).rfind(label, 0) == 0) throw;
    fail(label, field, e.what());
  }
  fail(label, field, "expected a beta value, \"inf\", {\"m\",\"n\"}, {\"angle\"} or {\"beta\"}");
}

std::vector<Direction> directions(const json& j, const std::string& label, const std::string& field) {
  std::vector<Direction> out;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(direction(j[i], label, field + "[" + std::to_string(i) + "]"));
  } else {
    out.push_back(direction(j, label, field));
  }
  return out;
}

std::string resolve(const std::string& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative() && !base.empty()) path = fs::path(base) / path;
  return path.lexically_normal().string();
}

std::string existing_file(const json& j, const std::string& base, const std::string& label, const std::string& field) {
  if (!j.is_string()) fail(label, field, "expected a path");
  std::string p = resolve(base, j.get<std::string>());
  if (!fs::is_regular_file(p)) fail(label, field, "file not found: " + p);
  return p;
}

}  // namespace

std::vector<Direction> ObservationSpec::directions() const {
  if (!explicit_directions.empty()) return normalize_observations(explicit_directions);
  return normalize_observations(angle_grid(count, from, to));
}

Scenario parse_scenario(const std::string& text, const std::string& base_dir, const std::string& label) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(label + ": " + e.what());
  }
  if (!j.is_object()) throw InputError(label + ": scenario must be a JSON object");

  static const std::vector<std::string> known = {
      "command", "wavenumber", "obstacle", "incidence", "observations", "basis", "outputs", "seed", "threads",
      "allow_count_mismatch", "tolerance", "green", "sites", "field_box", "pairs", "rank", "canonical"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) fail(label, it.key(), "unknown field");

  Scenario s;
  s.path = label;
  if (j.contains("command")) {
    if (!j["command"].is_string()) fail(label, "command", "expected a string");
    s.command = j["command"].get<std::string>();
  }

  if (!j.contains("wavenumber")) fail(label, "wavenumber", "missing");
  {
    const json& w = j["wavenumber"];
    if (!w.is_object() || !w.contains("re") || !w.contains("im")) fail(label, "wavenumber", "expected {\"re\", \"im\"}");
    s.wavenumber = {number(w["re"], label, "wavenumber.re"), number(w["im"], label, "wavenumber.im")};
    try {
      Wavenumber check(s.wavenumber);
    } catch (const InputError& e) {
      fail(label, "wavenumber", e.what());
    }
  }

  if (j.contains("obstacle")) s.obstacle_path = existing_file(j["obstacle"], base_dir, label, "obstacle");
  if (j.contains("incidence")) s.incidences = directions(j["incidence"], label, "incidence");
  if (j.contains("basis")) s.basis = directions(j["basis"], label, "basis");

  if (j.contains("observations")) {
    const json& o = j["observations"];
    if (o.is_array()) {
      s.observations.explicit_directions = directions(o, label, "observations");
    } else if (o.is_object() && o.contains("count")) {
      s.observations.count = integer(o["count"], label, "observations.count");
      if (s.observations.count < 1) fail(label, "observations.count", "must be at least 1");
      s.observations.from = 0.0;
      s.observations.to = 2.0 * std::numbers::pi;
      if (o.contains("range")) {
        const json& r = o["range"];
        if (!r.is_array() || r.size() != 2) fail(label, "observations.range", "expected [from, to]");
        s.observations.from = number(r[0], label, "observations.range[0]");
        s.observations.to = number(r[1], label, "observations.range[1]");
        if (!(s.observations.to > s.observations.from)) fail(label, "observations.range", "needs from < to");
      }
    } else if (o.is_object() && o.contains("betas")) {
      s.observations.explicit_directions = directions(o["betas"], label, "observations.betas");
    } else {
      fail(label, "observations", "expected a list, {\"count\", \"range\"} or {\"betas\"}");
    }
    if (s.observations.count < 1 && s.observations.explicit_directions.empty())
      fail(label, "observations", "observation count must be at least 1");
  }

  if (j.contains("outputs")) {
    if (!j["outputs"].is_string()) fail(label, "outputs", "expected a path");
    s.outputs = resolve(base_dir, j["outputs"].get<std::string>());
  } else {
    s.outputs = resolve(base_dir, "out");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail(label, "seed", "expected a non-negative integer");
    s.seed = j["seed"].get<unsigned long long>();
  }
  if (j.contains("threads")) {
    s.threads = integer(j["threads"], label, "threads");
    if (s.threads < 1) fail(label, "threads", "must be at least 1");
  }
  if (j.contains("allow_count_mismatch")) {
    if (!j["allow_count_mismatch"].is_boolean()) fail(label, "allow_count_mismatch", "expected true or false");
    s.allow_count_mismatch = j["allow_count_mismatch"].get<bool>();
  }
  if (j.contains("tolerance")) {
    s.tolerance = number(j["tolerance"], label, "tolerance");
    if (!(s.tolerance > 0)) fail(label, "tolerance", "must be positive");
  }
  if (j.contains("green")) {
    const json& g = j["green"];
    if (!g.is_object() || !g.contains("radius")) fail(label, "green", "expected {\"radius\"}");
    s.green_radius = integer(g["radius"], label, "green.radius");
    if (s.green_radius < 0 || s.green_radius > 500) fail(label, "green.radius", "must lie in [0, 500]");
  }
  if (j.contains("sites")) {
    const json& a = j["sites"];
    if (!a.is_array()) fail(label, "sites", "expected a list of [m, n]");
    for (std::size_t i = 0; i < a.size(); ++i) {
      std::string f = "sites[" + std::to_string(i) + "]";
      if (!a[i].is_array() || a[i].size() != 2) fail(label, f, "expected [m, n]");
      s.sites.push_back({integer(a[i][0], label, f), integer(a[i][1], label, f)});
    }
  }
  if (j.contains("field_box")) {
    const json& b = j["field_box"];
    if (!b.is_array() || b.size() != 4) fail(label, "field_box", "expected [m0, m1, n0, n1]");
    std::array<int, 4> box{};
    for (int i = 0; i < 4; ++i) box[i] = integer(b[i], label, "field_box");
    if (box[0] > box[1] || box[2] > box[3]) fail(label, "field_box", "empty box");
    s.field_box = box;
  }
  if (j.contains("pairs")) {
    s.pairs = integer(j["pairs"], label, "pairs");
    if (s.pairs < 1) fail(label, "pairs", "must be at least 1");
  }
  if (j.contains("rank")) {
    const json& r = j["rank"];
    if (!r.is_object()) fail(label, "rank", "expected an object");
    if (r.contains("M_min")) s.rank.m_min = integer(r["M_min"], label, "rank.M_min");
    if (r.contains("M_max")) s.rank.m_max = integer(r["M_max"], label, "rank.M_max");
    if (r.contains("M")) s.rank.m_min = s.rank.m_max = integer(r["M"], label, "rank.M");
    if (r.contains("threshold")) s.rank.threshold = number(r["threshold"], label, "rank.threshold");
    if (r.contains("probes")) s.rank.probes = directions(r["probes"], label, "rank.probes");
    if (s.rank.m_min < 1 || s.rank.m_max < s.rank.m_min) fail(label, "rank", "needs 1 <= M_min <= M_max");
    if (!(s.rank.threshold > 0)) fail(label, "rank.threshold", "must be positive");
    if (!s.rank.probes.empty() && static_cast<int>(s.rank.probes.size()) < s.rank.m_max)
      fail(label, "rank.probes", "needs at least M_max probes");
  }
  if (j.contains("canonical")) {
    const json& c = j["canonical"];
    if (!c.is_object() || !c.contains("formula") || !c["formula"].is_string())
      fail(label, "canonical", "expected {\"formula\", ...}");
    s.canonical.formula = c["formula"].get<std::string>();
    if (c.contains("aux1")) s.canonical.aux1 = existing_file(c["aux1"], base_dir, label, "canonical.aux1");
    if (c.contains("aux2")) s.canonical.aux2 = existing_file(c["aux2"], base_dir, label, "canonical.aux2");
    if (c.contains("beta1")) s.canonical.beta1 = direction(c["beta1"], label, "canonical.beta1");
    if (c.contains("beta2")) s.canonical.beta2 = direction(c["beta2"], label, "canonical.beta2");
    if (c.contains("edge_length")) {
      s.canonical.edge_length = integer(c["edge_length"], label, "canonical.edge_length");
      if (s.canonical.edge_length < 1) fail(label, "canonical.edge_length", "must be positive");
    }
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), fs::path(path).parent_path().string(), path);
}

}  // namespace latdiff::cli
