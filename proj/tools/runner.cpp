#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dk/bernstein.hpp"
#include "dk/dynamics.hpp"
#include "dk/io.hpp"
#include "dk/parallel.hpp"
#include "dk/rng.hpp"
#include "dk/sampling.hpp"
#include "dk/stochastic_lab.hpp"

namespace dk::cli {

using io::ConfigError;
using io::json;

// ------------------------------------------------------------ line locator

namespace {

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

struct Frame {
  bool object;
  std::string key;
  std::size_t index = 0;
  bool expect_key = true;
};

std::string frame_pointer(const std::vector<Frame>& stack) {
  std::string p;
  for (const auto& f : stack) p += "/" + (f.object ? escape_token(f.key) : std::to_string(f.index));
  return p;
}

}  // namespace

std::size_t locate_line(std::string_view text, std::string_view pointer) {
  std::map<std::string, std::size_t> lines;
  std::vector<Frame> stack;
  std::size_t line = 1;
  bool have_root = false;
  auto record = [&] {
    const std::string p = frame_pointer(stack);
    lines.emplace(p, line);
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') continue;
    if (c == '"') {
      std::string s;
      std::size_t j = i + 1;
      for (; j < text.size() && text[j] != '"'; ++j) {
        if (text[j] == '\\' && j + 1 < text.size()) ++j;
        if (text[j] == '\n') ++line;
        s += text[j];
      }
      i = j;
      if (!stack.empty() && stack.back().object && stack.back().expect_key) {
        stack.back().key = s;
        stack.back().expect_key = false;
        record();
      } else if (stack.empty()) {
        have_root = true;
      } else {
        record();
      }
      continue;
    }
    if (c == '{' || c == '[') {
      if (stack.empty()) {
        lines.emplace("", line);
        have_root = true;
      } else if (!stack.back().object) {
        record();
      }
      stack.push_back({c == '{', "", 0, true});
      continue;
    }
    if (c == '}' || c == ']') {
      if (!stack.empty()) stack.pop_back();
      continue;
    }
    if (c == ',') {
      if (!stack.empty()) {
        if (stack.back().object) {
          stack.back().expect_key = true;
        } else {
          ++stack.back().index;
        }
      }
      continue;
    }
    if (c == ':') continue;
    // Scalar literal.
    if (!stack.empty() && !stack.back().object) record();
    while (i + 1 < text.size() && std::string_view(",]}\n \t\r").find(text[i + 1]) == std::string_view::npos) ++i;
  }
  if (!have_root) return 0;
  std::string p(pointer);
  while (true) {
    auto it = lines.find(p);
    if (it != lines.end()) return it->second;
    if (p.empty()) return 1;
    p = p.substr(0, p.rfind('/'));
  }
}

// ------------------------------------------------------------------ helpers

namespace {

struct Outputs {
  std::filesystem::path dir;
  std::vector<std::string> files;
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(Outputs& outputs, const std::string& name, const std::vector<std::string>& header)
      : stream_(outputs.dir / name, std::ios::binary) {
    if (!stream_) throw std::runtime_error("cannot write " + (outputs.dir / name).string());
    outputs.files.push_back(name);
    row_strings(header);
  }
  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) stream_ << (i ? "," : "") << cells[i];
    stream_ << '\n';
  }
  template <class... Ts>
  void row(const Ts&... cells) {
    std::vector<std::string> out;
    (out.push_back(cell(cells)), ...);
    row_strings(out);
  }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(const std::string& s) { return s; }
  template <class I, class = std::enable_if_t<std::is_integral_v<I>>>
  static std::string cell(I v) {
    return std::to_string(v);
  }
  std::ofstream stream_;
};

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Experiment {
  json config;  // resolved config, echoed into results.json
  Options options;
  Outputs outputs;
  std::ostream* out;
};

struct Outcome {
  json report;
  bool pass = true;
  std::string summary;
};

double positive_field(const json& j, const std::string& key, const std::string& ptr) {
  const double v = io::number_field(j, key, ptr);
  if (!(v > 0.0)) throw ConfigError(ptr + "/" + key, "must be > 0");
  return v;
}

double positive_field(const json& j, const std::string& key, const std::string& ptr, double fallback) {
  const double v = io::number_field(j, key, ptr, fallback);
  if (!(v > 0.0)) throw ConfigError(ptr + "/" + key, "must be > 0");
  return v;
}

long long count_field(const json& j, const std::string& key, const std::string& ptr, long long fallback,
                      long long min = 1) {
  long long v = fallback;
  if (j.contains(key)) v = io::integer(j.at(key), ptr + "/" + key);
  if (v < min) throw ConfigError(ptr + "/" + key, "must be >= " + std::to_string(min));
  return v;
}

int dimension_field(const json& j, const std::string& ptr) {
  const long long d = io::integer(io::field(j, "dimension", ptr), ptr + "/dimension");
  if (d < 1 || d > 8) throw ConfigError(ptr + "/dimension", "dimension must be in [1, 8]");
  return static_cast<int>(d);
}

/// Parses "sim", applies the seed override and fills defaults into the echo.
SimConfig parse_sim(Experiment& ex) {
  json& root = ex.config;
  const json& j = io::field(root, "sim", "");
  const std::string ptr = "/sim";
  SimConfig c;
  c.dimension = dimension_field(j, ptr);
  c.alpha = positive_field(j, "alpha", ptr);
  c.initial = io::measure_from_json(io::field(j, "initial", ptr), ptr + "/initial");
  if (c.initial.dimension() != c.dimension)
    throw ConfigError(ptr + "/initial/dimension", "initial measure dimension differs from sim dimension");
  c.drift = j.contains("drift") ? io::functional_from_json(j.at("drift"), ptr + "/drift", c.dimension)
                                : make_zero(c.dimension);
  c.t_final = positive_field(j, "t_final", ptr);
  c.dt = positive_field(j, "dt", ptr, c.t_final / 1000.0);
  if (!(c.dt < c.t_final)) throw ConfigError(ptr + "/dt", "dt must be smaller than t_final");
  c.n_paths = static_cast<std::size_t>(count_field(j, "n_paths", ptr, 1));
  c.admissibility_tol = positive_field(j, "admissibility_tol", ptr, 1e-9);
  if (c.admissibility_tol > 1e-3) throw ConfigError(ptr + "/admissibility_tol", "must be <= 1e-3");
  if (ex.options.seed) {
    c.master_seed = *ex.options.seed;
  } else {
    const json& s = io::field(j, "master_seed", ptr);
    if (!s.is_number_unsigned()) throw ConfigError(ptr + "/master_seed", "expected a non-negative integer");
    c.master_seed = s.get<std::uint64_t>();
  }
  try {
    validate(c);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(ptr + "/initial", e.what());
  }
  json& echo = root["sim"];
  echo["master_seed"] = c.master_seed;
  echo["dt"] = c.dt;
  echo["admissibility_tol"] = c.admissibility_tol;
  echo["n_paths"] = c.n_paths;
  if (!echo.contains("drift")) echo["drift"] = {{"family", "zero"}};
  return c;
}

MartingaleThresholds parse_thresholds(Experiment& ex) {
  MartingaleThresholds t;
  json& root = ex.config;
  if (root.contains("thresholds")) {
    const json& j = root.at("thresholds");
    t.z_max = positive_field(j, "z_max", "/thresholds", t.z_max);
    t.qv_rel_tol = positive_field(j, "qv_rel_tol", "/thresholds", t.qv_rel_tol);
    t.qv_abs_tol = positive_field(j, "qv_abs_tol", "/thresholds", t.qv_abs_tol);
  }
  root["thresholds"] = {{"z_max", t.z_max}, {"qv_rel_tol", t.qv_rel_tol}, {"qv_abs_tol", t.qv_abs_tol}};
  return t;
}

std::vector<AtomicMeasure> parse_measures(const json& j, const std::string& ptr, int d, double a, double b,
                                          double max_mass) {
  std::vector<AtomicMeasure> out;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      out.push_back(io::measure_from_json(j[i], ptr + "/" + std::to_string(i)));
      if (out.back().dimension() != d) throw ConfigError(ptr + "/" + std::to_string(i), "dimension mismatch");
    }
    return out;
  }
  const auto count = static_cast<std::size_t>(count_field(j, "count", ptr, 20));
  const auto atoms = static_cast<std::size_t>(count_field(j, "atoms", ptr, 5));
  const double mass = positive_field(j, "mass", ptr, max_mass);
  if (!j.contains("seed") || !j.at("seed").is_number_unsigned())
    throw ConfigError(ptr + "/seed", "expected a non-negative integer seed");
  rng::Stream s(j.at("seed").get<std::uint64_t>(), 1);
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_measure(s, d, atoms, a, b, mass));
  return out;
}

// -------------------------------------------------------------- commands

Outcome cmd_admissibility(Experiment& ex) {
  const json& root = ex.config;
  const AtomicMeasure nu = io::measure_from_json(io::field(root, "measure", ""), "/measure");
  const double alpha = positive_field(root, "alpha", "");
  const double tol = positive_field(root, "tol", "", 1e-9);
  if (tol > 1e-3) throw ConfigError("/tol", "must be <= 1e-3");
  ex.config["tol"] = tol;
  const auto r = check_admissibility(nu, alpha, tol);
  Outcome o;
  o.report = {{"test", "admissibility"},
              {"admissible", r.admissible},
              {"n", r.n},
              {"reason", to_string(r.reason)},
              {"mass", r.mass},
              {"mass_times_alpha", r.mass_times_alpha}};
  o.summary = r.admissible ? "admissible: n = " + std::to_string(r.n) : "not admissible: " + to_string(r.reason);
  return o;
}

Outcome cmd_simulate(Experiment& ex) {
  const SimConfig c = parse_sim(ex);
  CsvWriter csv(ex.outputs, "paths.csv", {"path", "t", "particle", "coord", "position"});
  bool mass_conserved = true;
  std::size_t steps = 0;
  std::size_t n = 0;
  double mass = 0.0;
  constexpr std::size_t kChunk = 64;
  for (std::size_t start = 0; start < c.n_paths; start += kChunk) {
    const std::size_t count = std::min(kChunk, c.n_paths - start);
    const auto paths =
        parallel_map<MeasurePath>(count, ex.options.threads, [&](std::size_t i) { return simulate_path(c, start + i); });
    for (const auto& p : paths) {
      steps = p.steps();
      n = p.n;
      mass = p.mass;
      const double m0 = total_mass(empirical_measure(p, 0));
      for (std::size_t k = 0; k <= p.steps(); ++k) {
        if (total_mass(empirical_measure(p, k)) != m0) mass_conserved = false;
        for (std::size_t i = 0; i < p.n; ++i) {
          const auto x = p.position(k, i);
          for (std::size_t q = 0; q < x.size(); ++q) csv.row(p.path_index, p.times[k], i, q, x[q]);
        }
      }
    }
  }
  json sidecar = {{"rng_scheme", rng::kScheme},
                  {"columns", {"path", "t", "particle", "coord", "position"}},
                  {"config", ex.config}};
  std::ofstream(ex.outputs.dir / "paths.json", std::ios::binary) << sidecar.dump(2) << '\n';
  ex.outputs.files.push_back("paths.json");
  Outcome o;
  o.pass = mass_conserved;
  o.report = {{"test", "simulate"}, {"paths", c.n_paths},       {"steps", steps},
              {"particles", n},     {"mass", mass},             {"mass_bit_identical", mass_conserved},
              {"pass", mass_conserved}};
  o.summary = std::to_string(c.n_paths) + " paths written; mass conserved: " + (mass_conserved ? "yes" : "no");
  return o;
}

Outcome cmd_verify_martingale(Experiment& ex) {
  const SimConfig c = parse_sim(ex);
  const MartingaleThresholds thr = parse_thresholds(ex);
  const json& root = ex.config;
  const bool use_phi = root.contains("phi");
  if (use_phi == root.contains("G")) throw ConfigError("", "exactly one of \"phi\" or \"G\" is required");
  std::optional<SmoothFunction> phi;
  FunctionalPtr G;
  if (use_phi) {
    phi = io::function_from_json(root.at("phi"), "/phi", c.dimension);
  } else {
    G = io::functional_from_json(root.at("G"), "/G", c.dimension);
  }
  const double t = io::number_field(root, "time", "", c.t_final);
  if (!(t > 0.0 && t <= c.t_final)) throw ConfigError("/time", "time must be in (0, t_final]");
  ex.config["time"] = t;

  const auto samples = parallel_map<MartingaleSample>(c.n_paths, ex.options.threads, [&](std::size_t i) {
    const MeasurePath path = simulate_path(c, i);
    const MartingaleSeries s =
        use_phi ? build_M_phi(path, *phi, c.drift.get(), c.alpha) : build_M_G(path, *G, c.drift.get(), c.alpha);
    return sample_at(s, time_index(s.times, t));
  });
  if (samples.size() < 30) throw ConfigError("/sim/n_paths", "martingale test needs at least 30 paths");
  CsvWriter csv(ex.outputs, "martingale.csv", {"path", "value", "predicted_qv", "realized_qv"});
  for (std::size_t i = 0; i < samples.size(); ++i)
    csv.row(i, samples[i].value, samples[i].predicted_qv, samples[i].realized_qv);
  const auto r = martingale_test(samples, thr);
  Outcome o;
  o.pass = r.pass;
  o.report = {{"test", "martingale"},
              {"params", {{"process", use_phi ? "M_phi" : "M_G"}, {"time", t}, {"paths", r.paths}}},
              {"mean", r.mean},
              {"se", r.se},
              {"z", std::isfinite(r.z) ? json(r.z) : json(r.z > 0 ? "inf" : "-inf")},
              {"realized_qv", r.realized_qv},
              {"predicted_qv", r.predicted_qv},
              {"qv_error", r.qv_error},
              {"qv_error_kind", r.qv_relative ? "relative" : "absolute"},
              {"pass", r.pass}};
  char buf[160];
  std::snprintf(buf, sizeof(buf), "z = %.3f, qv error = %.4f (%s)", r.z, r.qv_error,
                r.qv_relative ? "relative" : "absolute");
  o.summary = buf;
  return o;
}

Outcome cmd_ito_check(Experiment& ex) {
  const SimConfig c = parse_sim(ex);
  const json& root = ex.config;
  const FunctionalPtr G = io::functional_from_json(io::field(root, "G", ""), "/G", c.dimension);
  if (G->family() != "cylindrical") throw ConfigError("/G/family", "ito-check needs a cylindrical G");
  const auto count = static_cast<std::size_t>(count_field(root, "samples", "", 100));
  const double tol = positive_field(root, "tolerance", "", 1e-10);
  ex.config["samples"] = count;
  ex.config["tolerance"] = tol;

  const std::size_t K = step_count(c.dt, c.t_final);
  rng::Stream s(c.master_seed, 2);
  std::vector<std::pair<std::size_t, std::size_t>> points;
  for (std::size_t q = 0; q < count; ++q) points.emplace_back(s.below(c.n_paths), s.below(K + 1));
  std::set<std::size_t> wanted;
  for (const auto& p : points) wanted.insert(p.first);
  const std::vector<std::size_t> ids(wanted.begin(), wanted.end());
  struct Pair {
    double measure_level = 0.0;
    double oracle = 0.0;
  };
  // Evaluate per path so that each path is simulated once.
  const auto per_path = parallel_map<std::vector<std::pair<std::size_t, Pair>>>(
      ids.size(), ex.options.threads, [&](std::size_t slot) {
        const MeasurePath path = simulate_path(c, ids[slot]);
        std::vector<std::pair<std::size_t, Pair>> out;
        for (std::size_t q = 0; q < points.size(); ++q) {
          if (points[q].first != ids[slot]) continue;
          const std::size_t k = points[q].second;
          Pair v;
          v.measure_level = functional_generator(empirical_measure(path, k), *G, c.drift.get(), c.alpha).drift();
          v.oracle = ito_drift_oracle(path, *G, c.drift.get(), c.alpha, k);
          out.emplace_back(q, v);
        }
        return out;
      });
  std::vector<Pair> values(points.size());
  for (const auto& group : per_path)
    for (const auto& [q, v] : group) values[q] = v;

  CsvWriter csv(ex.outputs, "ito.csv", {"path", "k", "measure_drift", "oracle_drift", "error"});
  double worst = 0.0;
  for (std::size_t q = 0; q < points.size(); ++q) {
    const double err = std::abs(values[q].measure_level - values[q].oracle) / (1.0 + std::abs(values[q].oracle));
    worst = std::max(worst, err);
    csv.row(points[q].first, points[q].second, values[q].measure_level, values[q].oracle, err);
  }
  Outcome o;
  o.pass = worst <= tol;
  o.report = {{"test", "ito"}, {"samples", count}, {"max_error", worst}, {"tolerance", tol}, {"pass", o.pass}};
  char buf[120];
  std::snprintf(buf, sizeof(buf), "max |drift - oracle| / (1 + |oracle|) = %.3e over %zu samples", worst, count);
  o.summary = buf;
  return o;
}

Outcome cmd_girsanov_compare(Experiment& ex) {
  const SimConfig base = parse_sim(ex);
  const MartingaleThresholds thr = parse_thresholds(ex);
  const json& root = ex.config;
  const FunctionalPtr G = io::functional_from_json(io::field(root, "G", ""), "/G", base.dimension);
  const SmoothFunction obs = io::function_from_json(io::field(root, "observable", ""), "/observable", base.dimension);
  SimConfig direct = base;
  direct.n_paths = static_cast<std::size_t>(count_field(root, "direct_paths", "", static_cast<long long>(base.n_paths)));
  direct.drift = base.drift->family() == "zero" ? G : make_sum(base.drift, G);
  if (root.contains("direct_seed")) {
    if (!root.at("direct_seed").is_number_unsigned())
      throw ConfigError("/direct_seed", "expected a non-negative integer");
    direct.master_seed = root.at("direct_seed").get<std::uint64_t>();
  } else {
    direct.master_seed = base.master_seed + 1;
  }
  ex.config["direct_paths"] = direct.n_paths;
  ex.config["direct_seed"] = direct.master_seed;

  const Observable phi = [&](const AtomicMeasure& mu) { return integrate(obs, mu); };
  const WeightedEnsemble weighted = make_weighted_ensemble(base, G, ex.options.threads);
  const WeightedEnsemble plain = make_weighted_ensemble(direct, nullptr, ex.options.threads);
  const Estimate rw = reweighted_expectation(phi, weighted);
  const Estimate dr = reweighted_expectation(phi, plain);
  const auto [mean_w, se_w] = mean_and_se(weighted.weights);
  const double z_diff = (rw.estimate - dr.estimate) / std::hypot(rw.se, dr.se);
  const double z_w = (mean_w - 1.0) / se_w;

  CsvWriter csv(ex.outputs, "girsanov.csv", {"path", "weight", "observable"});
  for (std::size_t i = 0; i < weighted.weights.size(); ++i)
    csv.row(i, weighted.weights[i], phi(weighted.final_measures[i]));

  Outcome o;
  o.pass = std::abs(z_diff) <= thr.z_max && std::abs(z_w) <= thr.z_max;
  o.report = {{"test", "girsanov"},
              {"reweighted", {{"estimate", rw.estimate}, {"se", rw.se}, {"self_normalized", rw.self_normalized}}},
              {"direct", {{"estimate", dr.estimate}, {"se", dr.se}}},
              {"mean_weight", mean_w},
              {"mean_weight_se", se_w},
              {"z", z_diff},
              {"z_mean_weight", z_w},
              {"pass", o.pass}};
  char buf[200];
  std::snprintf(buf, sizeof(buf), "reweighted %.6f +- %.6f, direct %.6f +- %.6f, z = %.3f, mean weight z = %.3f",
                rw.estimate, rw.se, dr.estimate, dr.se, z_diff, z_w);
  o.summary = buf;
  return o;
}

Outcome cmd_bernstein_convergence(Experiment& ex) {
  json& root = ex.config;
  const int d = dimension_field(root, "");
  if (d > kMaxBernsteinDimension) throw ConfigError("/dimension", "Bernstein experiments support d <= 2");
  const Vec box = io::vector(io::field(root, "box", ""), "/box");
  if (box.size() != 2 || !(box[0] < box[1])) throw ConfigError("/box", "expected [a, b] with a < b");
  const json& dj = io::field(root, "degrees", "");
  if (!dj.is_array() || dj.empty()) throw ConfigError("/degrees", "expected a nonempty array of degrees");
  std::vector<int> degrees;
  for (std::size_t i = 0; i < dj.size(); ++i) {
    const long long n = io::integer(dj[i], "/degrees/" + std::to_string(i));
    if (n < 1 || n > kMaxBernsteinDegree)
      throw ConfigError("/degrees/" + std::to_string(i), "degree must be in [1, 64]");
    degrees.push_back(static_cast<int>(n));
  }
  const FunctionalPtr F = io::functional_from_json(io::field(root, "functional", ""), "/functional", d);
  const auto measures = parse_measures(io::field(root, "measures", ""), "/measures", d, box[0], box[1], 1.0);
  std::vector<Vec> points;
  const json& pj = io::field(root, "points", "");
  if (pj.is_array()) {
    for (std::size_t i = 0; i < pj.size(); ++i) points.push_back(io::vector(pj[i], "/points/" + std::to_string(i)));
  } else {
    const auto per_axis = static_cast<std::size_t>(count_field(pj, "per_axis", "/points", 9, 2));
    for (std::size_t flat = 0; flat < static_cast<std::size_t>(std::pow(per_axis, d)); ++flat) {
      Vec x;
      std::size_t rest = flat;
      for (int k = 0; k < d; ++k) {
        x.push_back(box[0] + (box[1] - box[0]) * static_cast<double>(rest % per_axis) / (per_axis - 1));
        rest /= per_axis;
      }
      points.push_back(x);
    }
  }
  const Box cube = Box::cube(d, box[0], box[1]);
  for (std::size_t i = 0; i < points.size(); ++i)
    if (static_cast<int>(points[i].size()) != d || !cube.contains(points[i]))
      throw ConfigError("/points", "point " + std::to_string(i) + " is not inside the box");
  for (std::size_t i = 0; i < measures.size(); ++i)
    for (std::size_t a = 0; a < measures[i].size(); ++a)
      if (!cube.contains(measures[i].location(a)))
        throw ConfigError("/measures", "measure " + std::to_string(i) + " has an atom outside the box");

  const auto rows = convergence_table(F, cube, degrees, measures, points);
  double mass_err = 0.0;
  for (int n : degrees) {
    const BernsteinGrid grid(cube, n);
    for (const auto& mu : measures)
      mass_err = std::max(mass_err, std::abs(total_mass(discretize_measure(grid, mu)) - total_mass(mu)));
  }
  CsvWriter csv(ex.outputs, "bernstein.csv", {"n", "sup_err_F", "sup_err_F1", "sup_err_F2", "samples"});
  json table = json::array();
  for (const auto& r : rows) {
    csv.row(r.n, r.sup_err_F, r.sup_err_F1, r.sup_err_F2, r.samples);
    table.push_back({{"n", r.n}, {"sup_err_F", r.sup_err_F}, {"sup_err_F1", r.sup_err_F1}, {"sup_err_F2", r.sup_err_F2}});
  }
  const auto& first = rows.front();
  const auto& last = rows.back();
  const bool decreasing = rows.size() < 2 || (last.sup_err_F < first.sup_err_F && last.sup_err_F1 < first.sup_err_F1 &&
                                              last.sup_err_F2 < first.sup_err_F2);
  Outcome o;
  o.pass = decreasing && mass_err <= 1e-12;
  o.report = {{"test", "bernstein_convergence"},
              {"rows", table},
              {"measures", measures.size()},
              {"points", points.size()},
              {"max_mass_error", mass_err},
              {"errors_decrease", decreasing},
              {"pass", o.pass}};
  char buf[200];
  std::snprintf(buf, sizeof(buf), "n=%d: %.3e %.3e %.3e -> n=%d: %.3e %.3e %.3e", first.n, first.sup_err_F,
                first.sup_err_F1, first.sup_err_F2, last.n, last.sup_err_F, last.sup_err_F1, last.sup_err_F2);
  o.summary = buf;
  return o;
}

/// Least-squares slope of log(err) against log(eps).
double log_slope(const Vec& eps, const Vec& err) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double m = static_cast<double>(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double x = std::log(eps[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

Outcome cmd_derivative_check(Experiment& ex) {
  json& root = ex.config;
  const int d = dimension_field(root, "");
  const FunctionalPtr F = io::functional_from_json(io::field(root, "functional", ""), "/functional", d);
  const json& sj = io::field(root, "samples", "");
  const auto count = static_cast<std::size_t>(count_field(sj, "count", "/samples", 50));
  const auto atoms = static_cast<std::size_t>(count_field(sj, "atoms", "/samples", 4));
  const double half = positive_field(sj, "half_width", "/samples", 1.0);
  if (!sj.contains("seed") || !sj.at("seed").is_number_unsigned())
    throw ConfigError("/samples/seed", "expected a non-negative integer seed");
  Vec eps = {0.01, 0.005, 0.0025, 0.00125};
  if (root.contains("eps")) {
    eps = io::vector(root.at("eps"), "/eps");
    if (eps.size() < 2) throw ConfigError("/eps", "need at least two step sizes");
    for (double e : eps)
      if (!(e > 0.0)) throw ConfigError("/eps", "step sizes must be > 0");
  }
  const double min_slope = positive_field(root, "min_slope", "", 0.9);
  const double exact_tol = positive_field(root, "exact_tolerance", "", 1e-9);
  root["eps"] = eps;
  root["min_slope"] = min_slope;
  root["exact_tolerance"] = exact_tol;

  rng::Stream s(sj.at("seed").get<std::uint64_t>(), 3);
  CsvWriter csv(ex.outputs, "derivative.csv", {"sample", "order", "eps", "error"});
  double worst_first = INFINITY;
  double worst_second = INFINITY;
  std::size_t exact_first = 0;
  std::size_t exact_second = 0;
  bool pass = true;
  for (std::size_t q = 0; q < count; ++q) {
    const AtomicMeasure mu = random_measure(s, d, atoms, -half, half, 1.0);
    const Vec x = random_point(s, d, -half, half);
    const Vec y = random_point(s, d, -half, half);
    const double f1 = F->first_derivative(mu, x);
    const double f2 = F->second_derivative(mu, x, y);
    Vec e1, e2;
    for (double e : eps) {
      e1.push_back(std::abs(fd_first_derivative(*F, mu, x, e) - f1));
      e2.push_back(std::abs(fd_second_derivative(*F, mu, x, y, e) - f2));
      csv.row(q, 1, e, e1.back());
      csv.row(q, 2, e, e2.back());
    }
    auto judge = [&](const Vec& err, double exact, double& worst, std::size_t& exact_count) {
      const double scale = exact_tol * (1.0 + std::abs(exact));
      if (*std::max_element(err.begin(), err.end()) <= scale) {
        ++exact_count;
        return;
      }
      const double slope = log_slope(eps, err);
      worst = std::min(worst, slope);
      if (!(slope >= min_slope)) pass = false;
    };
    judge(e1, f1, worst_first, exact_first);
    judge(e2, f2, worst_second, exact_second);
  }
  auto slope_json = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  Outcome o;
  o.pass = pass;
  o.report = {{"test", "derivative"},
              {"samples", count},
              {"min_slope_first", slope_json(worst_first)},
              {"min_slope_second", slope_json(worst_second)},
              {"exact_first", exact_first},
              {"exact_second", exact_second},
              {"pass", pass}};
  char buf[200];
  std::snprintf(buf, sizeof(buf), "min slopes: first %.3f, second %.3f; exact cases: %zu, %zu", worst_first,
                worst_second, exact_first, exact_second);
  o.summary = buf;
  return o;
}

const std::map<std::string, std::function<Outcome(Experiment&)>>& commands() {
  static const std::map<std::string, std::function<Outcome(Experiment&)>> table = {
      {"admissibility", cmd_admissibility},
      {"simulate", cmd_simulate},
      {"verify-martingale", cmd_verify_martingale},
      {"ito-check", cmd_ito_check},
      {"girsanov-compare", cmd_girsanov_compare},
      {"bernstein-convergence", cmd_bernstein_convergence},
      {"derivative-check", cmd_derivative_check},
  };
  return table;
}

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

}  // namespace

// --------------------------------------------------------------------- run

int run(const Options& options, std::ostream& out, std::ostream& err) {
  const std::string name = std::filesystem::path(options.config_path).filename().string();
  std::ifstream in(options.config_path, std::ios::binary);
  if (!in) {
    err << options.config_path << ": cannot open config file\n";
    return kConfigError;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  Experiment ex;
  ex.options = options;
  ex.out = &out;
  try {
    ex.config = json::parse(text);
  } catch (const json::parse_error& e) {
    err << name << ":" << line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0) << ": " << e.what() << "\n";
    return kConfigError;
  }

  try {
    const json& cmd = io::field(ex.config, "command", "");
    if (!cmd.is_string()) throw ConfigError("/command", "expected a string");
    auto it = commands().find(cmd.get<std::string>());
    if (it == commands().end()) throw ConfigError("/command", "unknown command \"" + cmd.get<std::string>() + "\"");

    ex.outputs.dir = options.out_dir;
    std::filesystem::create_directories(ex.outputs.dir);
    const Outcome outcome = it->second(ex);

    json results = {{"command", cmd.get<std::string>()},
                    {"config", ex.config},
                    {"report", outcome.report},
                    {"pass", outcome.pass},
                    {"outputs", ex.outputs.files},
                    {"generated_at", utc_timestamp()}};
    std::ofstream(ex.outputs.dir / "results.json", std::ios::binary) << results.dump(2) << '\n';
    out << cmd.get<std::string>() << ": " << outcome.summary << "\n";
    out << (outcome.pass ? "PASS" : "FAIL") << "\n";
    return outcome.pass ? kPass : kFail;
  } catch (const ConfigError& e) {
    err << name << ":" << locate_line(text, e.pointer()) << ": " << (e.pointer().empty() ? "/" : e.pointer()) << ": "
        << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << name << ": error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace dk::cli
