#include "k3dyn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "k3dyn/error.hpp"
#include "k3dyn/svg.hpp"
#include "k3dyn/wehler.hpp"

namespace k3dyn::cli {

using nlohmann::json;

// ---------------------------------------------------------------- config

namespace {

void reject_unknown(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError("unknown key \"" + it.key() + "\"" + (where.empty() ? "" : " in " + where));
}

std::uint64_t get_u64(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
    throw ConfigError("field \"" + key + "\" must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::vector<double> get_numbers(const json& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError("field \"" + field + "\" must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError("field \"" + field + "\" must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<int> get_word(const json& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError("field \"" + field + "\" must be an array of integers");
  std::vector<int> out;
  for (const auto& x : v) {
    if (!x.is_number_integer()) throw ConfigError("field \"" + field + "\" must hold integers");
    out.push_back(x.get<int>());
  }
  return out;
}

int base_count(const json& surface) {
  return surface.at("type").get<std::string>() == "pentagon" ? 5 : 3;
}

}  // namespace

ExperimentConfig parse_config(const json& j, std::vector<std::string>& warnings) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j, {"surface", "generators", "subcommand", "n", "trials", "seed", "output", "start", "word",
                     "vol_draws", "bins"},
                 "");
  ExperimentConfig c;
  if (!j.contains("surface")) throw ConfigError("missing field \"surface\"");
  const auto& s = j.at("surface");
  if (!s.is_object() || !s.contains("type") || !s.at("type").is_string())
    throw ConfigError("field \"surface.type\" must be \"pentagon\" or \"wehler\"");
  const auto type = s.at("type").get<std::string>();
  if (type == "pentagon") {
    reject_unknown(s, {"type", "lengths"}, "surface");
    if (!s.contains("lengths")) throw ConfigError("missing field \"surface.lengths\"");
    const auto l = get_numbers(s.at("lengths"), "surface.lengths");
    if (l.size() != 5) throw ConfigError("field \"surface.lengths\" must hold 5 numbers");
    c.surface = {{"type", "pentagon"}, {"lengths", l}};
  } else if (type == "wehler") {
    reject_unknown(s, {"type", "coeffs"}, "surface");
    std::vector<double> coeffs;
    if (s.contains("coeffs")) {
      coeffs = get_numbers(s.at("coeffs"), "surface.coeffs");
      if (coeffs.size() != 27) throw ConfigError("field \"surface.coeffs\" must hold 27 numbers");
    } else {
      const auto& a = wehler::WehlerSurface::sample().coeffs();
      coeffs.assign(a.begin(), a.end());
    }
    c.surface = {{"type", "wehler"}, {"coeffs", coeffs}};
  } else {
    throw ConfigError("field \"surface.type\" must be \"pentagon\" or \"wehler\", got \"" + type + "\"");
  }
  const int k = base_count(c.surface);

  if (j.contains("generators")) {
    const auto& g = j.at("generators");
    if (!g.is_object()) throw ConfigError("field \"generators\" must be an object");
    reject_unknown(g, {"words", "weights"}, "generators");
    if (g.contains("words")) {
      if (!g.at("words").is_array()) throw ConfigError("field \"generators.words\" must be an array");
      for (std::size_t i = 0; i < g.at("words").size(); ++i)
        c.words.push_back(get_word(g.at("words")[i], "generators.words[" + std::to_string(i) + "]"));
    }
    if (g.contains("weights")) c.weights = get_numbers(g.at("weights"), "generators.weights");
  }
  if (c.words.empty())
    for (int i = 0; i < k; ++i) c.words.push_back({i});
  for (std::size_t i = 0; i < c.words.size(); ++i) {
    if (c.words[i].empty()) throw ConfigError("field \"generators.words[" + std::to_string(i) + "]\" is empty");
    for (int x : c.words[i])
      if (x < 0 || x >= k)
        throw ConfigError("field \"generators.words[" + std::to_string(i) + "]\" has index " + std::to_string(x) +
                          " outside 0.." + std::to_string(k - 1));
  }
  if (c.weights.empty()) c.weights.assign(c.words.size(), 1.0 / static_cast<double>(c.words.size()));
  if (c.weights.size() != c.words.size())
    throw ConfigError("field \"generators.weights\" must have one entry per word");
  double sum = 0.0;
  for (double w : c.weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("field \"generators.weights\" must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "generator weights sum to %.17g; normalized to 1", sum);
    warnings.emplace_back(buf);
    std::vector<std::vector<int>> words = c.words;
    const auto sys = GeneratorSystem::normalized(make_surface(c.surface), words, c.weights);
    c.weights = sys.weights();
  }

  if (!j.contains("subcommand") || !j.at("subcommand").is_string())
    throw ConfigError("missing field \"subcommand\"");
  c.subcommand = j.at("subcommand").get<std::string>();
  if (std::find(kSubcommands.begin(), kSubcommands.end(), c.subcommand) == kSubcommands.end())
    throw ConfigError("field \"subcommand\": unknown subcommand \"" + c.subcommand + "\"");
  if (j.contains("n")) c.n = get_u64(j, "n");
  if (j.contains("trials")) c.trials = get_u64(j, "trials");
  if (j.contains("seed")) c.seed = get_u64(j, "seed");
  if (j.contains("vol_draws")) c.vol_draws = get_u64(j, "vol_draws");
  if (j.contains("bins")) c.bins = get_u64(j, "bins");
  if (c.trials == 0) throw ConfigError("field \"trials\" must be positive");
  if (c.bins == 0 || c.bins > 4096) throw ConfigError("field \"bins\" must be in 1..4096");
  if (j.contains("output")) {
    if (!j.at("output").is_string()) throw ConfigError("field \"output\" must be a string");
    c.output = j.at("output").get<std::string>();
  }
  if (j.contains("start")) {
    c.start = get_numbers(j.at("start"), "start");
    if (static_cast<int>(c.start->size()) != (k == 5 ? 5 : 3))
      throw ConfigError("field \"start\" must hold " + std::to_string(k == 5 ? 5 : 3) + " angles");
  }
  if (j.contains("word")) {
    c.word = get_word(j.at("word"), "word");
    for (int x : c.word)
      if (x < 0 || x >= k) throw ConfigError("field \"word\" has index " + std::to_string(x) + " out of range");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::vector<std::string>& warnings) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j, warnings);
}

json to_json(const ExperimentConfig& c) {
  json j{{"surface", c.surface},
         {"generators", {{"words", c.words}, {"weights", c.weights}}},
         {"subcommand", c.subcommand},
         {"n", c.n},
         {"trials", c.trials},
         {"seed", c.seed},
         {"output", c.output},
         {"word", c.word},
         {"vol_draws", c.vol_draws},
         {"bins", c.bins}};
  if (c.start) j["start"] = *c.start;
  return j;
}

std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump17(to_json(c))) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string dump17(const json& j) {
  switch (j.type()) {
    case json::value_t::object: {
      std::string s = "{";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) s += ",";
        first = false;
        s += json(it.key()).dump() + ":" + dump17(it.value());
      }
      return s + "}";
    }
    case json::value_t::array: {
      std::string s = "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) s += ",";
        s += dump17(j[i]);
      }
      return s + "]";
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) return "null";
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      std::string s = buf;
      if (s.find_first_of(".eE") == std::string::npos) s += ".0";
      return s;
    }
    default:
      return j.dump();
  }
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << content;
    if (!out) throw Error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::shared_ptr<const SurfaceModel> make_surface(const json& surface) {
  const auto type = surface.at("type").get<std::string>();
  if (type == "pentagon") return std::make_shared<PentagonModel>(pentagon::SideLengths::from_json(surface));
  return std::make_shared<WehlerModel>(wehler::WehlerSurface::from_json(surface));
}

GeneratorSystem make_system(const ExperimentConfig& c) {
  return {make_surface(c.surface), c.words, c.weights};
}

// ---------------------------------------------------------------- running

namespace {

struct TrialOutput {
  json record;
  std::vector<double> hist;  // bins x bins, branches merged
  std::vector<State> points;
  std::vector<double> norms;
  double slope = 0.0;
};

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json state_json(const SurfaceModel& m, const State& x) {
  json a = json::array();
  for (int i = 0; i < m.state_size(); ++i) a.push_back(x[static_cast<std::size_t>(i)]);
  return a;
}

json estimate_json(const LyapunovEstimate& e) {
  return {{"lambda_plus", e.lambda_plus},   {"lambda_minus", e.lambda_minus}, {"stderr_plus", e.stderr_plus},
          {"stderr_minus", e.stderr_minus}, {"sum", e.sum},                   {"stderr_sum", e.stderr_sum},
          {"gaps", e.gaps},                 {"richardson", e.richardson},     {"worst_residual", e.worst_residual},
          {"truncated", e.truncated}};
}

State start_point(const ExperimentConfig& c, const SurfaceModel& m, std::uint64_t key) {
  if (c.start) {
    State x{};
    for (std::size_t i = 0; i < c.start->size(); ++i) x[i] = (*c.start)[i];
    if (m.kind() == "pentagon") {
      // Gauge: rotate so that the first turn is 1.
      for (std::size_t i = 1; i < 5; ++i) x[i] = angle_diff(x[i], x[0]);
      x[0] = 0.0;
    }
    x = m.project(x);
    if (!(m.residual(x) < 1e-8)) throw NoClosure("start point is not on the surface");
    return x;
  }
  CounterRng rng(stream_key(key, 0x5EEDULL));
  return m.random_point(rng);
}

// Runs f(t) for t < trials on worker threads; results are kept by index.
template <class F>
std::vector<TrialOutput> run_trials(std::size_t trials, F f) {
  std::vector<TrialOutput> out(trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t t = next++; t < trials; t = next++) {
      try {
        out[t] = f(t);
      } catch (const Error& e) {
        out[t].record = {{"trial", t}, {"error", e.what()}};
      }
    }
  };
  const std::size_t hw = std::max(1U, std::thread::hardware_concurrency());
  const std::size_t nthreads = std::min<std::size_t>(hw, trials);
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return out;
}

struct Artifacts {
  std::filesystem::path dir;
  std::string header;
  std::vector<std::filesystem::path> files;

  void write(const std::string& name, const std::string& content) {
    const auto p = dir / name;
    write_atomic(p, content);
    files.push_back(p);
  }
};

}  // namespace

RunReport run_experiment(const ExperimentConfig& c, const std::vector<std::string>& warnings) {
  const auto sys = make_system(c);
  const auto& m = sys.surface();
  const std::string hash = config_hash(c);
  Artifacts art{c.output, "config_hash=" + hash + " master_seed=" + std::to_string(c.seed), {}};
  std::filesystem::create_directories(art.dir);
  const std::size_t n = c.n, trials = c.trials;
  json summary{{"config", to_json(c)}, {"config_hash", hash}, {"master_seed", c.seed},
               {"subcommand", c.subcommand}, {"warnings", warnings}};
  std::vector<TrialOutput> res;
  auto key = [&](std::size_t t) { return stream_key(c.seed, t); };

  if (c.subcommand == "orbit") {
    const auto tests = trig_test_functions(8);
    res = run_trials(trials, [&](std::size_t t) {
      const State x0 = start_point(c, m, key(t));
      OrbitOptions opt;
      opt.bins = c.bins;
      opt.reservoir = 1024;
      opt.tests = tests;
      const auto em = run_orbit(sys, x0, Itinerary(key(t), sys.weights()), n, opt);
      TrialOutput o;
      o.record = {{"trial", t},          {"seed", key(t)},         {"n", em.n},
                  {"start", state_json(m, x0)}, {"worst_residual", em.worst_residual},
                  {"truncated", em.truncated},  {"test_names", em.test_names},
                  {"test_mean", em.test_mean},  {"test_stderr", em.test_stderr}};
      if (em.truncated) o.record["error"] = em.error;
      o.hist.assign(c.bins * c.bins, 0.0);
      for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t i = 0; i < c.bins * c.bins; ++i) o.hist[i] += em.mass[b * c.bins * c.bins + i];
      o.points = em.reservoir;
      return o;
    });
    std::vector<double> hist(c.bins * c.bins, 0.0);
    double worst = 0.0;
    std::string hist_csv = "# " + art.header + "\ni,j,mass\n", pts = "# " + art.header + "\ntrial,";
    for (int i = 0; i < m.state_size(); ++i) pts += "theta" + std::to_string(i + (m.kind() == "pentagon" ? 0 : 1)) + ",";
    pts += "residual\n";
    for (std::size_t t = 0; t < res.size(); ++t) {
      for (std::size_t i = 0; i < res[t].hist.size(); ++i) hist[i] += res[t].hist[i] / static_cast<double>(trials);
      if (res[t].record.contains("worst_residual")) worst = std::max(worst, res[t].record["worst_residual"].get<double>());
      for (const auto& x : res[t].points) {
        pts += std::to_string(t) + ",";
        for (int i = 0; i < m.state_size(); ++i) pts += fmt17(x[static_cast<std::size_t>(i)]) + ",";
        pts += fmt17(m.residual(x)) + "\n";
      }
    }
    for (std::size_t i = 0; i < c.bins; ++i)
      for (std::size_t j = 0; j < c.bins; ++j)
        hist_csv += std::to_string(i) + "," + std::to_string(j) + "," + fmt17(hist[i * c.bins + j]) + "\n";
    art.write("histogram.csv", hist_csv);
    art.write("points.csv", pts);
    art.write("histogram.svg", svg::histogram2d(hist, c.bins, art.header));
    summary["worst_residual"] = worst;
    summary["verdict"] = worst < 1e-8 ? "residuals below 1e-8" : "residuals above 1e-8";
  } else if (c.subcommand == "lyapunov") {
    std::vector<LyapunovEstimate> ests(trials);
    res = run_trials(trials, [&](std::size_t t) {
      const State x0 = start_point(c, m, key(t));
      ests[t] = tangent_lyapunov(sys, x0, Itinerary(key(t), sys.weights()), n);
      TrialOutput o;
      o.record = estimate_json(ests[t]);
      o.record["trial"] = t;
      o.record["seed"] = key(t);
      o.record["n"] = n;
      o.record["start"] = state_json(m, x0);
      return o;
    });
    std::vector<LyapunovEstimate> ok;
    for (std::size_t t = 0; t < trials; ++t)
      if (!res[t].record.contains("error")) ok.push_back(ests[t]);
    const auto p = pool(ok);
    summary["estimate"] = estimate_json(p);
    summary["trials_used"] = ok.size();
    summary["verdict"] = {{"positive_exponent", p.lambda_plus > 5.0 * p.stderr_plus},
                          {"exponents_sum_to_zero", std::abs(p.sum) < 3.0 * p.combined_stderr()}};
  } else if (c.subcommand == "cohomology") {
    const auto pb = coh_lyapunov(sys, c.seed, trials, n, CompositionOrder::Pullback);
    const auto rv = coh_lyapunov(sys, c.seed, trials, n, CompositionOrder::Reversed);
    for (std::size_t t = 0; t < trials; ++t) {
      TrialOutput o;
      o.record = {{"trial", t}, {"seed", key(t)}, {"n", n},
                  {"lambda_pullback", pb.per_trial[t]}, {"lambda_reversed", rv.per_trial[t]}};
      res.push_back(o);
    }
    const double se = std::hypot(pb.stderr_lambda, rv.stderr_lambda);
    summary["pullback"] = {{"lambda", pb.lambda}, {"stderr", pb.stderr_lambda},
                           {"spectrum", pb.spectrum}, {"spectrum_stderr", pb.spectrum_stderr}};
    summary["reversed"] = {{"lambda", rv.lambda}, {"stderr", rv.stderr_lambda},
                           {"spectrum", rv.spectrum}, {"spectrum_stderr", rv.spectrum_stderr}};
    summary["orders_agree"] = std::abs(pb.lambda - rv.lambda) <= 3.0 * se;
    summary["verdict"] = {{"positive_exponent", pb.lambda > 5.0 * pb.stderr_lambda}};
  } else if (c.subcommand == "classify") {
    const auto& coh = sys.cohomology();
    for (std::size_t g = 0; g < sys.size(); ++g) {
      TrialOutput o;
      IsometryReport rep;
      if (m.kind() == "wehler") {
        const auto wc = wehler::coh_matrices();
        rep = classify_isometry(LatticeIsometry(wehler::word_pullback(wc, sys.words()[g]), wc.form));
      } else {
        rep = classify_isometry(LatticeIsometry(sys.word_matrix(g), coh.form));
      }
      o.record = report_to_json(rep);
      o.record["word"] = sys.words()[g];
      res.push_back(o);
    }
    summary["words"] = sys.words();
  } else if (c.subcommand == "boundary") {
    const auto fe = furstenberg_estimate(sys, c.seed, trials, n);
    std::string csv = "# " + art.header + "\ntrial,";
    for (Eigen::Index i = 0; i < sys.cohomology().form.dim(); ++i) csv += "c" + std::to_string(i + 1) + ",";
    csv += "q,klein_x,klein_y\n";
    for (std::size_t t = 0; t < trials; ++t) {
      TrialOutput o;
      const auto& e = fe.sample.classes[t];
      std::vector<double> coords(e.coords.data(), e.coords.data() + e.coords.size());
      o.record = {{"trial", t},       {"seed", key(t)},     {"n", n},
                  {"class", coords},  {"q", fe.sample.q_values[t]},
                  {"klein", fe.sample.klein[t]}, {"furstenberg_term", fe.values[t]}};
      csv += std::to_string(t) + ",";
      for (double x : coords) csv += fmt17(x) + ",";
      csv += fmt17(fe.sample.q_values[t]) + "," + fmt17(fe.sample.klein[t][0]) + "," +
             fmt17(fe.sample.klein[t][1]) + "\n";
      res.push_back(o);
    }
    art.write("boundary.csv", csv);
    art.write("boundary.svg", svg::scatter(fe.sample.klein, art.header));
    summary["furstenberg"] = {{"lambda", fe.lambda}, {"stderr", fe.stderr_lambda}};
    summary["min_pairwise_angle"] = fe.sample.min_pairwise_angle;
    summary["max_abs_q"] = fe.sample.max_abs_q;
    if (fe.insufficient) summary["warnings"].push_back("InsufficientSample: fewer than 10 boundary classes");
  } else if (c.subcommand == "stable-dirs") {
    const State x = start_point(c, m, stream_key(c.seed, 0xFFFFFFFFULL));
    std::vector<std::uint64_t> seeds;
    for (std::size_t t = 0; t < 2 * trials; ++t) seeds.push_back(key(t));
    const auto sd = stable_direction_dependence(sys, x, seeds, n);
    for (std::size_t t = 0; t < trials; ++t) {
      TrialOutput o;
      o.record = {{"pair", t}, {"seeds", {seeds[2 * t], seeds[2 * t + 1]}}, {"n", n}};
      const auto& a = sd.directions[2 * t];
      const auto& b = sd.directions[2 * t + 1];
      if (a && b) {
        const double dot = std::abs((*a)[0] * (*b)[0] + (*a)[1] * (*b)[1]);
        const double crs = std::abs((*a)[0] * (*b)[1] - (*a)[1] * (*b)[0]);
        o.record["angle"] = std::atan2(crs, dot);
        o.record["directions"] = {*a, *b};
      } else {
        o.record["excluded"] = true;
      }
      res.push_back(o);
    }
    summary["point"] = state_json(m, x);
    summary["chart"] = sd.chart;
    summary["median_angle"] = sd.median_angle;
    summary["excluded_seeds"] = sd.excluded.size();
  } else if (c.subcommand == "twist") {
    res = run_trials(trials, [&](std::size_t t) {
      const State x = start_point(c, m, key(t));
      const auto g = twist_growth(m, c.word, x, n);
      TrialOutput o;
      o.record = {{"trial", t},
                  {"seed", key(t)},
                  {"n", n},
                  {"start", state_json(m, x)},
                  {"fit_from", g.fit_from},
                  {"loglog_slope", g.loglog.slope},
                  {"loglog_r2", g.loglog.r2},
                  {"semilog_slope", g.semilog.slope},
                  {"semilog_r2", g.semilog.r2},
                  {"final_norm", g.norms.empty() ? 0.0 : g.norms.back()},
                  {"truncated", g.truncated}};
      o.norms = g.norms;
      o.slope = g.loglog.slope;
      return o;
    });
    std::string csv = "# " + art.header + "\ntrial,n,norm\n";
    std::vector<svg::GrowthSeries> series;
    std::vector<double> slopes;
    for (std::size_t t = 0; t < res.size(); ++t) {
      for (std::size_t k = 0; k < res[t].norms.size(); ++k)
        csv += std::to_string(t) + "," + std::to_string(k + 1) + "," + fmt17(res[t].norms[k]) + "\n";
      if (!res[t].norms.empty()) {
        slopes.push_back(res[t].slope);
        if (series.size() < 6) series.push_back({"trial " + std::to_string(t), res[t].norms, res[t].slope});
      }
    }
    art.write("growth.csv", csv);
    art.write("growth.svg", svg::growth(series, art.header));
    summary["word"] = c.word;
    if (!slopes.empty()) summary["median_loglog_slope"] = median(slopes);
  } else if (c.subcommand == "equidist") {
    const auto vol = vol_averages(m, trig_test_functions(8), c.vol_draws, stream_key(c.seed, 0xA11CEULL << 20));
    res = run_trials(trials, [&](std::size_t t) {
      const State x0 = start_point(c, m, key(t));
      const auto rep = equidistribution_test(sys, x0, Itinerary(key(t), sys.weights()), n, vol, 8);
      TrialOutput o;
      o.record = {{"trial", t},          {"seed", key(t)},           {"n", rep.n},
                  {"names", rep.names},  {"orbit_mean", rep.orbit_mean}, {"orbit_stderr", rep.orbit_stderr},
                  {"vol_mean", rep.vol_mean}, {"vol_stderr", rep.vol_stderr}, {"z", rep.z},
                  {"consistent", rep.consistent}, {"worst_residual", rep.measure.worst_residual}};
      return o;
    });
    bool all = true;
    for (const auto& r : res) all = all && r.record.value("consistent", false);
    summary["vol_draws"] = c.vol_draws;
    summary["verdict"] = all ? "consistent" : "rejected";
  }

  std::string jsonl;
  std::size_t failed = 0;
  for (auto& r : res) {
    r.record["config_hash"] = hash;
    r.record["master_seed"] = c.seed;
    if (r.record.contains("error")) ++failed;
    jsonl += dump17(r.record) + "\n";
  }
  summary["failed_trials"] = failed;
  art.write("results.jsonl", jsonl);
  art.write("summary.json", dump17(summary) + "\n");
  return {summary, art.files};
}

// ---------------------------------------------------------------- plots

namespace {

struct Csv {
  std::string comment;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  [[nodiscard]] std::size_t col(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw EmptyResults("CSV has no column \"" + name + "\"");
    return static_cast<std::size_t>(it - columns.begin());
  }
};

Csv read_csv(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw EmptyResults("cannot read " + p.string());
  Csv csv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (csv.comment.empty()) csv.comment = line.substr(line.find_first_not_of("# "));
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (csv.columns.empty()) {
      csv.columns = cells;
      continue;
    }
    std::vector<double> row;
    for (const auto& x : cells) row.push_back(std::strtod(x.c_str(), nullptr));
    if (row.size() != csv.columns.size()) throw EmptyResults("ragged row in " + p.string());
    csv.rows.push_back(row);
  }
  if (csv.rows.empty()) throw EmptyResults(p.string() + " holds no data");
  return csv;
}

}  // namespace

std::string plot_from_csv(const std::string& kind, const std::filesystem::path& path) {
  const Csv csv = read_csv(path);
  if (kind == "histogram2d") {
    const auto ci = csv.col("i"), cj = csv.col("j"), cm = csv.col("mass");
    std::size_t bins = 0;
    for (const auto& r : csv.rows)
      bins = std::max(bins, static_cast<std::size_t>(std::max(r[ci], r[cj])) + 1);
    std::vector<double> mass(bins * bins, 0.0);
    for (const auto& r : csv.rows)
      mass[static_cast<std::size_t>(r[ci]) * bins + static_cast<std::size_t>(r[cj])] += r[cm];
    return svg::histogram2d(mass, bins, csv.comment);
  }
  if (kind == "scatter") {
    const auto cx = csv.col("klein_x"), cy = csv.col("klein_y");
    std::vector<std::array<double, 2>> pts;
    for (const auto& r : csv.rows) pts.push_back({r[cx], r[cy]});
    return svg::scatter(pts, csv.comment);
  }
  if (kind == "growth") {
    const auto ct = csv.col("trial"), cn = csv.col("n"), cv = csv.col("norm");
    std::map<long, std::vector<double>> by_trial;
    for (const auto& r : csv.rows) {
      auto& v = by_trial[std::lround(r[ct])];
      const auto k = static_cast<std::size_t>(r[cn]);
      if (v.size() < k) v.resize(k, 0.0);
      v[k - 1] = r[cv];
    }
    std::vector<svg::GrowthSeries> series;
    for (const auto& [t, v] : by_trial) {
      if (series.size() == 6) break;
      double slope = 0.0;
      std::vector<double> x, y;
      for (std::size_t k = std::max<std::size_t>(1, v.size() / 10); k <= v.size(); ++k)
        if (v[k - 1] > 0.0) {
          x.push_back(std::log(static_cast<double>(k)));
          y.push_back(std::log(v[k - 1]));
        }
      if (x.size() >= 2) slope = linear_fit(x, y).slope;
      series.push_back({"trial " + std::to_string(t), v, slope});
    }
    return svg::growth(series, csv.comment);
  }
  throw ConfigError("unknown plot kind \"" + kind + "\" (histogram2d, scatter, growth)");
}

}  // namespace k3dyn::cli
