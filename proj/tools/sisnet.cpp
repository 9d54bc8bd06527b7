#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sisnet/benchmark.hpp"
#include "sisnet/evaluation.hpp"
#include "sisnet/heatmap.hpp"
#include "sisnet/inference.hpp"
#include "sisnet/io.hpp"
#include "sisnet/manifest.hpp"
#include "sisnet/simulator.hpp"

namespace {

using namespace sisnet;

constexpr const char* kOutputEnv = "SISNET_OUTPUT_DIR";

fs::path default_output_dir() {
  const char* env = std::getenv(kOutputEnv);
  return env && *env ? fs::path(env) : fs::path(".");
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// key = value lines; '#' starts a comment. Keys are long option names.
std::vector<std::pair<std::string, std::string>> read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(path.string(), number, "expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (key.empty()) throw ParseError(path.string(), number, "empty key");
    if (key == "config") throw ParseError(path.string(), number, "config files cannot nest");
    entries.emplace_back(std::move(key), std::move(value));
  }
  return entries;
}

// Splices `--key=value` for every config entry in front of the command-line
// flags of the subcommand, so that explicit flags win (options take the last value).
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::optional<fs::path> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config" && i + 1 < args.size()) {
      config = args[i + 1];
      ++i;
      continue;
    }
    if (a.rfind("--config=", 0) == 0) {
      config = a.substr(9);
      continue;
    }
    out.push_back(a);
  }
  if (!config) return out;
  // Entries go right after the subcommand name.
  std::vector<std::string> injected;
  for (const auto& [k, v] : read_config(*config)) injected.push_back("--" + k + "=" + v);
  const std::size_t insert_at = std::min<std::size_t>(1, out.size());
  out.insert(out.begin() + static_cast<long>(insert_at), injected.begin(), injected.end());
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
  return s;
}

/// Largest 1-based values in the given CSV columns, skipping the header.
std::vector<int> column_maxima(const fs::path& path, const std::vector<int>& columns) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<int> best(columns.size(), 0);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto col = static_cast<std::size_t>(columns[c]);
      if (col >= fields.size()) continue;
      try {
        best[c] = std::max(best[c], std::stoi(fields[col]));
      } catch (const std::exception&) {
        // the loader reports malformed rows with their line number
      }
    }
  }
  return best;
}

struct Dimensions {
  int agents = 0;
  int steps = 0;
};

Dimensions infer_dimensions(const fs::path& contacts, const std::optional<fs::path>& surveys,
                            std::optional<int> agents, std::optional<int> steps) {
  const auto c = column_maxima(contacts, {0, 1, 2});
  Dimensions d{std::max(c[1], c[2]), c[0]};
  if (surveys) {
    const auto s = column_maxima(*surveys, {0, 1});
    d.agents = std::max(d.agents, s[1]);
    d.steps = std::max(d.steps, s[0]);
  }
  if (agents) d.agents = *agents;
  if (steps) d.steps = *steps;
  if (d.agents < 1 || d.steps < 1)
    throw std::runtime_error("cannot infer dimensions; pass --agents and --steps");
  return d;
}

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed, const std::string& command) {
  if (!seed) throw std::runtime_error(command + ": --seed is required (flag or config)");
  return *seed;
}

const std::map<std::string, ScanOrder> kScans{{"systematic", ScanOrder::systematic},
                                              {"random", ScanOrder::random}};
const std::map<std::string, StateInit> kInits{{"any-symptom", StateInit::any_symptom},
                                              {"symptom-runs", StateInit::symptom_runs}};

template <typename Map>
std::string name_of(const Map& map, typename Map::mapped_type value) {
  for (const auto& [k, v] : map)
    if (v == value) return k;
  return "?";
}

Priors make_priors(const std::string& preset, int num_symptoms) {
  if (preset == "uniform") return Priors::uniform(num_symptoms);
  if (preset == "informative") return Priors::informative(num_symptoms);
  throw std::runtime_error("unknown prior preset '" + preset + "'");
}

void finish(RunManifest& manifest, const fs::path& out_dir) {
  manifest.write(out_dir / "manifest.toml");
  for (const auto& p : manifest.outputs) std::cout << "wrote " << p.generic_string() << '\n';
  std::cout << "wrote " << (out_dir / "manifest.toml").generic_string() << '\n';
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  int agents = 20;
  int steps = 128;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> contacts;
  int groups = 4;
  double within = 0.3;
  double cross = 0.01;
  double alpha = 0.01;
  double beta = 0.045;
  double gamma = 0.25;
  std::vector<double> theta0{0.01};
  std::vector<double> theta1{0.8};
  std::string variant = "independent";
  double report_rate = 1.0;
  std::vector<int> infected;
};

int run_simulate(const SimulateArgs& a, const fs::path& out_dir) {
  const std::uint64_t seed = require_seed(a.seed, "simulate");
  if (a.theta0.size() != a.theta1.size())
    throw std::runtime_error("--theta0 and --theta1 need one entry per symptom");

  ModelParams params;
  params.alpha = a.alpha;
  params.beta = a.beta;
  params.gamma = a.gamma;
  params.variant = parse_variant(a.variant);
  params.emissions.resize(static_cast<Eigen::Index>(a.theta0.size()), 2);
  for (std::size_t s = 0; s < a.theta0.size(); ++s) {
    params.emissions(static_cast<Eigen::Index>(s), 0) = a.theta0[s];
    params.emissions(static_cast<Eigen::Index>(s), 1) = a.theta1[s];
  }
  validate(params);

  RunManifest manifest;
  manifest.command = "simulate";
  manifest.seed = seed;

  DynamicNetwork network = a.contacts
                               ? load_contacts(*a.contacts, a.agents, a.steps)
                               : synthesize_proximity_network(a.agents, a.steps,
                                                              {a.groups, a.within, a.cross}, seed);
  if (a.contacts) manifest.inputs.push_back(*a.contacts);

  SimulationConfig sim;
  sim.seed = seed;
  sim.report_rate = a.report_rate;
  if (!a.infected.empty()) {
    Eigen::VectorX<std::uint8_t> start = Eigen::VectorX<std::uint8_t>::Zero(network.num_agents());
    for (int id : a.infected) {
      if (id < 1 || id > network.num_agents())
        throw std::runtime_error("--infected id " + std::to_string(id) + " out of range");
      start(id - 1) = 1;
    }
    sim.initial_state = start;
  }
  const SimulationResult result = simulate(network, params, sim);

  fs::create_directories(out_dir);
  const fs::path contacts_out = out_dir / "contacts.csv";
  const fs::path surveys_out = out_dir / "surveys.csv";
  const fs::path states_out = out_dir / "states.csv";
  save_contacts(contacts_out, network);
  save_surveys(surveys_out, result.observations);
  save_states(states_out, result.states);

  std::string infected;
  for (int id : a.infected) infected += (infected.empty() ? "" : ",") + std::to_string(id);
  manifest.config = {{"agents", std::to_string(network.num_agents())},
                     {"steps", std::to_string(network.num_steps())},
                     {"network", a.contacts ? "file" : "synthetic"},
                     {"groups", std::to_string(a.groups)},
                     {"within", format_number(a.within)},
                     {"cross", format_number(a.cross)},
                     {"alpha", format_number(a.alpha)},
                     {"beta", format_number(a.beta)},
                     {"gamma", format_number(a.gamma)},
                     {"theta0", join(a.theta0)},
                     {"theta1", join(a.theta1)},
                     {"variant", a.variant},
                     {"report-rate", format_number(a.report_rate)},
                     {"infected", infected}};
  manifest.outputs = {contacts_out, surveys_out, states_out};
  manifest.results = {{"infectious_cells", std::to_string(result.states.cast<int>().sum())},
                      {"surveys", std::to_string([&] {
                         long n = 0;
                         for (Step t = 0; t < network.num_steps(); ++t)
                           for (Agent i = 0; i < network.num_agents(); ++i)
                             n += result.observations.surveyed(i, t);
                         return n;
                       }())}};
  finish(manifest, out_dir);
  return 0;
}

// ---------------------------------------------------------------------------

struct InferArgs {
  fs::path contacts;
  fs::path surveys;
  std::optional<int> agents;
  std::optional<int> steps;
  std::optional<std::uint64_t> seed;
  int iterations = 10000;
  int burn_in = 1000;
  int thinning = 1;
  std::string variant = "independent";
  ScanOrder scan = ScanOrder::systematic;
  StateInit init = StateInit::symptom_runs;
  double initial_infected = 0.0;
  std::string priors = "uniform";
};

int run_infer(const InferArgs& a, const fs::path& out_dir) {
  const std::uint64_t seed = require_seed(a.seed, "infer");
  const Dimensions dims = infer_dimensions(a.contacts, a.surveys, a.agents, a.steps);
  const DynamicNetwork network = load_contacts(a.contacts, dims.agents, dims.steps);
  const ObservationMatrix y = load_surveys(a.surveys, network);

  GibbsConfig gibbs;
  gibbs.n_iterations = a.iterations;
  gibbs.n_burn_in = a.burn_in;
  gibbs.thinning = a.thinning;
  gibbs.seed = seed;
  gibbs.variant = parse_variant(a.variant);
  gibbs.scan = a.scan;
  gibbs.init = a.init;
  gibbs.initial_infected = a.initial_infected;
  const Priors priors = make_priors(a.priors, y.num_symptoms());
  const PosteriorSummary summary = run_gibbs(y, network, priors, gibbs);

  fs::create_directories(out_dir);
  const fs::path marginals_out = out_dir / "marginals.csv";
  const fs::path trace_out = out_dir / "trace.csv";
  save_matrix(marginals_out, marginal_table(summary.marginals));
  save_trace(trace_out, summary.trace);

  RunManifest manifest;
  manifest.command = "infer";
  manifest.seed = seed;
  manifest.config = {{"agents", std::to_string(dims.agents)},
                     {"steps", std::to_string(dims.steps)},
                     {"symptoms", std::to_string(y.num_symptoms())},
                     {"iterations", std::to_string(a.iterations)},
                     {"burn-in", std::to_string(a.burn_in)},
                     {"thinning", std::to_string(a.thinning)},
                     {"variant", a.variant},
                     {"scan", name_of(kScans, a.scan)},
                     {"init", name_of(kInits, a.init)},
                     {"initial-infected", format_number(a.initial_infected)},
                     {"priors", a.priors}};
  manifest.inputs = {a.contacts, a.surveys};
  manifest.outputs = {marginals_out, trace_out};
  manifest.results = {{"kept_samples", std::to_string(summary.kept_samples())}};
  if (!summary.trace.empty()) {
    const auto add = [&](const std::string& name, double ParamSample::*field) {
      const TraceStats st = trace_stats(summary.trace, field);
      manifest.results.emplace_back(name + "_mean", format_number(st.mean));
      manifest.results.emplace_back(name + "_sd", format_number(st.sd));
    };
    add("alpha", &ParamSample::alpha);
    add("beta", &ParamSample::beta);
    add("gamma", &ParamSample::gamma);
  }
  finish(manifest, out_dir);
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchmarkArgs {
  BenchmarkConfig config;
  int iterations = 10000;
  int burn_in = 1000;
  std::string variant = "independent";
  std::string priors = "uniform";
};

int run_benchmark_command(BenchmarkArgs a, const fs::path& out_dir) {
  a.config.true_params.variant = parse_variant(a.variant);
  if (a.priors != "uniform") a.config.priors = make_priors(a.priors, 1);
  GibbsConfig gibbs;
  gibbs.n_iterations = a.iterations;
  gibbs.n_burn_in = a.burn_in;
  gibbs.variant = parse_variant(a.variant);
  validate(a.config);
  validate(gibbs);

  const BenchmarkResult result = run_benchmark(a.config, gibbs);
  if (result.scored_series == 0)
    throw std::runtime_error("no series had both classes in its held-out truth; ROC undefined");

  fs::create_directories(out_dir / "roc");
  RunManifest manifest;
  manifest.command = "benchmark";
  manifest.seed = a.config.seed;

  const fs::path summary_out = out_dir / "summary.csv";
  std::ofstream summary(summary_out, std::ios::binary);
  summary << "series,held_out_agents,cells,positives,model_auc,baseline_auc\n";
  for (const SeriesResult& s : result.series) {
    char name[32];
    std::snprintf(name, sizeof name, "series_%03d.csv", s.index + 1);
    const fs::path roc_out = out_dir / "roc" / name;
    std::ofstream roc(roc_out, std::ios::binary);
    roc << "method,fpr,tpr,threshold\n";
    if (s.model_roc) write_roc(roc, "model", *s.model_roc);
    if (s.baseline_roc) write_roc(roc, "baseline", *s.baseline_roc);
    roc.close();
    manifest.outputs.push_back(roc_out);

    long positives = 0;
    for (auto v : s.truth) positives += v;
    summary << s.index + 1 << ',' << s.held_out.size() << ',' << s.truth.size() << ','
            << positives << ',' << (s.model_roc ? format_number(s.model_roc->auc) : "") << ','
            << (s.baseline_roc ? format_number(s.baseline_roc->auc) : "") << '\n';
  }
  summary << "average,,,," << format_number(result.model_average.auc) << ','
          << format_number(result.baseline_average.auc) << '\n';
  summary.close();

  const fs::path averaged_out = out_dir / "roc_averaged.csv";
  std::ofstream averaged(averaged_out, std::ios::binary);
  averaged << "method,fpr,tpr,threshold\n";
  write_roc(averaged, "model", result.model_average);
  write_roc(averaged, "baseline", result.baseline_average);
  averaged.close();
  manifest.outputs.push_back(averaged_out);
  manifest.outputs.push_back(summary_out);

  const BenchmarkConfig& c = a.config;
  manifest.config = {{"series", std::to_string(c.n_series)},
                     {"length", std::to_string(c.series_length)},
                     {"agents", std::to_string(c.n_agents)},
                     {"groups", std::to_string(c.pattern.num_groups)},
                     {"within", format_number(c.pattern.within_group)},
                     {"cross", format_number(c.pattern.cross_group)},
                     {"holdout", format_number(c.holdout_fraction)},
                     {"obs-noise", format_number(c.observation_noise)},
                     {"net-noise", format_number(c.network_noise)},
                     {"report-rate", format_number(c.report_rate)},
                     {"alpha", format_number(c.true_params.alpha)},
                     {"beta", format_number(c.true_params.beta)},
                     {"gamma", format_number(c.true_params.gamma)},
                     {"training-length", std::to_string(c.training_length)},
                     {"iterations", std::to_string(a.iterations)},
                     {"burn-in", std::to_string(a.burn_in)},
                     {"variant", a.variant},
                     {"priors", a.priors}};
  manifest.results = {{"scored_series", std::to_string(result.scored_series)},
                      {"model_auc", format_number(result.model_average.auc)},
                      {"baseline_auc", format_number(result.baseline_average.auc)}};
  finish(manifest, out_dir);
  return 0;
}

// ---------------------------------------------------------------------------

struct PermtestArgs {
  fs::path friends;
  fs::path surveys;
  std::optional<int> agents;
  std::optional<int> steps;
  int symptom = 0;
  int permutations = 999;
  std::uint64_t seed = 0;
};

int run_permtest(const PermtestArgs& a, const fs::path& out_dir) {
  const auto f = column_maxima(a.friends, {0, 1});
  const auto s = column_maxima(a.surveys, {0, 1});
  const int agents = a.agents.value_or(std::max({f[0], f[1], s[1]}));
  const int steps = a.steps.value_or(s[0]);
  if (agents < 1 || steps < 1)
    throw std::runtime_error("cannot infer dimensions; pass --agents and --steps");
  const StaticGraph friends = load_friends(a.friends, agents);
  const ObservationMatrix y = load_surveys(a.surveys, DynamicNetwork(agents, steps));
  if (a.symptom < 0 || a.symptom > y.num_symptoms())
    throw std::runtime_error("--symptom must be 0 (any) or in 1.." +
                             std::to_string(y.num_symptoms()));

  std::vector<std::set<int>> days(static_cast<std::size_t>(agents));
  for (Agent n = 0; n < agents; ++n)
    for (Step t = 0; t < steps; ++t) {
      const bool hit = a.symptom == 0 ? y.present_count(n, t) > 0
                                      : y.at(n, t, a.symptom - 1) == Report::present;
      if (hit) days[static_cast<std::size_t>(n)].insert(t);
    }
  const PermutationResult r = permutation_test(friends, days, a.permutations, a.seed);

  fs::create_directories(out_dir);
  const fs::path out = out_dir / "permtest.csv";
  std::ofstream file(out, std::ios::binary);
  file << "statistic,p_value,n_permutations\n"
       << format_number(r.statistic) << ',' << format_number(r.p_value) << ','
       << r.n_permutations << '\n';
  file.close();

  RunManifest manifest;
  manifest.command = "permtest";
  manifest.seed = a.seed;
  manifest.config = {{"agents", std::to_string(agents)},
                     {"steps", std::to_string(steps)},
                     {"symptom", a.symptom == 0 ? "any" : std::to_string(a.symptom)},
                     {"permutations", std::to_string(a.permutations)}};
  manifest.inputs = {a.friends, a.surveys};
  manifest.outputs = {out};
  manifest.results = {{"statistic", format_number(r.statistic)},
                      {"p_value", format_number(r.p_value)}};
  finish(manifest, out_dir);
  return 0;
}

// ---------------------------------------------------------------------------

struct DurationArgs {
  std::optional<fs::path> runs;
  std::optional<fs::path> surveys;
  std::optional<int> agents;
  std::optional<int> steps;
  int symptom = 0;
  bool keep_censored = false;
};

std::vector<double> read_runs(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != "duration")
    throw ParseError(path.string(), 1, "expected header 'duration'");
  std::vector<double> runs;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != line.size()) throw ParseError(path.string(), number, "not a number: '" + line + "'");
    runs.push_back(v);
  }
  return runs;
}

int run_fit_durations(const DurationArgs& a, const fs::path& out_dir) {
  if (a.runs.has_value() == a.surveys.has_value())
    throw std::runtime_error("fit-durations: pass exactly one of --runs or --surveys");
  std::vector<double> runs;
  RunManifest manifest;
  manifest.command = "fit-durations";
  if (a.runs) {
    runs = read_runs(*a.runs);
    manifest.inputs = {*a.runs};
    manifest.config = {{"source", "runs"}};
  } else {
    const auto s = column_maxima(*a.surveys, {0, 1});
    const int agents = a.agents.value_or(s[1]);
    const int steps = a.steps.value_or(s[0]);
    if (agents < 1 || steps < 1)
      throw std::runtime_error("cannot infer dimensions; pass --agents and --steps");
    const ObservationMatrix y = load_surveys(*a.surveys, DynamicNetwork(agents, steps));
    if (a.symptom < 0 || a.symptom > y.num_symptoms())
      throw std::runtime_error("--symptom must be 0 (any) or in 1.." +
                               std::to_string(y.num_symptoms()));
    for (Agent n = 0; n < agents; ++n) {
      std::vector<int> seq(static_cast<std::size_t>(steps));
      for (Step t = 0; t < steps; ++t)
        seq[static_cast<std::size_t>(t)] = a.symptom == 0
                                               ? y.present_count(n, t) > 0
                                               : y.at(n, t, a.symptom - 1) == Report::present;
      for (int r : run_lengths(seq, !a.keep_censored)) runs.push_back(r);
    }
    manifest.inputs = {*a.surveys};
    manifest.config = {{"source", "surveys"},
                       {"agents", std::to_string(agents)},
                       {"steps", std::to_string(steps)},
                       {"symptom", a.symptom == 0 ? "any" : std::to_string(a.symptom)},
                       {"keep-censored", a.keep_censored ? "true" : "false"}};
  }
  if (runs.empty()) throw std::runtime_error("fit-durations: no symptom runs found");
  const ExponentialFit fit = fit_duration_exponential(runs);

  fs::create_directories(out_dir);
  const fs::path out = out_dir / "duration_fit.csv";
  std::ofstream file(out, std::ios::binary);
  file << "n,rate,mean,ks_statistic,ks_p_value\n"
       << runs.size() << ',' << format_number(fit.rate) << ',' << format_number(fit.mean()) << ','
       << format_number(fit.ks_statistic) << ',' << format_number(fit.ks_p_value) << '\n';
  file.close();
  manifest.outputs = {out};
  manifest.results = {{"runs", std::to_string(runs.size())},
                      {"mean", format_number(fit.mean())},
                      {"ks_p_value", format_number(fit.ks_p_value)}};
  finish(manifest, out_dir);
  return 0;
}

// ---------------------------------------------------------------------------

struct HeatmapArgs {
  fs::path marginals;
  fs::path contacts;
  std::optional<std::string> start_date;
};

int run_export_heatmap(const HeatmapArgs& a, const fs::path& out_dir) {
  const LabeledMatrix m = load_matrix(a.marginals);
  const int agents = static_cast<int>(m.values.rows());
  const int steps = static_cast<int>(m.values.cols());
  for (int i = 0; i < agents; ++i)
    if (m.row_labels[static_cast<std::size_t>(i)] != std::to_string(i + 1))
      throw std::runtime_error(a.marginals.string() + ": rows must be agents 1.." +
                               std::to_string(agents) + " in order");
  const DynamicNetwork network = load_contacts(a.contacts, agents, steps);
  const LabeledMatrix table = heatmap_table(m.values, network, a.start_date);

  fs::create_directories(out_dir);
  const fs::path out = out_dir / "heatmap.csv";
  save_matrix(out, table);

  RunManifest manifest;
  manifest.command = "export-heatmap";
  manifest.config = {{"agents", std::to_string(agents)},
                     {"steps", std::to_string(steps)},
                     {"start-date", a.start_date.value_or("")},
                     {"ordering", "average-linkage 1/(1+contacts)"}};
  manifest.inputs = {a.marginals, a.contacts};
  manifest.outputs = {out};
  std::string order;
  for (const auto& label : table.row_labels) order += (order.empty() ? "" : ",") + label;
  manifest.results = {{"row_order", order}};
  finish(manifest, out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and Gibbs-sampler inference for SIS epidemics on contact networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", software_version());
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  fs::path out_dir = default_output_dir();
  std::string config_help = "key = value file; keys are long option names, flags override";
  const std::string out_help = std::string("output directory (default $") + kOutputEnv + " or .)";
  std::string unused_config;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, out_help);
    sub->add_option("--config", unused_config, config_help);
  };
  auto variant_option = [](CLI::App* sub, std::string& v) {
    sub->add_option("--variant", v, "independent or additive")
        ->check(CLI::IsMember({"independent", "additive"}))
        ->capture_default_str();
  };

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "forward-simulate states and surveys");
  common(simulate_cmd);
  simulate_cmd->add_option("--agents", sim.agents, "number of agents")->capture_default_str();
  simulate_cmd->add_option("--steps", sim.steps, "number of steps")->capture_default_str();
  simulate_cmd->add_option("--seed", sim.seed, "RNG seed (required)");
  simulate_cmd->add_option("--contacts", sim.contacts, "recorded contacts file instead of a synthetic network")
      ->check(CLI::ExistingFile);
  simulate_cmd->add_option("--groups", sim.groups)->capture_default_str();
  simulate_cmd->add_option("--within", sim.within, "within-group daily contact probability")
      ->capture_default_str();
  simulate_cmd->add_option("--cross", sim.cross, "cross-group daily contact probability")
      ->capture_default_str();
  simulate_cmd->add_option("--alpha", sim.alpha)->capture_default_str();
  simulate_cmd->add_option("--beta", sim.beta)->capture_default_str();
  simulate_cmd->add_option("--gamma", sim.gamma)->capture_default_str();
  simulate_cmd->add_option("--theta0", sim.theta0, "P(symptom | susceptible), one per symptom")
      ->delimiter(',');
  simulate_cmd->add_option("--theta1", sim.theta1, "P(symptom | infectious), one per symptom")
      ->delimiter(',');
  variant_option(simulate_cmd, sim.variant);
  simulate_cmd->add_option("--report-rate", sim.report_rate)->capture_default_str();
  simulate_cmd->add_option("--infected", sim.infected, "1-based agents infectious at step 1")
      ->delimiter(',');

  InferArgs inf;
  auto* infer_cmd = app.add_subcommand("infer", "Gibbs-sample latent states and parameters");
  common(infer_cmd);
  infer_cmd->add_option("--contacts", inf.contacts)->required()->check(CLI::ExistingFile);
  infer_cmd->add_option("--surveys", inf.surveys)->required()->check(CLI::ExistingFile);
  infer_cmd->add_option("--agents", inf.agents, "default: largest id in the inputs");
  infer_cmd->add_option("--steps", inf.steps, "default: largest step in the inputs");
  infer_cmd->add_option("--seed", inf.seed, "RNG seed (required)");
  infer_cmd->add_option("--iterations", inf.iterations)->capture_default_str();
  infer_cmd->add_option("--burn-in", inf.burn_in)->capture_default_str();
  infer_cmd->add_option("--thinning", inf.thinning)->capture_default_str();
  variant_option(infer_cmd, inf.variant);
  infer_cmd->add_option("--scan", inf.scan)->transform(CLI::CheckedTransformer(kScans));
  infer_cmd->add_option("--init", inf.init)->transform(CLI::CheckedTransformer(kInits));
  infer_cmd->add_option("--initial-infected", inf.initial_infected, "P(infectious at step 1)")
      ->capture_default_str();
  infer_cmd->add_option("--priors", inf.priors, "uniform or informative")->capture_default_str();

  BenchmarkArgs bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "hold-out imputation benchmark against the baseline");
  common(bench_cmd);
  BenchmarkConfig& bc = bench.config;
  bench_cmd->add_option("--series", bc.n_series)->capture_default_str();
  bench_cmd->add_option("--length", bc.series_length)->capture_default_str();
  bench_cmd->add_option("--agents", bc.n_agents)->capture_default_str();
  bench_cmd->add_option("--groups", bc.pattern.num_groups)->capture_default_str();
  bench_cmd->add_option("--within", bc.pattern.within_group)->capture_default_str();
  bench_cmd->add_option("--cross", bc.pattern.cross_group)->capture_default_str();
  bench_cmd->add_option("--holdout", bc.holdout_fraction)->capture_default_str();
  bench_cmd->add_option("--obs-noise", bc.observation_noise)->capture_default_str();
  bench_cmd->add_option("--net-noise", bc.network_noise)->capture_default_str();
  bench_cmd->add_option("--report-rate", bc.report_rate)->capture_default_str();
  bench_cmd->add_option("--alpha", bc.true_params.alpha)->capture_default_str();
  bench_cmd->add_option("--beta", bc.true_params.beta)->capture_default_str();
  bench_cmd->add_option("--gamma", bc.true_params.gamma)->capture_default_str();
  bench_cmd->add_option("--training-length", bc.training_length)->capture_default_str();
  bench_cmd->add_option("--seed", bc.seed)->capture_default_str();
  bench_cmd->add_option("--jobs", bc.jobs, "worker threads")->capture_default_str();
  bench_cmd->add_option("--iterations", bench.iterations)->capture_default_str();
  bench_cmd->add_option("--burn-in", bench.burn_in)->capture_default_str();
  variant_option(bench_cmd, bench.variant);
  bench_cmd->add_option("--priors", bench.priors)->capture_default_str();

  PermtestArgs perm;
  auto* perm_cmd = app.add_subcommand("permtest", "friendship/symptom permutation test");
  common(perm_cmd);
  perm_cmd->add_option("--friends", perm.friends, "agent_a,agent_b file")
      ->required()
      ->check(CLI::ExistingFile);
  perm_cmd->add_option("--surveys", perm.surveys)->required()->check(CLI::ExistingFile);
  perm_cmd->add_option("--agents", perm.agents);
  perm_cmd->add_option("--steps", perm.steps);
  perm_cmd->add_option("--symptom", perm.symptom, "1-based symptom, 0 for any")->capture_default_str();
  perm_cmd->add_option("--permutations", perm.permutations)->capture_default_str();
  perm_cmd->add_option("--seed", perm.seed)->capture_default_str();

  DurationArgs dur;
  auto* dur_cmd = app.add_subcommand("fit-durations", "exponential fit of symptom-run lengths");
  common(dur_cmd);
  dur_cmd->add_option("--runs", dur.runs, "file with header 'duration'")->check(CLI::ExistingFile);
  dur_cmd->add_option("--surveys", dur.surveys, "derive runs from a surveys file")
      ->check(CLI::ExistingFile);
  dur_cmd->add_option("--agents", dur.agents);
  dur_cmd->add_option("--steps", dur.steps);
  dur_cmd->add_option("--symptom", dur.symptom, "1-based symptom, 0 for any")->capture_default_str();
  dur_cmd->add_flag("--keep-censored", dur.keep_censored, "keep runs touching the last step");

  HeatmapArgs heat;
  auto* heat_cmd = app.add_subcommand("export-heatmap", "marginal heat map in contact-cluster order");
  common(heat_cmd);
  heat_cmd->add_option("--marginals", heat.marginals, "marginals.csv from infer")
      ->required()
      ->check(CLI::ExistingFile);
  heat_cmd->add_option("--contacts", heat.contacts)->required()->check(CLI::ExistingFile);
  heat_cmd->add_option("--start-date", heat.start_date, "YYYY-MM-DD label of step 1");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "sisnet: error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*simulate_cmd) return run_simulate(sim, out_dir);
    if (*infer_cmd) return run_infer(inf, out_dir);
    if (*bench_cmd) return run_benchmark_command(bench, out_dir);
    if (*perm_cmd) return run_permtest(perm, out_dir);
    if (*dur_cmd) return run_fit_durations(dur, out_dir);
    if (*heat_cmd) return run_export_heatmap(heat, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "sisnet: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
