#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "linbp/beliefs.hpp"
#include "linbp/bp.hpp"
#include "linbp/coupling.hpp"
#include "linbp/eval.hpp"
#include "linbp/graph.hpp"
#include "linbp/linbp.hpp"
#include "linbp/sbp.hpp"
#include "linbp/synth.hpp"
#include "linbp/text_io.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace linbp;

enum Exit : int { kOk = 0, kInputError = 1, kNotConverged = 2, kVerifyMismatch = 3 };

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string method = "linbp";
  std::string solver = "iterate";
  double epsilon_h = 1.0;
  int max_iters = 100;
  double tol = 1e-8;
  double tie_tol = 0.0;
  std::string graph;
  std::string beliefs;
  std::string coupling;
  std::string output;
  RngSpec rng;
  std::size_t dense_limit = kDefaultDenseLimit;
  unsigned threads = 1;
  bool normalized = false;
  std::size_t nodes = 0;
  // Options that only some commands use.
  json extra = json::object();

  json to_json() const {
    json j;
    j["command"] = command;
    j["method"] = method;
    j["solver"] = solver;
    j["epsilon_h"] = epsilon_h;
    j["max_iters"] = max_iters;
    j["tol"] = tol;
    j["tie_tol"] = tie_tol;
    j["graph"] = graph;
    j["beliefs"] = beliefs;
    j["coupling"] = coupling;
    j["output"] = output;
    j["rng"] = {{"algorithm", rng.algorithm}, {"seed", rng.seed}};
    j["dense_limit"] = dense_limit;
    j["threads"] = threads;
    j["normalized"] = normalized;
    j["nodes"] = nodes;
    for (const auto& [key, value] : extra.items()) j[key] = value;
    return j;
  }
};

void check_config(const RunConfig& c) {
  if (!(c.epsilon_h > 0.0) || !std::isfinite(c.epsilon_h)) throw InputError("--epsilon-h must be positive");
  if (c.max_iters < 1) throw InputError("--max-iters must be positive");
  if (!(c.tol > 0.0)) throw InputError("--tol must be positive");
  if (!(c.tie_tol >= 0.0)) throw InputError("--tie-tol must be nonnegative");
  if (c.threads < 1) throw InputError("--threads must be positive");
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

void write_header(std::ostream& out, const std::string& kind, const json& config,
                  const json& status = nullptr) {
  out << "# linbp " << kind << '\n';
  out << "# config " << config.dump() << '\n';
  if (!status.is_null()) out << "# status " << status.dump() << '\n';
}

void write_json(const std::string& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("bad JSON in '" + path + "': " + e.what());
  }
}

Graph load_graph(const RunConfig& c) {
  if (c.graph.empty()) throw InputError("--graph is required");
  EdgeListOptions options;
  options.min_nodes = c.nodes;
  return load_edge_list_file(c.graph, options);
}

CouplingMatrix load_coupling(const RunConfig& c) {
  if (c.coupling.empty()) throw InputError("--coupling is required");
  return read_coupling_file(c.coupling);
}

ResidualCoupling residual_for(const CouplingMatrix& h, double epsilon) {
  return center(h).with_epsilon(epsilon);
}

BeliefMatrix output_view(const BeliefMatrix& b, bool normalized) {
  return normalized ? b.to_normalized() : b.to_residual();
}

void write_belief_file(const std::string& path, const RunConfig& c, const json& status,
                       const BeliefMatrix* b, const NodeLabels& labels) {
  auto out = open_output(path);
  write_header(out, "beliefs", c.to_json(), status);
  if (b) write_beliefs(out, output_view(*b, c.normalized), labels);
}

void write_top_file(const std::string& path, const RunConfig& c, const json& status,
                    const BeliefMatrix* b, const NodeLabels& labels) {
  auto out = open_output(path);
  write_header(out, "top-beliefs", c.to_json(), status);
  if (b) write_top_beliefs(out, top_beliefs(*b, c.tie_tol), labels);
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) parts.push_back(part);
  if (parts.size() != 3) throw InputError("--eps-log-grid expects start,stop,points");
  auto start = text::parse_double(text::trim(parts[0]));
  auto stop = text::parse_double(text::trim(parts[1]));
  auto points = text::parse_int<int>(text::trim(parts[2]));
  if (!start || !stop || !points) throw InputError("--eps-log-grid: bad number in '" + spec + "'");
  try {
    return log_grid(*start, *stop, *points);
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("--eps-log-grid: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// SBP state: the files written by `run --method sbp` and rewritten by `update`.

struct StatePaths {
  std::string prefix;
  std::string graph() const { return prefix + ".graph.tsv"; }
  std::string explicit_beliefs() const { return prefix + ".explicit.tsv"; }
  std::string coupling() const { return prefix + ".coupling.txt"; }
  std::string beliefs() const { return prefix + ".beliefs.tsv"; }
  std::string top() const { return prefix + ".top.tsv"; }
  std::string geodesic() const { return prefix + ".geodesic.tsv"; }
  std::string meta() const { return prefix + ".meta.json"; }
};

json label_list(const Graph& g) {
  if (g.labels().is_identity()) return nullptr;
  json names = json::array();
  for (NodeId v = 0; v < g.num_nodes(); ++v) names.push_back(g.labels().name(v));
  return names;
}

void write_state(const StatePaths& p, const SbpState& st, const RunConfig& c, json meta) {
  const auto config = c.to_json();
  const auto& labels = st.graph.labels();
  {
    auto out = open_output(p.graph());
    write_header(out, "graph", config);
    write_edge_list(out, st.graph);
  }
  {
    auto out = open_output(p.explicit_beliefs());
    write_header(out, "explicit-beliefs", config);
    write_beliefs(out, BeliefMatrix(st.explicit_beliefs, BeliefMode::residual), labels);
  }
  const BeliefMatrix b = st.belief_matrix();
  write_belief_file(p.beliefs(), c, nullptr, &b, labels);
  write_top_file(p.top(), c, nullptr, &b, labels);
  {
    auto out = open_output(p.geodesic());
    write_header(out, "geodesics", config);
    write_geodesics(out, st.geodesics, labels);
  }
  meta["state"] = {{"nodes", st.graph.num_nodes()},
                   {"classes", st.classes()},
                   {"directed_entries", st.graph.num_entries()},
                   {"explicit_nodes", BeliefMatrix(st.explicit_beliefs, BeliefMode::residual)
                                          .explicit_nodes()
                                          .size()},
                   {"max_geodesic", st.geodesics.max_level()},
                   {"labels", label_list(st.graph)}};
  write_json(p.meta(), meta);
}

struct LoadedState {
  SbpState state;
  RunConfig config;
  json meta;
  ResidualCoupling coupling;
};

RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    c.command = j.at("command");
    c.method = j.at("method");
    c.solver = j.at("solver");
    c.epsilon_h = j.at("epsilon_h");
    c.max_iters = j.at("max_iters");
    c.tol = j.at("tol");
    c.tie_tol = j.at("tie_tol");
    c.graph = j.at("graph");
    c.beliefs = j.at("beliefs");
    c.coupling = j.at("coupling");
    c.output = j.at("output");
    c.rng = {j.at("rng").at("algorithm"), j.at("rng").at("seed")};
    c.dense_limit = j.at("dense_limit");
    c.threads = j.at("threads");
    c.normalized = j.at("normalized");
    c.nodes = j.at("nodes");
  } catch (const json::exception& e) {
    throw InputError(std::string("state metadata is incomplete: ") + e.what());
  }
  return c;
}

LoadedState load_state(const StatePaths& p) {
  json meta = read_json(p.meta());
  if (!meta.contains("state") || !meta.contains("config")) {
    throw InputError("'" + p.meta() + "' is not an SBP state");
  }
  RunConfig c = config_from_json(meta["config"]);
  const auto& st = meta["state"];
  const std::size_t n = st.at("nodes");
  const int k = st.at("classes");

  NodeLabels labels;
  if (!st.at("labels").is_null()) labels = NodeLabels(st.at("labels").get<std::vector<std::string>>());
  std::ifstream graph_in(p.graph());
  if (!graph_in) throw InputError("cannot open '" + p.graph() + "'");
  const Graph nodes_only = Graph::from_edges(n, {}, labels);
  const auto edges = load_edges_for(graph_in, nodes_only);
  Graph g = Graph::from_edges(n, edges, labels);

  const CouplingMatrix h = read_coupling_file(p.coupling());
  if (h.k() != k) throw InputError("state coupling has the wrong class count");
  ResidualCoupling r = residual_for(h, c.epsilon_h);
  BeliefMatrix e = read_beliefs_file(p.explicit_beliefs(), g, k, BeliefMode::residual);
  BeliefMatrix b = read_beliefs_file(p.beliefs(), g, k,
                                     c.normalized ? BeliefMode::normalized : BeliefMode::residual)
                       .to_residual();
  std::ifstream geo_in(p.geodesic());
  if (!geo_in) throw InputError("cannot open '" + p.geodesic() + "'");
  auto distance = read_geodesics(geo_in, g);
  SbpState state = sbp_restore(std::move(g), r, e, b, std::move(distance));
  return {std::move(state), std::move(c), std::move(meta), std::move(r)};
}

// ---------------------------------------------------------------------------
// Commands

int cmd_run(RunConfig c) {
  check_config(c);
  if (c.output.empty()) throw InputError("--output is required");
  const Method method = parse_method(c.method);
  if (c.solver != "iterate" && c.solver != "closed") throw InputError("--solver must be iterate or closed");
  const Graph g = load_graph(c);
  const CouplingMatrix h = load_coupling(c);
  if (c.beliefs.empty()) throw InputError("--beliefs is required");
  const BeliefMatrix e = read_beliefs_file(c.beliefs, g, h.k(), BeliefMode::residual);
  const ResidualCoupling r = residual_for(h, c.epsilon_h);
  const DegreeVector d = degree_vector(g);

  json result;
  result["nodes"] = g.num_nodes();
  result["directed_entries"] = g.num_entries();
  result["classes"] = h.k();
  result["explicit_nodes"] = e.explicit_nodes().size();
  std::optional<BeliefMatrix> beliefs;
  bool converged = true;
  bool diverged = false;

  if (method == Method::sbp) {
    SbpState st = sbp_run(g, r, e);
    result["converged"] = true;
    result["max_geodesic"] = st.geodesics.max_level();
    result["edge_visits"] = sbp_edge_visit_count(st);
    json meta{{"tool", "linbp"}, {"config", c.to_json()}, {"result", result}};
    StatePaths paths{c.output};
    const json coupling_cfg = c.to_json();
    {
      auto out = open_output(paths.coupling());
      write_header(out, "coupling", coupling_cfg);
      write_coupling(out, h);
    }
    write_state(paths, st, c, meta);
    return kOk;
  }

  if (method == Method::bp) {
    BpOptions options;
    options.max_iters = c.max_iters;
    options.tol = c.tol;
    options.threads = c.threads;
    auto run = bp_run(g, r, e, options);
    converged = run.converged;
    result["iterations"] = run.iterations;
    result["edge_visits"] = bp_edge_visit_count(run);
    if (!run.change_history.empty()) result["final_change"] = run.change_history.back();
    beliefs = BeliefMatrix(std::move(run.residual), BeliefMode::residual);
  } else {
    const Variant variant = method == Method::linbp ? Variant::linbp : Variant::linbp_star;
    if (c.solver == "closed") {
      try {
        beliefs = linbp_closed_form(g, d, r, e, variant, c.dense_limit);
      } catch (const SingularSystemError& err) {
        converged = false;
        diverged = true;
        result["error"] = err.what();
      } catch (const SizeLimitError& err) {
        throw InputError(err.what());
      }
    } else {
      LinbpOptions options;
      options.max_iters = c.max_iters;
      options.tol = c.tol;
      options.threads = c.threads;
      try {
        auto run = linbp_iterate(g, d, r, e, variant, options);
        converged = run.converged;
        result["iterations"] = run.iterations;
        if (!run.residual_history.empty()) result["final_change"] = run.residual_history.back();
        beliefs = std::move(run.beliefs);
      } catch (const DivergenceError& err) {
        converged = false;
        diverged = true;
        result["iterations"] = err.iteration();
        result["error"] = err.what();
      }
    }
  }

  result["converged"] = converged;
  result["diverged"] = diverged;
  const json status{{"converged", converged}, {"diverged", diverged}};
  const BeliefMatrix* b = beliefs ? &*beliefs : nullptr;
  write_belief_file(c.output + ".beliefs.tsv", c, status, b, g.labels());
  write_top_file(c.output + ".top.tsv", c, status, b, g.labels());
  write_json(c.output + ".meta.json", {{"tool", "linbp"}, {"config", c.to_json()}, {"result", result}});
  if (!converged) {
    std::cerr << "linbp: " << method_name(method) << " did not converge"
              << (diverged ? " (diverged)" : "") << '\n';
    return kNotConverged;
  }
  return kOk;
}

json report_json(const ConvergenceReport& rep) {
  auto num = [](double x) -> json {
    if (std::isinf(x)) return "unbounded";
    return x;
  };
  json j;
  j["variant"] = variant_name(rep.variant);
  j["epsilon"] = rep.epsilon;
  j["rho"] = rep.rho;
  j["converges"] = rep.converges;
  j["rho_reliable"] = rep.rho_reliable;
  j["epsilon_exact"] = num(rep.epsilon_exact);
  j["epsilon_sufficient"] = num(rep.epsilon_sufficient);
  j["epsilon_simple"] = num(rep.epsilon_simple);
  j["epsilon_spectral_sufficient"] = num(rep.epsilon_spectral_sufficient);
  j["mooij_bound_satisfied"] =
      rep.mooij_bound_satisfied ? json(*rep.mooij_bound_satisfied) : json(nullptr);
  return j;
}

int cmd_converge(RunConfig c) {
  check_config(c);
  const Graph g = load_graph(c);
  if (g.num_nodes() == 0) throw InputError("graph is empty");
  const CouplingMatrix h = load_coupling(c);
  const ResidualCoupling r = residual_for(h, c.epsilon_h);
  const DegreeVector d = degree_vector(g);
  std::vector<Variant> variants;
  const std::string which = c.extra.value("variant", std::string("both"));
  if (which == "both") {
    variants = {Variant::linbp, Variant::linbp_star};
  } else {
    variants = {parse_variant(which)};
  }

  std::ostringstream text;
  json reports = json::array();
  std::vector<ConvergenceReport> computed;
  for (Variant v : variants) {
    computed.push_back(convergence_report(g, d, r, v));
    write_report_text(text, computed.back());
    reports.push_back(report_json(computed.back()));
  }
  if (c.output.empty()) {
    std::cout << text.str();
    return kOk;
  }
  {
    auto out = open_output(c.output + ".report.txt");
    write_header(out, "convergence-report", c.to_json());
    out << text.str();
  }
  for (const auto& rep : computed) {
    auto out = open_output(c.output + "." + variant_name(rep.variant) + ".csv");
    write_header(out, "convergence-probes", c.to_json());
    write_report_csv(out, rep);
  }
  write_json(c.output + ".meta.json", {{"tool", "linbp"}, {"config", c.to_json()}, {"reports", reports}});
  return kOk;
}

int cmd_generate(RunConfig c, const std::string& seed_path, int power, double fraction, int classes,
                 std::optional<double> delta_fraction, std::uint64_t delta_seed) {
  if (c.output.empty()) throw InputError("--output is required");
  if (classes < 2) throw InputError("--classes must be at least 2");
  SeedMatrix seed = SeedMatrix::star();
  if (!seed_path.empty()) {
    std::ifstream in(seed_path);
    if (!in) throw InputError("cannot open seed matrix '" + seed_path + "'");
    seed = read_seed(in);
  }
  const KroneckerGraph kg = kronecker_power(seed, power);
  const BeliefMatrix e = sample_explicit_beliefs(kg.graph, fraction, classes, c.rng);
  const std::size_t count = e.explicit_nodes().size();
  if (count == 0) std::cerr << "linbp: warning: no explicit beliefs sampled\n";
  const json config = c.to_json();

  {
    auto out = open_output(c.output + ".graph.tsv");
    write_header(out, "graph", config);
    write_edge_list(out, kg.graph);
  }
  {
    auto out = open_output(c.output + ".beliefs.tsv");
    write_header(out, "explicit-beliefs", config);
    write_beliefs(out, e, kg.graph.labels());
  }
  json result{{"seed_matrix", seed.describe()},
              {"power", power},
              {"nodes", kg.graph.num_nodes()},
              {"directed_entries_before_loop_removal", kg.entries_before_loop_removal},
              {"self_loops_removed", kg.self_loops_removed},
              {"directed_entries", kg.graph.num_entries()},
              {"explicit_nodes", count}};
  if (delta_fraction) {
    const BeliefMatrix delta =
        sample_belief_delta(kg.graph, e, *delta_fraction, {c.rng.algorithm, delta_seed});
    auto out = open_output(c.output + ".delta.tsv");
    write_header(out, "belief-delta", config);
    write_beliefs(out, delta, kg.graph.labels());
    result["delta_nodes"] = delta.explicit_nodes().size();
  }
  write_json(c.output + ".meta.json", {{"tool", "linbp"}, {"config", config}, {"result", result}});
  return kOk;
}

bool same_state(const SbpState& a, const SbpState& b, double tol, std::string& why) {
  if (a.geodesics.distance != b.geodesics.distance) {
    why = "geodesic numbers differ";
    return false;
  }
  const double scale = std::max(1.0, b.beliefs.cwiseAbs().maxCoeff());
  const double diff = (a.beliefs - b.beliefs).cwiseAbs().maxCoeff();
  if (diff > tol * scale) {
    why = "beliefs differ by " + text::format_double(diff);
    return false;
  }
  return true;
}

int cmd_update(const std::string& prefix, const std::string& new_beliefs,
               const std::string& new_edges, bool verify) {
  if (new_beliefs.empty() == new_edges.empty()) {
    throw InputError("pass exactly one of --new-beliefs and --new-edges");
  }
  StatePaths paths{prefix};
  LoadedState loaded = load_state(paths);
  SbpState& st = loaded.state;

  json record;
  std::size_t delta_size = 0;
  if (!new_beliefs.empty()) {
    const BeliefMatrix delta = read_beliefs_file(new_beliefs, st.graph, st.classes(), BeliefMode::residual);
    std::vector<BeliefRow> rows;
    for (NodeId v : delta.explicit_nodes()) rows.push_back({v, delta.values().row(v).transpose()});
    delta_size = rows.size();
    if (!rows.empty()) sbp_update_beliefs(st, rows);
    record = {{"kind", "beliefs"}, {"path", new_beliefs}, {"rows", delta_size}};
  } else {
    std::ifstream in(new_edges);
    if (!in) throw InputError("cannot open '" + new_edges + "'");
    const auto edges = load_edges_for(in, st.graph);
    delta_size = edges.size();
    if (!edges.empty()) sbp_update_edges(st, edges);
    record = {{"kind", "edges"}, {"path", new_edges}, {"edges", delta_size}};
  }

  if (verify) {
    const SbpState fresh =
        sbp_run(st.graph, loaded.coupling, BeliefMatrix(st.explicit_beliefs, BeliefMode::residual));
    std::string why;
    if (!same_state(st, fresh, 1e-10, why)) {
      std::cerr << "linbp: verify failed: " << why << '\n';
      return kVerifyMismatch;
    }
  }
  if (delta_size == 0) return kOk;

  record["rounds"] = st.stats.rounds;
  record["edge_visits"] = sbp_edge_visit_count(st);
  json meta = loaded.meta;
  if (!meta.contains("updates")) meta["updates"] = json::array();
  meta["updates"].push_back(record);
  write_state(paths, st, loaded.config, meta);
  return kOk;
}

int cmd_sweep(RunConfig c, const std::string& grid_spec, const std::vector<double>& epsilons,
              const std::vector<std::string>& methods, const std::string& ground_truth,
              const std::string& probe, double tol_power, bool include_uninformative) {
  check_config(c);
  if (c.output.empty()) throw InputError("--output is required");
  std::vector<double> grid;
  if (!grid_spec.empty()) grid = parse_grid(grid_spec);
  grid.insert(grid.end(), epsilons.begin(), epsilons.end());
  if (grid.empty()) throw InputError("give --eps-log-grid or --epsilons");
  for (double eps : grid) {
    if (!(eps > 0.0)) throw InputError("epsilon values must be positive");
  }

  const Graph g = load_graph(c);
  const CouplingMatrix h = load_coupling(c);
  if (c.beliefs.empty()) throw InputError("--beliefs is required");
  const BeliefMatrix e = read_beliefs_file(c.beliefs, g, h.k(), BeliefMode::residual);

  SweepOptions options;
  options.methods.clear();
  for (const auto& m : methods) options.methods.push_back(parse_method(m));
  options.ground_truth = parse_method(ground_truth);
  options.tie_tol = c.tie_tol;
  options.quality.exclude_uninformative = !include_uninformative;
  options.max_iters = c.max_iters;
  options.tol = c.tol;
  options.tol_power = tol_power;
  options.threads = c.threads;
  if (!probe.empty()) {
    auto v = g.labels().find(probe, g.num_nodes());
    if (!v) throw InputError("unknown probe node '" + probe + "'");
    options.probe = *v;
  }

  const SweepResult result = epsilon_sweep(g, degree_vector(g), center(h), e, grid, options);
  const json config = c.to_json();
  {
    auto out = open_output(c.output + ".sweep.csv");
    write_header(out, "sweep", config);
    write_sweep_csv(out, result);
  }
  json summaries = json::array();
  for (const auto& s : result.summaries()) {
    summaries.push_back({{"method", method_name(s.method)},
                         {"convergent_rows", s.convergent_rows},
                         {"mean_accuracy", s.mean_accuracy},
                         {"min_accuracy", s.min_accuracy}});
  }
  json meta{{"tool", "linbp"}, {"config", config}, {"grid", grid}, {"summaries", summaries}};
  meta["probe"] = result.probe ? json(g.labels().name(*result.probe)) : json(nullptr);
  write_json(c.output + ".meta.json", meta);
  return kOk;
}

void add_common(CLI::App* app, RunConfig& c) {
  app->add_option("--graph", c.graph, "Edge-list TSV");
  app->add_option("--coupling", c.coupling, "Coupling matrix file");
  app->add_option("--epsilon-h", c.epsilon_h, "Scale of the centered coupling");
  app->add_option("--nodes", c.nodes, "Minimum node count for integer ids");
  app->add_option("--output", c.output, "Output prefix");
  app->add_option("--threads", c.threads, "Worker threads");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linearized and single-pass belief propagation"};
  app.require_subcommand(1);

  RunConfig run_cfg;
  run_cfg.command = "run";
  auto* run = app.add_subcommand("run", "Run one inference method");
  add_common(run, run_cfg);
  run->add_option("--beliefs", run_cfg.beliefs, "Explicit residual beliefs TSV");
  run->add_option("--method", run_cfg.method, "bp, linbp, linbp_star or sbp");
  run->add_option("--solver", run_cfg.solver, "iterate or closed (LinBP only)");
  run->add_option("--max-iters", run_cfg.max_iters, "Iteration cap for bp and linbp");
  run->add_option("--tol", run_cfg.tol, "Per-entry stopping tolerance, 0 runs all iterations");
  run->add_option("--tie-tol", run_cfg.tie_tol, "Relative tolerance for tied top classes");
  run->add_option("--dense-limit", run_cfg.dense_limit, "Largest n*k for the closed-form solver");
  run->add_flag("--normalized", run_cfg.normalized, "Write beliefs as probabilities");

  RunConfig conv_cfg;
  conv_cfg.command = "converge";
  std::string variant = "both";
  auto* converge = app.add_subcommand("converge", "Convergence thresholds and spectral radii");
  add_common(converge, conv_cfg);
  converge->add_option("--variant", variant, "linbp, linbp_star or both");

  RunConfig gen_cfg;
  gen_cfg.command = "generate";
  std::string seed_path;
  int power = 5;
  double fraction = 0.05;
  int classes = 3;
  std::optional<double> delta_fraction;
  std::uint64_t delta_seed = 1;
  auto* generate = app.add_subcommand("generate", "Kronecker graph and sampled beliefs");
  generate->add_option("--seed-matrix", seed_path, "Seed matrix file (default: 3-node star)");
  generate->add_option("--power", power, "Kronecker power");
  generate->add_option("--fraction", fraction, "Fraction of explicit nodes");
  generate->add_option("--classes", classes, "Number of classes k");
  generate->add_option("--rng", gen_cfg.rng.algorithm, "RNG algorithm name");
  generate->add_option("--rng-seed", gen_cfg.rng.seed, "RNG seed");
  generate->add_option("--delta-fraction", delta_fraction, "Also sample a belief delta");
  generate->add_option("--delta-seed", delta_seed, "RNG seed of the delta");
  generate->add_option("--output", gen_cfg.output, "Output prefix");

  std::string state_prefix;
  std::string new_beliefs;
  std::string new_edges;
  bool verify = false;
  auto* update = app.add_subcommand("update", "Incremental SBP update of a saved state");
  update->add_option("--state", state_prefix, "Prefix written by run --method sbp")->required();
  update->add_option("--new-beliefs", new_beliefs, "Residual beliefs TSV to add");
  update->add_option("--new-edges", new_edges, "Edge-list TSV to add");
  update->add_flag("--verify", verify, "Compare against a from-scratch run");

  RunConfig sweep_cfg;
  sweep_cfg.command = "sweep";
  std::string grid_spec;
  std::vector<double> epsilons;
  std::vector<std::string> methods{"bp", "linbp", "linbp_star", "sbp"};
  std::string ground_truth = "bp";
  std::string probe;
  double tol_power = 0.0;
  bool include_uninformative = false;
  auto* sweep = app.add_subcommand("sweep", "Quality of each method across epsilon");
  add_common(sweep, sweep_cfg);
  sweep->add_option("--beliefs", sweep_cfg.beliefs, "Explicit residual beliefs TSV");
  sweep->add_option("--eps-log-grid", grid_spec, "start,stop,points");
  sweep->add_option("--epsilons", epsilons, "Explicit epsilon list")->delimiter(',');
  sweep->add_option("--methods", methods, "Methods to compare")->delimiter(',');
  sweep->add_option("--ground-truth", ground_truth, "Reference method");
  sweep->add_option("--probe", probe, "Node whose belief spread is reported (default: a deepest node)");
  sweep->add_option("--max-iters", sweep_cfg.max_iters, "Iteration cap for bp and linbp");
  sweep->add_option("--tol", sweep_cfg.tol, "Per-entry stopping tolerance, 0 runs all iterations");
  sweep->add_option("--tol-power", tol_power, "Scale tol by epsilon^p per row");
  sweep->add_option("--tie-tol", sweep_cfg.tie_tol, "Relative tolerance for tied top classes");
  sweep->add_flag("--include-uninformative", include_uninformative, "Score all-tied nodes too");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInputError;
  }

  try {
    if (*run) return cmd_run(run_cfg);
    if (*converge) {
      conv_cfg.extra["variant"] = variant;
      return cmd_converge(conv_cfg);
    }
    if (*generate) {
      gen_cfg.extra = {{"seed_matrix", seed_path}, {"power", power}, {"fraction", fraction},
                       {"classes", classes}};
      if (delta_fraction) {
        gen_cfg.extra["delta_fraction"] = *delta_fraction;
        gen_cfg.extra["delta_seed"] = delta_seed;
      }
      return cmd_generate(gen_cfg, seed_path, power, fraction, classes, delta_fraction, delta_seed);
    }
    if (*update) return cmd_update(state_prefix, new_beliefs, new_edges, verify);
    if (*sweep) {
      sweep_cfg.method = "sweep";
      sweep_cfg.extra = {{"eps_log_grid", grid_spec}, {"epsilons", epsilons},
                         {"methods", methods},        {"ground_truth", ground_truth},
                         {"probe", probe},            {"tol_power", tol_power},
                         {"include_uninformative", include_uninformative}};
      return cmd_sweep(sweep_cfg, grid_spec, epsilons, methods, ground_truth, probe, tol_power,
                       include_uninformative);
    }
  } catch (const std::exception& e) {
    std::cerr << "linbp: error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
