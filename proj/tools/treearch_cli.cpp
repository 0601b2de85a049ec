#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "treearch/arrival_posterior.hpp"
#include "treearch/error.hpp"
#include "treearch/experiments.hpp"
#include "treearch/growth_models.hpp"
#include "treearch/history_sampler.hpp"
#include "treearch/inference.hpp"
#include "treearch/parallel.hpp"
#include "treearch/tree.hpp"

using json = nlohmann::ordered_json;
using namespace treearch;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Everything needed to rerun a command, plus wall time in the sidecar.
struct Manifest {
  std::string command;
  std::vector<std::string> inputs;
  json parameters = json::object();

  json to_json() const {
    return {{"command", command}, {"inputs", inputs}, {"parameters", parameters}, {"version", TREEARCH_VERSION}};
  }
};

struct Output {
  std::string path;           // empty: stdout
  std::string manifest_path;  // empty: <path>.manifest.json, or none for stdout
};

json number(double x) {
  return std::isfinite(x) ? json(x) : json(nullptr);
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Tree load_tree(const std::string& path) {
  return parse_edge_list(read_file(path));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\r') {
      if (!field.empty()) out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (!field.empty()) out.push_back(std::move(field));
  return out;
}

// Node labels separated by whitespace, commas or newlines; '#' comments.
std::vector<NodeId> load_nodes(const Tree& tree, const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<NodeId> nodes;
  for (std::string line; std::getline(in, line);) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    for (const auto& label : split_fields(line)) nodes.push_back(tree.index_of(label));
  }
  return nodes;
}

// "label,arrival-time" lines; an optional header line is skipped.
History load_history(const Tree& tree, const std::string& path) {
  std::istringstream in(read_file(path));
  const NodeId n = tree.size();
  std::vector<NodeId> order(static_cast<std::size_t>(n), kNoNode);
  NodeId seen = 0;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    long t = -1;
    std::size_t used = 0;
    try {
      t = std::stol(fields.size() == 2 ? fields[1] : "", &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (fields.size() != 2 || used != fields[1].size()) {
      if (seen == 0 && line_no == 1) continue;  // header
      throw Error(ErrorKind::MalformedLine, "cli", path + ":" + std::to_string(line_no) + ": expected label,time");
    }
    if (t < 0 || t >= n || order[t] != kNoNode)
      throw Error(ErrorKind::NotAPermutation, "cli", path + ":" + std::to_string(line_no) + ": bad time");
    order[t] = tree.index_of(fields[0]);
    ++seen;
  }
  if (seen != n) throw Error(ErrorKind::NotAPermutation, "cli", path + ": " + std::to_string(seen) + " of " +
                                                                    std::to_string(n) + " nodes have times");
  return is_consistent(tree, order);
}

std::vector<std::string> labels_of(const Tree& tree, std::span<const NodeId> nodes) {
  std::vector<std::string> out;
  out.reserve(nodes.size());
  for (NodeId v : nodes) out.push_back(tree.label(v));
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

void emit(const Output& out, const std::string& text, const Manifest& m, double seconds,
          const std::vector<std::string>& other_outputs = {}) {
  write_text(out.path, text);
  std::string sidecar = out.manifest_path;
  if (sidecar.empty() && !out.path.empty() && out.path != "-") sidecar = out.path + ".manifest.json";
  if (sidecar.empty()) return;
  json j = m.to_json();
  j["outputs"] = other_outputs;
  j["outputs"].push_back(out.path.empty() ? "-" : out.path);
  j["threads"] = default_thread_count();
  j["wall_time_seconds"] = seconds;
  write_text(sidecar, j.dump(2) + "\n");
}

std::string dump(json j, const Manifest& m) {
  json doc = m.to_json();
  for (auto& [k, v] : j.items()) doc[k] = std::move(v);
  return doc.dump(2) + "\n";
}

std::string csv_number(double x) {
  if (!std::isfinite(x)) return "nan";
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

json interval_json(double lo, double hi) {
  return json::array({number(lo), number(hi)});
}

json grid_json(const Eigen::VectorXd& grid) {
  return vector_json(grid);
}

std::string grid_spec(const std::string& s) {
  return s.empty() ? "-2:3:0.05" : s;
}

json kernel_posterior_json(const KernelPosterior& p) {
  return {{"grid", grid_json(p.grid)},
          {"log_evidence", vector_json(p.log_evidence)},
          {"std_error", vector_json(p.std_error)},
          {"mass", vector_json(p.mass)},
          {"mean", number(p.mean)},
          {"map", number(p.map)},
          {"ci50", interval_json(p.ci50.lower, p.ci50.upper)},
          {"ci95", interval_json(p.ci95.lower, p.ci95.upper)}};
}

struct Common {
  std::uint64_t seed = 1;
  std::string format = "json";
  Output out;
};

void add_common(CLI::App* sub, Common& c, bool seeded = true) {
  if (seeded) sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub->add_option("-o,--output", c.out.path, "Primary output file (default: stdout)");
  sub->add_option("--manifest", c.out.manifest_path,
                  "Run manifest file (default: <output>.manifest.json when --output is given)");
}

void add_format(CLI::App* sub, Common& c) {
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inference over the unobserved growth histories of trees."};
  app.require_subcommand(1);
  app.footer(
      "Environment:\n"
      "  TREEARCH_THREADS  default worker thread count for sampling loops (default: hardware concurrency).\n"
      "                    Results do not depend on it.\n\n"
      "Input: edge lists with one \"u v\" pair per line; '#' starts a comment.\n"
      "Exit status: 0 success, 1 usage error, 2 data error, 3 numerical failure.");
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (overrides TREEARCH_THREADS)")->check(CLI::PositiveNumber);

  Common common;
  std::string edges_path, initial_path, history_path, model_spec = "uniform", grid = "", stat_name = "excess-degree";
  std::string model_a, model_b, experiment, prefix = "tree";
  std::size_t count = 0, samples = 100;
  bool exact = false;
  std::size_t mc = 0;
  NodeId grow_n = 0;
  std::size_t trees = 0, replicates = 0;
  NodeId size_override = 0;

  auto* validate = app.add_subcommand("validate", "Parse an edge list and report size and validity");
  validate->add_option("edges", edges_path, "Edge list")->required();
  add_common(validate, common, false);

  auto* arrival = app.add_subcommand("arrival-times", "Posterior arrival-time distribution of every node");
  arrival->add_option("edges", edges_path, "Edge list")->required();
  auto* exact_flag = arrival->add_flag("--exact", exact, "Exact posterior under uniform attachment (default)");
  arrival->add_option("--mc", mc, "Monte Carlo estimate from S sampled histories")->excludes(exact_flag);
  arrival->add_option("--model", model_spec, "Growth model for Monte Carlo reweighting")->capture_default_str();
  add_common(arrival, common);
  add_format(arrival, common);

  auto* sample = app.add_subcommand("sample", "Uniform consistent histories as JSON lines");
  sample->add_option("edges", edges_path, "Edge list")->required();
  sample->add_option("--count", count, "Number of histories")->required();
  sample->add_option("--initial", initial_path, "Known snapshot: file of node labels; samples completions");
  add_common(sample, common);

  auto* interp = app.add_subcommand("interpolate", "Trajectory of a statistic between a snapshot and the tree");
  interp->add_option("edges", edges_path, "Edge list")->required();
  interp->add_option("--initial", initial_path, "File of node labels present at the start")->required();
  interp->add_option("--stat", stat_name, "excess-degree, mean-degree, max-degree or node-count")
      ->capture_default_str();
  interp->add_option("--count", count, "Number of sampled completions")->required();
  add_common(interp, common);
  add_format(interp, common);

  auto* fit = app.add_subcommand("fit-kernel", "Posterior over the attachment-kernel exponent");
  fit->add_option("edges", edges_path, "Edge list")->required();
  fit->add_option("--samples", samples, "Number of sampled histories")->capture_default_str();
  fit->add_option("--grid", grid, "Exponent grid lo:hi:step (default -2:3:0.05)");
  fit->add_option("--history", history_path, "Known history (label,arrival-time); scored instead of sampling");
  add_common(fit, common);
  add_format(fit, common);

  auto* select = app.add_subcommand("model-select", "Log Bayes factor between two growth models");
  select->add_option("edges", edges_path, "Edge list")->required();
  select->add_option("--a", model_a, "Model A: uniform, kernel, kernel:gamma=X, redirection[:r=X]")->required();
  select->add_option("--b", model_b, "Model B")->required();
  select->add_option("--samples", samples, "Number of shared sampled histories")->capture_default_str();
  select->add_option("--grid", grid, "Exponent grid for a bare 'kernel' model (default -2:3:0.05)");
  add_common(select, common);

  auto* gen = app.add_subcommand("generate", "Grow a tree; writes <prefix>.edges and <prefix>.history.csv");
  gen->add_option("--model", model_spec, "Growth model spec")->required();
  gen->add_option("--n", grow_n, "Number of nodes")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", common.seed, "Random seed")->capture_default_str();
  gen->add_option("--prefix", prefix, "Output path prefix")->capture_default_str();
  gen->add_option("--manifest", common.out.manifest_path, "Run manifest (default: <prefix>.manifest.json)");

  auto* repro = app.add_subcommand("reproduce", "Desk-scale benchmark experiments");
  repro->add_option("experiment", experiment, "fig2a, fig2c or bayes")
      ->required()
      ->check(CLI::IsMember({"fig2a", "fig2c", "bayes"}));
  repro->add_option("--trees", trees, "fig2a: number of trees (default 300)");
  repro->add_option("--replicates", replicates, "bayes: trees per mechanism (default 20)");
  repro->add_option("--n", size_override, "Tree size (defaults 100 / 1000 / 2048)");
  repro->add_option("--samples", samples, "Sampled histories per tree (fig2c, bayes)")->capture_default_str();
  repro->add_option("--grid", grid, "fig2c: exponent grid (default -2:3:0.05)");
  add_common(repro, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return e.get_exit_code() == 0 ? code : kUsage;
  }
  if (threads > 0) ::setenv("TREEARCH_THREADS", std::to_string(threads).c_str(), 1);

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  try {
    Manifest m;
    if (*validate) {
      m.command = "validate";
      m.inputs = {edges_path};
      const Tree t = load_tree(edges_path);
      emit(common.out, dump({{"nodes", t.size()}, {"edges", t.edge_count()}, {"tree", true}}, m), m, elapsed());
    } else if (*arrival) {
      m.command = "arrival-times";
      m.inputs = {edges_path};
      const Tree t = load_tree(edges_path);
      const GrowthModel model = GrowthModel::parse(model_spec);
      if (mc == 0) {
        if (model.kind != GrowthModel::Kind::Uniform && model != GrowthModel::kernel(0.0))
          throw UsageError("--exact computes the uniform-attachment posterior; use --mc S for --model " + model_spec);
        m.parameters = {{"mode", "exact"}, {"model", "uniform"}};
        const ArrivalPosterior post = arrival_posterior(t);
        const Eigen::VectorXd mean = posterior_mean_times(post);
        const auto ci50 = credible_intervals(post, 0.5);
        const auto ci95 = credible_intervals(post, 0.95);
        std::string text;
        if (common.format == "csv") {
          text = "label,mean,ci50_lower,ci50_upper,ci95_lower,ci95_upper";
          for (NodeId time = 0; time < t.size(); ++time) text += ",p" + std::to_string(time);
          text += "\n";
          for (NodeId i = 0; i < t.size(); ++i) {
            text += t.label(i) + "," + csv_number(mean[i]) + "," + std::to_string(ci50[i].lower) + "," +
                    std::to_string(ci50[i].upper) + "," + std::to_string(ci95[i].lower) + "," +
                    std::to_string(ci95[i].upper);
            for (NodeId time = 0; time < t.size(); ++time) text += "," + csv_number(post.P(i, time));
            text += "\n";
          }
        } else {
          json nodes = json::array();
          for (NodeId i = 0; i < t.size(); ++i) {
            json row = json::array();
            for (NodeId time = 0; time < t.size(); ++time) row.push_back(post.P(i, time));
            nodes.push_back({{"label", t.label(i)},
                             {"mean", mean[i]},
                             {"ci50", {ci50[i].lower, ci50[i].upper}},
                             {"ci95", {ci95[i].lower, ci95[i].upper}},
                             {"p", std::move(row)}});
          }
          text = dump({{"log_histories", post.log_Z}, {"nodes", std::move(nodes)}}, m);
        }
        emit(common.out, text, m, elapsed());
      } else {
        m.parameters = {{"mode", "mc"}, {"model", model.spec()}, {"samples", mc}, {"seed", common.seed}};
        const ReweightedTimes r = reweighted_arrival_times(t, model, mc, common.seed);
        std::string text;
        if (common.format == "csv") {
          text = "label,mean,std_error\n";
          for (NodeId i = 0; i < t.size(); ++i)
            text += t.label(i) + "," + csv_number(r.mean[i]) + "," + csv_number(r.std_error[i]) + "\n";
        } else {
          json nodes = json::array();
          for (NodeId i = 0; i < t.size(); ++i)
            nodes.push_back({{"label", t.label(i)}, {"mean", number(r.mean[i])}, {"std_error", number(r.std_error[i])}});
          text = dump({{"effective_sample_size", r.effective_sample_size}, {"nodes", std::move(nodes)}}, m);
        }
        emit(common.out, text, m, elapsed());
      }
    } else if (*sample) {
      m.command = "sample";
      m.inputs = {edges_path};
      const Tree t = load_tree(edges_path);
      m.parameters = {{"count", count}, {"seed", common.seed}};
      std::string text;
      if (initial_path.empty()) {
        const std::vector<History> hs = draw_histories(t, count, common.seed);
        for (const auto& h : hs)
          text += json{{"seed", t.label(h.seed())}, {"order", labels_of(t, h.order)}}.dump() + "\n";
      } else {
        m.inputs.push_back(initial_path);
        const std::vector<NodeId> initial = load_nodes(t, initial_path);
        const BridgeSampler bridge(t, initial);
        const auto initial_labels = labels_of(t, bridge.initial());
        for (std::size_t s = 0; s < count; ++s) {
          Rng rng = Rng::stream(common.seed, s);
          text += json{{"initial", initial_labels}, {"order", labels_of(t, bridge.sample(rng))}}.dump() + "\n";
        }
      }
      emit(common.out, text, m, elapsed());
    } else if (*interp) {
      m.command = "interpolate";
      m.inputs = {edges_path, initial_path};
      const Tree t = load_tree(edges_path);
      const Statistic stat = parse_statistic(stat_name);
      m.parameters = {{"stat", std::string(to_string(stat))}, {"count", count}, {"seed", common.seed},
                      {"band", {0.025, 0.975}}};
      const TrajectoryStat tr = interpolate_statistic(t, load_nodes(t, initial_path), stat, count, common.seed);
      std::string text;
      if (common.format == "csv") {
        text = "nodes,mean,lower,upper\n";
        for (Eigen::Index k = 0; k < tr.mean.size(); ++k)
          text += csv_number(tr.nodes[k]) + "," + csv_number(tr.mean[k]) + "," + csv_number(tr.lower[k]) + "," +
                  csv_number(tr.upper[k]) + "\n";
      } else {
        text = dump({{"nodes", vector_json(tr.nodes)},
                     {"mean", vector_json(tr.mean)},
                     {"lower", vector_json(tr.lower)},
                     {"upper", vector_json(tr.upper)}},
                    m);
      }
      emit(common.out, text, m, elapsed());
    } else if (*fit) {
      m.command = "fit-kernel";
      m.inputs = {edges_path};
      const Tree t = load_tree(edges_path);
      const Eigen::VectorXd g = parse_grid(grid_spec(grid));
      KernelPosterior post;
      if (history_path.empty()) {
        m.parameters = {{"mode", "sampled"}, {"samples", samples}, {"seed", common.seed}};
        post = kernel_posterior(t, samples, g, common.seed);
      } else {
        m.inputs.push_back(history_path);
        m.parameters = {{"mode", "known-history"}};
        const History h = load_history(t, history_path);
        post = kernel_posterior(t, std::span<const History>(&h, 1), g);
      }
      m.parameters["grid"] = grid_spec(grid);
      m.parameters["prior"] = "uniform on grid";
      std::string text;
      if (common.format == "csv") {
        text = "gamma,log_evidence,std_error,mass\n";
        for (Eigen::Index k = 0; k < post.grid.size(); ++k)
          text += csv_number(post.grid[k]) + "," + csv_number(post.log_evidence[k]) + "," +
                  csv_number(post.std_error[k]) + "," + csv_number(post.mass[k]) + "\n";
      } else {
        text = dump(kernel_posterior_json(post), m);
      }
      emit(common.out, text, m, elapsed());
    } else if (*select) {
      m.command = "model-select";
      m.inputs = {edges_path};
      const Tree t = load_tree(edges_path);
      const Eigen::VectorXd g = parse_grid(grid_spec(grid));
      const Hypothesis a = Hypothesis::parse(model_a, g), b = Hypothesis::parse(model_b, g);
      m.parameters = {{"a", a.spec()}, {"b", b.spec()}, {"samples", samples}, {"seed", common.seed}};
      if (a.integrate_gamma || b.integrate_gamma) {
        m.parameters["grid"] = grid_spec(grid);
        m.parameters["prior"] = "uniform on grid, trapezoid rule";
      }
      const BayesFactor k = log_bayes_factor(t, a, b, samples, common.seed);
      emit(common.out,
           dump({{"log_K", number(k.log_K)},
                 {"std_error", number(k.std_error)},
                 {"log_evidence_a", number(k.log_evidence_a)},
                 {"log_evidence_b", number(k.log_evidence_b)}},
                m),
           m, elapsed());
    } else if (*gen) {
      m.command = "generate";
      const GrowthModel model = GrowthModel::parse(model_spec);
      m.parameters = {{"model", model.spec()}, {"n", grow_n}, {"seed", common.seed}};
      const GrownTree g = generate(model, grow_n, common.seed);
      std::ostringstream edges;
      write_edge_list(edges, g.tree);
      std::string times = "label,arrival_time\n";
      for (NodeId t = 0; t < g.tree.size(); ++t) times += g.tree.label(g.history.order[t]) + "," + std::to_string(t) + "\n";
      write_text(prefix + ".edges", edges.str());
      Output out{prefix + ".history.csv", common.out.manifest_path.empty() ? prefix + ".manifest.json"
                                                                          : common.out.manifest_path};
      emit(out, times, m, elapsed(), {prefix + ".edges"});
    } else if (*repro) {
      namespace ex = treearch::experiments;
      m.command = "reproduce " + experiment;
      json result;
      if (experiment == "fig2a") {
        const std::size_t k = trees ? trees : 300;
        const NodeId n = size_override ? size_override : 100;
        m.parameters = {{"trees", k}, {"n", n}, {"seed", common.seed}, {"model", "uniform"}};
        const ex::ArchaeologyResult r = ex::archaeology(k, n, common.seed);
        auto summary = [](const ex::CorrelationSummary& s) { return json{{"mean", s.mean}, {"std_dev", s.std_dev}}; };
        result = {{"pearson", {{"posterior_mean", summary(r.posterior_pearson)},
                               {"degree", summary(r.degree_pearson)},
                               {"degree_index_ties", summary(r.degree_index_pearson)}}},
                  {"spearman", {{"posterior_mean", summary(r.posterior_spearman)}, {"degree", summary(r.degree_spearman)}}},
                  {"reference", {{"posterior_mean", 0.754}, {"degree", 0.654}}}};
      } else if (experiment == "fig2c") {
        const NodeId n = size_override ? size_override : 1000;
        const Eigen::VectorXd g = parse_grid(grid_spec(grid));
        m.parameters = {{"gammas", {0.0, 1.0 / 3, 2.0 / 3, 1.0}}, {"n", n}, {"samples", samples},
                        {"grid", grid_spec(grid)}, {"prior", "uniform on grid"}, {"seed", common.seed}};
        const ex::KernelRecoveryResult r = ex::kernel_recovery({0.0, 1.0 / 3, 2.0 / 3, 1.0}, n, samples, g, common.seed);
        json rows = json::array();
        for (const auto& row : r.rows) {
          json j = kernel_posterior_json(row.posterior);
          j["gamma"] = row.gamma;
          rows.push_back(std::move(j));
        }
        result = {{"rows", std::move(rows)}};
      } else {
        const std::size_t k = replicates ? replicates : 20;
        const NodeId n = size_override ? size_override : 2048;
        const GrowthModel a = GrowthModel::kernel(1.0), b = GrowthModel::redirection(0.5);
        m.parameters = {{"a", a.spec()}, {"b", b.spec()}, {"replicates", k}, {"n", n}, {"samples", samples},
                        {"seed", common.seed}};
        const ex::ModelSelectionResult r = ex::model_selection(a, b, k, n, samples, common.seed);
        json rows = json::array();
        for (const auto& row : r.rows)
          rows.push_back({{"generator", row.generator},
                          {"replicate", row.replicate},
                          {"log_K", number(row.factor.log_K)},
                          {"std_error", number(row.factor.std_error)},
                          {"correct", row.correct}});
        result = {{"correct", r.correct()}, {"total", r.rows.size()}, {"mean_abs_log_K", r.mean_abs_log_K()},
                  {"rows", std::move(rows)}};
      }
      emit(common.out, dump(std::move(result), m), m, elapsed());
    }
  } catch (const UsageError& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.is_numerical() ? kNumerical : kData;
  } catch (const IoError& e) {
    std::cerr << "cli: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}
