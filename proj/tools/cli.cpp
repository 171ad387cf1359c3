// Copyright 2026 The chainrule Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "chainrule/bracketing.hpp"
#include "chainrule/chain_eval.hpp"
#include "chainrule/dag_io.hpp"
#include "chainrule/ensemble.hpp"
#include "chainrule/error.hpp"
#include "chainrule/monomial.hpp"
#include "chainrule/reduction.hpp"
#include "chainrule/schedule.hpp"

namespace chainrule::cli {
namespace {

using Json = nlohmann::ordered_json;

struct Globals {
  std::string scalar;
  unsigned threads = 1;
  bool no_timing = false;
  bool json = false;
  std::optional<std::size_t> max_atoms;
  std::optional<std::size_t> max_k;
};

// Everything a command prints. Fields keep insertion order.
struct Report {
  std::string command;
  std::string input_digest;
  Json fields = Json::object();
  std::string witness_text;  // human form of fields["witness"]
  double wall_ms = 0;
};

std::string read_file(const std::string& path) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kInvalidInput, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kInvalidInput, "cannot write '" + path + "'");
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

template <class T>
Json tensor_json(const Tensor<T>& t) {
  Json data = Json::array();
  for (const T& v : t.data()) data.push_back(format_scalar(v));
  return Json{{"shape", t.shape()}, {"data", std::move(data)}};
}

template <class T>
std::string tensor_text(const Tensor<T>& t) {
  std::string out;
  auto row = [&](std::size_t begin, std::size_t end) {
    std::string r = "[";
    for (std::size_t i = begin; i < end; ++i) {
      if (i > begin) r += ", ";
      r += format_scalar(t[i]);
    }
    return r + "]";
  };
  if (t.order() == 1) return row(0, t.size());
  if (t.order() == 2) {
    out = "[";
    for (std::size_t r = 0; r < t.rows(); ++r) {
      if (r > 0) out += ", ";
      out += row(r * t.cols(), (r + 1) * t.cols());
    }
    return out + "]";
  }
  return "shape " + shape_string(t.shape()) + " data " + row(0, t.size());
}

std::string schedule_text(const Schedule& schedule, const DerivativeDag<Rational>* dag) {
  std::vector<std::string> values;
  auto show = [&](const Operand& o) -> std::string {
    if (const auto* s = std::get_if<StepOperand>(&o)) return "s" + std::to_string(s->index);
    const std::string& name = std::get<AtomOperand>(o).name;
    if (dag == nullptr) return name;
    return format_scalar(resolve_atom(AtomRef::parse(name), *dag));
  };
  std::optional<Replay> replay;
  if (dag != nullptr) replay = replay_schedule(schedule, *dag);
  std::string out;
  for (std::size_t i = 0; i < schedule.steps.size(); ++i) {
    const Step& step = schedule.steps[i];
    out += "s" + std::to_string(i) + " = " + show(step.a) + " * " + show(step.b);
    if (step.addend) out += " + " + show(*step.addend);
    if (step.accumulate_into) out += "  (into y" + std::to_string(*step.accumulate_into) + ")";
    if (replay) out += " -> " + format_scalar(replay->step_values[i]);
    out += "\n";
  }
  for (std::size_t t = 0; t < schedule.targets.size(); ++t) {
    out += "y" + std::to_string(t) + " <- ";
    for (std::size_t k = 0; k < schedule.targets[t].size(); ++k) {
      if (k > 0) out += " + ";
      out += show(schedule.targets[t][k]);
    }
    out += "\n";
  }
  return out;
}

std::string subsets_text(const std::vector<std::vector<std::uint64_t>>& subsets) {
  std::string out = "[";
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    if (i > 0) out += ", ";
    out += "{";
    for (std::size_t k = 0; k < subsets[i].size(); ++k) {
      if (k > 0) out += ",";
      out += std::to_string(subsets[i][k]);
    }
    out += "}";
  }
  return out + "]";
}

void print(const Report& report, const Globals& globals, std::ostream& out) {
  if (globals.json) {
    Json j;
    j["command"] = report.command;
    j["input_digest"] = report.input_digest;
    for (const auto& [key, value] : report.fields.items()) j[key] = value;
    if (!globals.no_timing) j["wall_ms"] = report.wall_ms;
    out << j.dump(2) << "\n";
    return;
  }
  out << "command: " << report.command << "\n";
  out << "input: " << report.input_digest << "\n";
  for (const auto& [key, value] : report.fields.items()) {
    if (key == "witness" && !report.witness_text.empty()) continue;
    out << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << "\n";
  }
  if (!report.witness_text.empty()) {
    out << "witness:\n";
    std::istringstream lines(report.witness_text);
    for (std::string line; std::getline(lines, line);) out << "  " << line << "\n";
  }
  if (!globals.no_timing) out << "wall_ms: " << report.wall_ms << "\n";
}

SearchConfig search_config(const Globals& g) {
  SearchConfig config;
  if (g.max_atoms) config.max_atoms = *g.max_atoms;
  if (g.max_k) config.max_k = *g.max_k;
  config.threads = g.threads;
  return config;
}

std::optional<ScalarKind> forced_kind(const Globals& g) {
  if (g.scalar.empty()) return std::nullopt;
  return parse_scalar_kind(g.scalar);
}

// ---- eval ----

struct EvalArgs {
  std::string dag_file;
  std::string order = "1";
  int p = 0;
  bool optimal_schedule = false;
  std::string factorize;
};

template <class T>
void eval_dag(const DerivativeDag<T>& dag, const EvalArgs& args, Report& report) {
  CostedTensor<T> result;
  if (args.order == "1") {
    if (dag.is_chain()) {
      result = chain_product(Chain<T>::from_dag(dag));
      report.fields["method"] = "chain product, right to left";
    } else {
      result = path_sum_jacobian(dag);
      report.fields["method"] = "path sum";
    }
  } else if (args.order == "2") {
    result = hessian_chain(Chain<T>::from_dag(dag));
    report.fields["method"] = "second-order chain rule";
  } else if (args.order == "p") {
    if (args.p < 1) fail(ErrorCode::kInvalidInput, "--order p needs --p N with N >= 1");
    result = reduction_pth_derivative(Chain<T>::from_dag(dag), args.p);
    report.fields["method"] = "diagonal chain of order " + std::to_string(args.p);
  } else {
    fail(ErrorCode::kInvalidInput, "--order must be 1, 2 or p");
  }
  report.fields["value"] = tensor_json(result.value);
  report.fields["value_text"] = tensor_text(result.value);
  report.fields["mults"] = result.mults;
  report.fields["adds"] = result.adds;
}

int cmd_eval(const EvalArgs& args, const Globals& g, Report& report) {
  const std::string text = read_file(args.dag_file);
  report.input_digest = digest(text);
  const AnyDag any = parse_dag_json(text, forced_kind(g));
  std::visit([&](const auto& dag) { eval_dag(dag, args, report); }, any);

  const bool wants_exact = args.optimal_schedule || !args.factorize.empty();
  if (!wants_exact) return kYes;
  const auto* dag = std::get_if<DerivativeDag<Rational>>(&any);
  if (dag == nullptr) fail(ErrorCode::kInvalidInput, "schedules and factorization need --scalar rational");
  const int p = args.order == "p" ? args.p : std::stoi(args.order);
  const Chain<Rational> chain = Chain<Rational>::from_dag(*dag);

  if (args.optimal_schedule) {
    const MinimumResult best = monomial_minimum(monomial_targets_from_chain(chain, p), search_config(g));
    const ScheduleVerdict verdict = verify_schedule(best.schedule, *dag, p);
    if (!verdict.ok) fail(ErrorCode::kInvalidSchedule, "optimal schedule failed to verify: " + verdict.reason);
    report.fields["reference_mults"] = report.fields["mults"];
    report.fields["mults"] = verdict.cost;
    report.fields["adds"] = verdict.adds;
    report.fields["optimum"] = best.minimum;
    report.fields["witness"] = Json::parse(schedule_to_json(best.schedule, -1));
    report.witness_text = schedule_text(best.schedule, dag);
  }
  if (!args.factorize.empty()) {
    const ReductionArtifact artifact = artifact_from_json(read_file(args.factorize));
    const Tensor<Rational> fp = reduction_pth_derivative(chain, p).value;
    const auto subsets = factorize_and_recover(fp, artifact.all_primes());
    report.fields["factorization"] = subsets;
    report.fields["factorization_text"] = subsets_text(subsets);
    report.fields["matches_artifact"] = subsets == artifact.padded_subsets;
    if (subsets != artifact.padded_subsets) return kNo;
  }
  return kYes;
}

// ---- bracket ----

int cmd_bracket(const std::vector<std::size_t>& dims, Report& report) {
  std::string joined;
  for (std::size_t d : dims) joined += std::to_string(d) + " ";
  report.input_digest = digest(joined);
  const Bracketing best = optimal_bracketing(dims);
  report.fields["dims"] = dims;
  report.fields["optimum"] = best.cost;
  report.fields["mults"] = best.cost;
  report.fields["witness"] = best.tree.to_string();
  return kYes;
}

// ---- schedule ----

struct ScheduleArgs {
  std::string file;
  std::optional<std::size_t> K;
  int p = 0;
  bool greedy = false;
  std::string out;
};

int cmd_schedule(const ScheduleArgs& args, const Globals& g, Report& report) {
  const std::string text = read_file(args.file);
  report.input_digest = digest(text);
  const nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::kParseError, "'" + args.file + "' is not JSON");

  MonomialInstance instance;
  std::optional<DerivativeDag<Rational>> dag;
  int p = args.p;
  if (j.contains("targets")) {
    instance = MonomialInstance::from_labels(j.at("targets").get<std::vector<std::vector<std::string>>>());
  } else {
    dag = parse_dag_json_as<Rational>(text);
    const Chain<Rational> chain = Chain<Rational>::from_dag(*dag);
    if (p < 1) p = dag->order_max();
    instance = monomial_targets_from_chain(chain, p);
  }
  report.fields["atoms"] = instance.atoms.size();
  report.fields["targets"] = instance.targets.size();

  Schedule schedule;
  int code = kYes;
  if (args.greedy) {
    schedule = greedy_schedule(instance);
    report.fields["method"] = "greedy";
    if (args.K) {
      report.fields["decision"] = schedule.cost() <= *args.K ? "yes" : "no";
      code = schedule.cost() <= *args.K ? kYes : kNo;
    }
  } else if (args.K) {
    const MinFmaResult r = monomial_min_fma(instance, *args.K, search_config(g));
    report.fields["K"] = *args.K;
    report.fields["decision"] = r.feasible ? "yes" : "no";
    report.fields["nodes"] = r.stats.nodes;
    if (!r.feasible) return kNo;
    schedule = *r.schedule;
    report.fields["optimum"] = *r.minimum;
  } else {
    const MinimumResult r = monomial_minimum(instance, search_config(g));
    report.fields["optimum"] = r.minimum;
    report.fields["nodes"] = r.stats.nodes;
    schedule = r.schedule;
  }
  report.fields["mults"] = schedule.cost();
  if (dag) {
    const ScheduleVerdict verdict = verify_schedule(schedule, *dag, p);
    report.fields["verified"] = verdict.ok;
    if (!verdict.ok) fail(ErrorCode::kInvalidSchedule, verdict.reason);
  }
  report.fields["witness"] = Json::parse(schedule_to_json(schedule, -1));
  report.witness_text = schedule_text(schedule, dag ? &*dag : nullptr);
  if (!args.out.empty()) write_file(args.out, schedule_to_json(schedule));
  return code;
}

// ---- ec ----

struct EcArgs {
  std::string file;
  std::string action = "solve";
  std::optional<std::size_t> K;
  std::string sequence;
  std::string out;
};

int cmd_ec(const EcArgs& args, const Globals& g, Report& report) {
  const std::string text = read_file(args.file);
  report.input_digest = digest(text);
  EnsembleInstance instance = ensemble_from_json(text);
  if (args.K) instance.K = *args.K;
  report.fields["K"] = instance.K;

  if (args.action == "solve") {
    EcCaps caps;
    if (g.max_atoms) caps.max_atoms = *g.max_atoms;
    if (g.max_k) caps.max_k = *g.max_k;
    caps.threads = g.threads;
    const EcSolution s = ec_solve_exact(instance, caps);
    report.fields["decision"] = s.decision ? "yes" : "no";
    report.fields["optimum"] = s.min_k;
    report.fields["nodes"] = s.stats.nodes;
    if (s.decision) {
      report.fields["witness"] = Json::parse(union_sequence_to_json(s.witness, -1));
      report.witness_text = describe(s.witness);
      if (!args.out.empty()) write_file(args.out, union_sequence_to_json(s.witness));
    }
    return s.decision ? kYes : kNo;
  }
  if (args.action == "verify") {
    if (args.sequence.empty()) fail(ErrorCode::kInvalidInput, "ec verify needs --sequence FILE");
    const UnionSequence seq = union_sequence_from_json(read_file(args.sequence));
    const EcVerdict verdict = ec_verify(seq, instance);
    report.fields["decision"] = verdict.ok ? "yes" : "no";
    report.fields["ops"] = seq.size();
    if (!verdict.ok) report.fields["reason"] = verdict.reason;
    report.witness_text = describe(seq);
    return verdict.ok ? kYes : kNo;
  }
  fail(ErrorCode::kInvalidInput, "ec action must be solve or verify");
}

// ---- reduce ----

struct ReduceArgs {
  std::string file;
  int p = 1;
  std::string artifact_out;
  std::string dag_out;
};

int cmd_reduce(const ReduceArgs& args, Report& report) {
  const std::string text = read_file(args.file);
  report.input_digest = digest(text);
  const ReductionArtifact artifact = reduce_to_crd(ensemble_from_json(text), args.p);
  Json primes = Json::object();
  for (std::size_t i = 0; i < artifact.atom_primes.size(); ++i) {
    primes[artifact.instance.A[i]] = artifact.atom_primes[i];
  }
  Json padding = Json::object();
  for (std::size_t i = 0; i < artifact.padding_primes.size(); ++i) {
    padding[artifact.padding_labels[i]] = artifact.padding_primes[i];
  }
  report.fields["atom_primes"] = primes;
  report.fields["padding_primes"] = padding;
  report.fields["padded_subsets"] = subsets_text(artifact.padded_subsets);
  report.fields["q"] = artifact.q;
  report.fields["p"] = artifact.p;
  report.fields["K_prime"] = artifact.k_prime;
  report.fields["dims"] = artifact.chain.dims();
  if (!args.artifact_out.empty()) write_file(args.artifact_out, artifact_to_json(artifact));
  if (!args.dag_out.empty()) write_file(args.dag_out, dag_to_json(artifact.chain.to_dag()));
  return kYes;
}

// ---- lift ----

int cmd_lift(const std::string& schedule_file, const std::string& artifact_file,
             const std::string& out, Report& report) {
  const std::string schedule_text_in = read_file(schedule_file);
  const std::string artifact_text = read_file(artifact_file);
  report.input_digest = digest(schedule_text_in + '\0' + artifact_text);
  const Schedule schedule = schedule_from_json(schedule_text_in);
  const ReductionArtifact artifact = artifact_from_json(artifact_text);
  const UnionSequence seq = lift_solution(schedule, artifact);
  EnsembleInstance original = artifact.instance;
  const EcVerdict verdict = ec_verify(seq, original);
  report.fields["schedule_mults"] = schedule.cost();
  report.fields["ops"] = seq.size();
  report.fields["K"] = original.K;
  report.fields["decision"] = verdict.ok ? "yes" : "no";
  report.fields["witness"] = Json::parse(union_sequence_to_json(seq, -1));
  report.witness_text = describe(seq);
  if (!out.empty()) write_file(out, union_sequence_to_json(seq));
  return verdict.ok ? kYes : kNo;
}

// ---- dot ----

template <class T>
std::string dot_text(const DerivativeDag<T>& dag, bool scalar_graph, int p) {
  if (scalar_graph) return to_dot(expand_chain(Chain<T>::from_dag(dag), p));
  return to_dot(dag);
}

int cmd_dot(const std::string& file, bool scalar_graph, int p, const Globals& g,
            std::ostream& out) {
  const AnyDag any = parse_dag_json(read_file(file), forced_kind(g));
  std::visit([&](const auto& dag) { out << dot_text(dag, scalar_graph, p); }, any);
  return kYes;
}

}  // namespace

std::string digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string out = "fnv1a:";
  for (int shift = 60; shift >= 0; shift -= 4) out += hex[(h >> shift) & 0xf];
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Chain rule accumulation, fma schedules and the Ensemble Computation reduction",
               "chainrule"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--scalar", g.scalar, "Scalar field for dag files")
      ->check(CLI::IsMember({"rational", "float"}));
  app.add_option("--threads", g.threads, "Worker threads for exact search")
      ->check(CLI::Range(1u, 256u));
  app.add_flag("--no-timing", g.no_timing, "Omit wall time from reports");
  app.add_flag("--json", g.json, "Emit the report as JSON");
  app.add_option("--max-atoms", g.max_atoms, "Atom cap for exact search");
  app.add_option("--max-k", g.max_k, "Cost cap for exact search");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate F', F'' or F^[p] of a dag file");
  eval_cmd->add_option("dag", eval.dag_file, "Dag JSON file")->required();
  eval_cmd->add_option("--order", eval.order, "1, 2 or p")->check(CLI::IsMember({"1", "2", "p"}));
  eval_cmd->add_option("--p", eval.p, "Derivative order for --order p");
  eval_cmd->add_flag("--optimal-schedule", eval.optimal_schedule,
                     "Report the exact minimal fma count of a diagonal chain");
  eval_cmd->add_option("--factorize", eval.factorize,
                       "Artifact file; factor F^[p] over its primes");

  std::vector<std::size_t> dims;
  auto* bracket_cmd = app.add_subcommand("bracket", "Optimal bracketing of a matrix chain");
  bracket_cmd->add_option("dims", dims, "n_0 n_1 ... n_q")->required();

  ScheduleArgs sched;
  auto* schedule_cmd = app.add_subcommand("schedule", "Minimal fma schedule for monomial targets");
  schedule_cmd->add_option("file", sched.file, "Targets JSON or diagonal chain dag")->required();
  schedule_cmd->add_option("-K", sched.K, "Decide whether K multiplications suffice");
  schedule_cmd->add_option("--p", sched.p, "Derivative order for dag input");
  schedule_cmd->add_flag("--greedy", sched.greedy, "Use the greedy heuristic");
  schedule_cmd->add_option("-o,--out", sched.out, "Write the schedule JSON here");

  EcArgs ec;
  auto* ec_cmd = app.add_subcommand("ec", "Solve or verify an Ensemble Computation instance");
  ec_cmd->add_option("instance", ec.file, "Instance JSON")->required();
  ec_cmd->add_option("action", ec.action, "solve or verify")
      ->check(CLI::IsMember({"solve", "verify"}));
  ec_cmd->add_option("-K", ec.K, "Override the instance's K");
  ec_cmd->add_option("--sequence", ec.sequence, "Union sequence JSON for verify");
  ec_cmd->add_option("-o,--out", ec.out, "Write the witness JSON here");

  ReduceArgs reduce;
  auto* reduce_cmd = app.add_subcommand("reduce", "Build the diagonal chain for an EC instance");
  reduce_cmd->add_option("instance", reduce.file, "Instance JSON")->required();
  reduce_cmd->add_option("--p", reduce.p, "Derivative order")->check(CLI::PositiveNumber);
  reduce_cmd->add_option("-o,--artifact", reduce.artifact_out, "Write the artifact JSON here");
  reduce_cmd->add_option("--dag-out", reduce.dag_out, "Write the chain's dag JSON here");

  std::string lift_schedule, lift_artifact, lift_out;
  auto* lift_cmd = app.add_subcommand("lift", "Turn a chain schedule into a union sequence");
  lift_cmd->add_option("schedule", lift_schedule, "Schedule JSON")->required();
  lift_cmd->add_option("artifact", lift_artifact, "Artifact JSON")->required();
  lift_cmd->add_option("-o,--out", lift_out, "Write the union sequence JSON here");

  std::string dot_file;
  bool dot_scalar = false;
  auto* dot_cmd = app.add_subcommand("dot", "Graphviz view of a dag file");
  dot_cmd->add_option("dag", dot_file, "Dag JSON file")->required();
  dot_cmd->add_flag("--scalar-graph", dot_scalar, "One node per component (chains only)");
  int dot_p = 1;
  dot_cmd->add_option("--p", dot_p, "Label input arcs with F_1^[p]")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kYes;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kYes;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }

  Report report;
  const auto start = std::chrono::steady_clock::now();
  int code = kYes;
  try {
    if (*eval_cmd) {
      report.command = "eval";
      code = cmd_eval(eval, g, report);
    } else if (*bracket_cmd) {
      report.command = "bracket";
      code = cmd_bracket(dims, report);
    } else if (*schedule_cmd) {
      report.command = "schedule";
      code = cmd_schedule(sched, g, report);
    } else if (*ec_cmd) {
      report.command = "ec " + ec.action;
      code = cmd_ec(ec, g, report);
    } else if (*reduce_cmd) {
      report.command = "reduce";
      code = cmd_reduce(reduce, report);
    } else if (*lift_cmd) {
      report.command = "lift";
      code = cmd_lift(lift_schedule, lift_artifact, lift_out, report);
    } else if (*dot_cmd) {
      return cmd_dot(dot_file, dot_scalar, dot_p, g, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
  report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  print(report, g, out);
  return code;
}

}  // namespace chainrule::cli
