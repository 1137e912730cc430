#include "nlcap/cli.hpp"

#include "nlcap/capacity.hpp"
#include "nlcap/covering.hpp"
#include "nlcap/graph.hpp"
#include "nlcap/modulus.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace nlcap {

namespace {

using nlohmann::json;

NormingFunction parse_phi(const std::string& text) {
  try {
    if (text == "l1") return NormingFunction::lp(1.0);
    if (text == "l2") return NormingFunction::lp(2.0);
    if (text.rfind("lp:", 0) == 0) return NormingFunction::lp(std::stod(text.substr(3)));
    if (text.rfind("lorentz:", 0) == 0)
      return NormingFunction::lorentz_p1(std::stod(text.substr(8)));
  } catch (const std::exception& e) {
    throw UsageError("bad gauge spec '" + text + "': " + e.what());
  }
  throw UsageError("unknown gauge spec '" + text + "' (l1, l2, lp:<p>, lorentz:<p>)");
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  const auto dots = text.find("..");
  try {
    if (dots != std::string::npos) {
      const int a = std::stoi(text.substr(0, dots));
      const int b = std::stoi(text.substr(dots + 2));
      if (b < a) throw UsageError("empty range '" + text + "'");
      for (int v = a; v <= b; ++v) out.push_back(v);
      return out;
    }
    std::istringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) out.push_back(std::stoi(tok));
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception&) {
    throw UsageError("bad integer list '" + text + "' (use a..b or comma-separated)");
  }
  if (out.empty()) throw UsageError("empty integer list '" + text + "'");
  return out;
}

std::vector<std::string> split_labels(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ';'))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SolveOptions solve_options(const Invocation& inv) {
  SolveOptions o;
  o.max_iters = inv.max_iters;
  o.tol = inv.tol;
  o.step_rule = parse_step_rule(inv.step_rule);
  o.seed = inv.seed;
  return o;
}

// Resolves a label list on a graph; "e" names the group identity when the
// graph came from a group ball.
std::vector<int> resolve_on_graph(const LabeledGraph& g, const std::string& labels,
                                  const GroupSpec* group) {
  std::string expanded;
  for (const auto& tok : split_labels(labels)) {
    if (!expanded.empty()) expanded += ';';
    expanded += (group && tok == "e") ? identity_label(*group) : tok;
  }
  return resolve_labels(g, expanded);
}

struct GraphSource {
  LabeledGraph graph;
  bool from_group = false;
  GroupSpec group;
};

GraphSource make_graph(const Invocation& inv) {
  GraphSource gs;
  if (!inv.graph_file.empty()) {
    std::ifstream in(inv.graph_file);
    if (!in) throw UsageError("cannot open graph file '" + inv.graph_file + "'");
    gs.graph = load_graph(in);
    return gs;
  }
  gs.from_group = true;
  gs.group = parse_group(inv.group);
  gs.graph = cayley_ball(gs.group, inv.radius);
  return gs;
}

json profile_json(const std::vector<ProfilePoint>& profile) {
  json rows = json::array();
  for (const auto& pt : profile)
    rows.push_back({{"R", pt.radius},
                    {"value", pt.value},
                    {"iterations", pt.iterations},
                    {"tolerance_met", pt.tolerance_met}});
  return rows;
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

std::string csv_pairs(const std::vector<std::pair<std::string, std::string>>& kv) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& [k, v] : kv) rows.push_back({k, v});
  return csv_table({"key", "value"}, rows);
}

ShapeSpec shape_spec(const Invocation& inv) {
  ShapeSpec spec;
  spec.shape = parse_shape(inv.shape);
  spec.dim = spec.shape == CellShape::Cube ? inv.dim : (spec.shape == CellShape::Carpet ? 2 : 1);
  spec.level = inv.level;
  spec.lebesgue = !inv.equal_mass;
  return spec;
}

}  // namespace

Invocation parse_invocation(const std::vector<std::string>& args) {
  Invocation inv;
  inv.argv_echo = args;

  CLI::App app{"nonlinear condenser capacities on graphs, matrix tuples, and coverings", "nlcap"};
  app.require_subcommand(1);

  auto add_io = [&](CLI::App* sub, bool solver_opts) {
    sub->add_option("--phi", inv.phi, "gauge: l1, l2, lp:<p>, lorentz:<p>")->capture_default_str();
    sub->add_option("--seed", inv.seed, "random seed for all derived randomness")->capture_default_str();
    sub->add_option("--format", inv.format, "report format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    sub->add_option("--output", inv.output, "output path, '-' for stdout")->capture_default_str();
    sub->add_flag("--timing", inv.timing, "include wall-clock timing in the report");
    if (solver_opts) {
      sub->add_option("--max-iters", inv.max_iters, "iteration cap")->capture_default_str();
      sub->add_option("--tol", inv.tol, "relative improvement stopping tolerance")->capture_default_str();
      sub->add_option("--step-rule", inv.step_rule, "polyak or diminishing")
          ->check(CLI::IsMember({"polyak", "diminishing"}))
          ->capture_default_str();
    }
  };

  std::string radii_text = "1..6", levels_text = "2..5";

  auto* cap = app.add_subcommand("cap-graph", "condenser value on a graph or group ball");
  cap->add_option("--group", inv.group, "z:<d> or free:<k>");
  cap->add_option("--graph-file", inv.graph_file, "load a graph file instead of a group ball");
  cap->add_option("--radius", inv.radius, "ball radius (interior)")->capture_default_str();
  cap->add_option("--source", inv.source, "';'-separated source labels; e = identity")
      ->capture_default_str();
  cap->add_option("--sink", inv.sink, "';'-separated sink labels (halo is always a sink)");
  cap->add_option("--combiner", inv.combiner, "max, pointwise-max, euclidean, sum")
      ->capture_default_str();
  add_io(cap, true);

  auto* prof = app.add_subcommand("cap-profile", "condenser values over growing balls");
  prof->add_option("--group", inv.group, "z:<d> or free:<k>")->required();
  prof->add_option("--source", inv.source, "';'-separated source labels")->capture_default_str();
  prof->add_option("--radii", radii_text, "radius list, a..b or comma-separated")
      ->capture_default_str();
  prof->add_option("--combiner", inv.combiner, "max, pointwise-max, euclidean, sum")
      ->capture_default_str();
  add_io(prof, true);

  auto* probe = app.add_subcommand("probe", "singleton capacity decay-vs-saturation probe");
  probe->add_option("--group", inv.group, "z:<d> or free:<k>")->required();
  probe->add_option("--p", inv.exponent, "gauge exponent p >= 1")->capture_default_str();
  probe->add_option("--rmax", inv.rmax, "largest radius, >= 4")->capture_default_str();
  probe->add_option("--combiner", inv.combiner, "combiner, default euclidean")
      ->default_str("euclidean");
  add_io(probe, true);

  auto* mod = app.add_subcommand("modulus", "condenser modulus for the shift tuple of a ball");
  mod->add_option("--group", inv.group, "z:<d> or free:<k>");
  mod->add_option("--graph-file", inv.graph_file, "load a graph file instead of a group ball");
  mod->add_option("--radius", inv.radius, "ball radius (interior)")->capture_default_str();
  mod->add_option("--source", inv.source, "labels whose coordinates form P")->capture_default_str();
  mod->add_option("--sink", inv.sink, "extra labels joined to the halo in Q");
  add_io(mod, true);

  auto* tr = app.add_subcommand("transfer", "graph capacity vs matrix modulus on matched instances");
  tr->add_option("--group", inv.group, "z:<d> or free:<k>");
  tr->add_option("--graph-file", inv.graph_file, "load a graph file instead of a group ball");
  tr->add_option("--radius", inv.radius, "ball radius (interior)")->capture_default_str();
  tr->add_option("--source", inv.source, "';'-separated source labels")->capture_default_str();
  tr->add_option("--sink", inv.sink, "';'-separated sink labels");
  add_io(tr, true);

  auto* cov = app.add_subcommand("cover", "ball-covering value of a cell set");
  cov->add_option("--shape", inv.shape, "interval, cube, cantor, carpet")->capture_default_str();
  cov->add_option("--dim", inv.dim, "ambient dimension (cube only)")->capture_default_str();
  cov->add_option("--level", inv.level, "resolution level")->capture_default_str();
  cov->add_option("--eps", inv.eps, "radius bound (> cell circumradius)")->required();
  cov->add_option("--strategy", inv.strategy, "dyadic or greedy")->capture_default_str();
  cov->add_flag("--equal-mass", inv.equal_mass, "equal cell weights instead of volume");
  add_io(cov, false);

  auto* cert = app.add_subcommand("certify", "covering projection commutator certificate");
  cert->add_option("--shape", inv.shape, "interval, cube, cantor, carpet")->capture_default_str();
  cert->add_option("--dim", inv.dim, "ambient dimension (cube only)")->capture_default_str();
  cert->add_option("--level", inv.level, "resolution level")->capture_default_str();
  cert->add_option("--eps", inv.eps, "radius bound")->required();
  cert->add_option("--parts", inv.parts, "contiguous chunk count (default: grid blocks from eps)");
  cert->add_flag("--equal-mass", inv.equal_mass, "equal cell weights instead of volume");
  add_io(cert, false);

  auto* sc = app.add_subcommand("scale", "covering values and certificates across levels");
  sc->add_option("--shape", inv.shape, "interval, cube, cantor, carpet")->capture_default_str();
  sc->add_option("--dim", inv.dim, "ambient dimension (cube only)")->capture_default_str();
  sc->add_option("--p", inv.exponent, "gauge exponent p >= 1")->capture_default_str();
  sc->add_option("--levels", levels_text, "level list, a..b or comma-separated")
      ->capture_default_str();
  sc->add_option("--phi-kind", inv.phi_kind, "lorentz or lp")
      ->check(CLI::IsMember({"lorentz", "lp"}))
      ->capture_default_str();
  add_io(sc, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    inv.subcommand = "help";
    return inv;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  inv.subcommand = app.get_subcommands().front()->get_name();

  // Cross-field validation beyond what CLI11 expresses.
  parse_phi(inv.phi);
  if (inv.subcommand == "cap-profile") inv.radii = parse_int_list(radii_text);
  if (inv.subcommand == "scale") inv.levels = parse_int_list(levels_text);
  if (inv.subcommand == "cap-graph" || inv.subcommand == "cap-profile" ||
      inv.subcommand == "probe" || inv.subcommand == "modulus" || inv.subcommand == "transfer") {
    if (inv.graph_file.empty() && inv.group.empty())
      throw UsageError(inv.subcommand + " needs --group or --graph-file");
    if (!inv.group.empty()) {
      try {
        parse_group(inv.group);
      } catch (const std::exception& e) {
        throw UsageError(e.what());
      }
    }
    const auto src = split_labels(inv.source);
    if (src.empty()) throw UsageError("empty source set");
    for (const auto& s : split_labels(inv.sink))
      if (std::find(src.begin(), src.end(), s) != src.end())
        throw UsageError("source and sink sets share the label '" + s + "'");
  }
  if (inv.subcommand == "probe") {
    if (!(inv.exponent >= 1.0)) throw UsageError("probe requires p >= 1");
    if (inv.rmax < 4) throw UsageError("probe requires --rmax >= 4");
    if (inv.combiner.empty()) inv.combiner = "euclidean";
  }
  if (inv.subcommand == "scale" && !(inv.exponent >= 1.0))
    throw UsageError("scale requires p >= 1");
  try {
    parse_combiner(inv.combiner.empty() ? "max" : inv.combiner);
    if (!inv.step_rule.empty()) parse_step_rule(inv.step_rule);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  if (inv.subcommand == "cover" || inv.subcommand == "certify") {
    if (!(inv.eps > 0.0)) throw UsageError("--eps must be positive");
    try {
      parse_shape(inv.shape);
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
  }
  return inv;
}

RunOutcome execute_and_report(const Invocation& inv) {
  const auto t0 = std::chrono::steady_clock::now();
  const NormingFunction phi = parse_phi(inv.phi);
  const SolveOptions opts = solve_options(inv);

  json results;
  std::string csv;
  int exit_code = 0;

  if (inv.subcommand == "cap-graph") {
    const GraphSource gs = make_graph(inv);
    CondenserProblem prob;
    prob.graph = &gs.graph;
    prob.source = resolve_on_graph(gs.graph, inv.source, gs.from_group ? &gs.group : nullptr);
    prob.sink = resolve_on_graph(gs.graph, inv.sink, gs.from_group ? &gs.group : nullptr);
    prob.phi = phi;
    prob.combiner = parse_combiner(inv.combiner);
    const GraphSolveReport rep = solve_condenser(prob, opts);
    results["value"] = rep.value;
    results["iterations"] = rep.iterations;
    results["tolerance_met"] = rep.tolerance_met;
    results["feasibility_residual"] = rep.feasibility_residual;
    results["vertices"] = gs.graph.vertex_count();
    if (gs.graph.vertex_count() <= 512) {
      json mins;
      for (int v = 0; v < gs.graph.vertex_count(); ++v)
        mins[gs.graph.label(v)] = rep.minimizer[v];
      results["minimizer"] = mins;
    }
    if (!rep.tolerance_met) exit_code = 1;
    csv = csv_pairs({{"value", fmt_double(rep.value)},
                     {"iterations", std::to_string(rep.iterations)},
                     {"tolerance_met", rep.tolerance_met ? "true" : "false"}});
  } else if (inv.subcommand == "cap-profile") {
    const GroupSpec group = parse_group(inv.group);
    const auto profile =
        capacity_profile(group, inv.source, phi, parse_combiner(inv.combiner), inv.radii, opts);
    results["profile"] = profile_json(profile);
    std::vector<std::vector<std::string>> rows;
    for (const auto& pt : profile) {
      rows.push_back({std::to_string(pt.radius), fmt_double(pt.value)});
      if (!pt.tolerance_met) exit_code = 1;
    }
    csv = csv_table({"R", "value"}, rows);
  } else if (inv.subcommand == "probe") {
    const GroupSpec group = parse_group(inv.group);
    const ProbeReport rep =
        hyperbolicity_probe(group, inv.exponent, inv.rmax, parse_combiner(inv.combiner), opts);
    results["profile"] = profile_json(rep.profile);
    results["verdict"] = rep.verdict;
    results["fit"] = {{"power_law_slope", rep.power_law_slope},
                      {"power_law_r2", rep.power_law_r2},
                      {"last_ratio", rep.last_ratio}};
    std::vector<std::vector<std::string>> rows;
    for (const auto& pt : rep.profile)
      rows.push_back({std::to_string(pt.radius), fmt_double(pt.value)});
    csv = csv_table({"R", "value"}, rows);
  } else if (inv.subcommand == "modulus") {
    const GraphSource gs = make_graph(inv);
    const OperatorTuple tau = truncated_shift_tuple(gs.graph);
    std::vector<int> p_coords =
        resolve_on_graph(gs.graph, inv.source, gs.from_group ? &gs.group : nullptr);
    std::vector<int> q_coords =
        resolve_on_graph(gs.graph, inv.sink, gs.from_group ? &gs.group : nullptr);
    for (int v = 0; v < gs.graph.vertex_count(); ++v)
      if (gs.graph.is_halo(v)) q_coords.push_back(v);
    const ProjectionPair pq =
        ProjectionPair::coordinates(p_coords, q_coords, gs.graph.vertex_count());
    const ModulusSolveReport rep = solve_modulus(tau, pq, phi, opts);
    results["value"] = rep.value;
    results["iterations"] = rep.iterations;
    results["tolerance_met"] = rep.tolerance_met;
    results["feasibility_residual"] = rep.feasibility_residual;
    results["dimension"] = gs.graph.vertex_count();
    if (!rep.tolerance_met) exit_code = 1;
    csv = csv_pairs({{"value", fmt_double(rep.value)},
                     {"iterations", std::to_string(rep.iterations)},
                     {"tolerance_met", rep.tolerance_met ? "true" : "false"}});
  } else if (inv.subcommand == "transfer") {
    const GraphSource gs = make_graph(inv);
    const auto source = resolve_on_graph(gs.graph, inv.source, gs.from_group ? &gs.group : nullptr);
    const auto sink = resolve_on_graph(gs.graph, inv.sink, gs.from_group ? &gs.group : nullptr);
    const TransferReport rep = transfer_compare(gs.graph, source, sink, phi, opts);
    results["cap_graph"] = rep.cap_graph;
    results["k_matrix"] = rep.k_matrix;
    results["gap"] = rep.gap;
    results["embed_ok"] = rep.embed_ok;
    results["compress_ok"] = rep.compress_ok;
    results["diag_roundtrip_ok"] = rep.diag_roundtrip_ok;
    results["embed_value"] = rep.embed_value;
    results["compress_value"] = rep.compress_value;
    if (!rep.graph.tolerance_met || !rep.matrix.tolerance_met) exit_code = 1;
    if (!rep.diag_roundtrip_ok) exit_code = 3;
    csv = csv_pairs({{"cap_graph", fmt_double(rep.cap_graph)},
                     {"k_matrix", fmt_double(rep.k_matrix)},
                     {"gap", fmt_double(rep.gap)},
                     {"diag_roundtrip_ok", rep.diag_roundtrip_ok ? "true" : "false"}});
  } else if (inv.subcommand == "cover") {
    const CellSet e = build_cell_set(shape_spec(inv));
    const CoveringResult res = covering_value(e, inv.eps, phi, parse_strategy(inv.strategy));
    results["value"] = res.value;
    results["parts"] = static_cast<int>(res.covering.parts.size());
    double rmin = 0, rmax = 0;
    if (!res.covering.parts.empty()) {
      rmin = rmax = res.covering.parts.front().radius;
      for (const auto& part : res.covering.parts) {
        rmin = std::min(rmin, part.radius);
        rmax = std::max(rmax, part.radius);
      }
    }
    results["radius_min"] = rmin;
    results["radius_max"] = rmax;
    results["cells"] = static_cast<int>(e.cells.size());
    csv = csv_pairs({{"value", fmt_double(res.value)},
                     {"parts", std::to_string(res.covering.parts.size())}});
  } else if (inv.subcommand == "certify") {
    const CellSet e = build_cell_set(shape_spec(inv));
    const GridModel model = build_grid_model(e);
    CoveringPartition partition;
    if (inv.parts > 0) {
      partition = chunk_partition(e, inv.parts);
    } else {
      partition = covering_value(e, inv.eps, phi, CoverStrategy::Dyadic).covering;
    }
    const CertificateReport rep = certificate_check(model, partition, phi, inv.eps);
    results["lhs_ideal"] = rep.lhs_ideal;
    results["rhs_ideal"] = rep.rhs_ideal;
    results["lhs_op"] = rep.lhs_op;
    results["eps"] = rep.eps;
    results["ok"] = rep.ok;
    results["parts"] = static_cast<int>(partition.parts.size());
    if (!rep.ok) exit_code = 3;
    csv = csv_pairs({{"lhs_ideal", fmt_double(rep.lhs_ideal)},
                     {"rhs_ideal", fmt_double(rep.rhs_ideal)},
                     {"lhs_op", fmt_double(rep.lhs_op)},
                     {"ok", rep.ok ? "true" : "false"}});
  } else if (inv.subcommand == "scale") {
    const ShapeSpec spec = shape_spec(inv);
    const GaugeKind kind = inv.phi_kind == "lp" ? GaugeKind::Lp : GaugeKind::LorentzP1;
    const auto rows = scaling_study(spec.shape, spec.dim, inv.exponent, inv.levels, kind);
    json table = json::array();
    std::vector<std::vector<std::string>> csv_rows;
    for (const auto& row : rows) {
      table.push_back({{"level", row.level},
                       {"value", row.covering_value},
                       {"certificate_lhs", row.certificate_lhs},
                       {"certificate_rhs", row.certificate_rhs}});
      csv_rows.push_back({std::to_string(row.level), fmt_double(row.covering_value),
                          fmt_double(row.certificate_lhs), fmt_double(row.certificate_rhs)});
    }
    results["table"] = table;
    csv = csv_table({"level", "value", "certificate_lhs", "certificate_rhs"}, csv_rows);
  } else {
    throw UsageError("unknown subcommand '" + inv.subcommand + "'");
  }

  RunOutcome out;
  out.exit_code = exit_code;
  if (inv.format == "csv") {
    out.rendered = csv;
    return out;
  }
  json report;
  report["version"] = kVersion;
  report["schema_version"] = kSchemaVersion;
  report["seed"] = inv.seed;
  json echo = json::array();
  echo.push_back(inv.subcommand);
  for (const auto& a : inv.argv_echo)
    if (a != inv.subcommand) echo.push_back(a);
  report["invocation"] = echo;
  report["results"] = results;
  report["exit_code"] = exit_code;
  if (inv.timing) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report["timing"] = {{"seconds", secs}};
  }
  out.rendered = report.dump(2) + "\n";
  return out;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    const Invocation inv = parse_invocation(args);
    if (inv.subcommand == "help") return 0;
    const RunOutcome out = execute_and_report(inv);
    if (inv.output == "-") {
      std::cout << out.rendered;
    } else {
      std::ofstream f(inv.output, std::ios::binary);
      if (!f) {
        std::cerr << "error: cannot write '" << inv.output << "'\n";
        return 2;
      }
      f << out.rendered;
    }
    return out.exit_code;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::length_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace nlcap
