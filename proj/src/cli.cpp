#include "robust_t/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "robust_t/coset_spectra.hpp"
#include "robust_t/criterion.hpp"
#include "robust_t/error.hpp"
#include "robust_t/expander_forge.hpp"
#include "robust_t/finite_group.hpp"
#include "robust_t/group_algebra.hpp"
#include "robust_t/json_io.hpp"
#include "robust_t/projection_lab.hpp"

namespace robust_t::cli {

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string out_path;
  std::string format = "json";
};

struct GroupArgs {
  std::string kind = "heisenberg";
  std::uint32_t q = 3;
  std::size_t n = 3;
  std::string file;
};

struct AngleArgs {
  GroupArgs group;
  std::vector<std::string> k1, k2;
  std::vector<std::string> r{"2", "3", "4"};
  std::size_t dense_cap = kDenseRegularCap;
};

struct CriterionArgs {
  std::string scheme_file;
  std::vector<std::uint64_t> steinberg;
  std::vector<std::string> kms;
  std::string links_file;
  std::optional<double> c_prime, epsilon;
  std::vector<std::string> r_grid, p1_grid, p2_grid;
  double type_constant = 1.0, cotype_constant = 1.0;
};

struct IterateArgs {
  std::string family_file;
  std::size_t check_n = 60;
  std::size_t max_iter = 100000;
  double tol = 1e-10;
};

struct ExpanderArgs {
  std::size_t n = 3;
  std::uint32_t q = 2;
  std::size_t k = 1;
  std::vector<std::string> p;
  std::size_t cap = kDefaultCayleyCap;
  std::size_t restarts = 32;
  std::size_t dimension = 3;
  std::size_t iterations = 300;
  std::string dot, csv, graph_json;
};

nlohmann::json diagnostic(const std::string& code, const std::string& message,
                          const std::map<std::string, std::string>& context = {}) {
  nlohmann::json ctx = nlohmann::json::object();
  for (const auto& [k, v] : context) ctx[k] = v;
  return {{"code", code}, {"message", message}, {"context", ctx}};
}

std::vector<double> parse_reals(const std::vector<std::string>& raw) {
  std::vector<double> out;
  for (const auto& s : raw) out.push_back(number_from_key(s));
  return out;
}

GroupPtr build_group(const GroupArgs& a) {
  if (a.kind == "heisenberg") return build_heisenberg(a.q);
  if (a.kind == "product") return build_elementary_abelian_pair(a.q);
  if (a.kind == "sym") return build_symmetric(a.n);
  if (a.kind == "dihedral") return build_dihedral(a.n);
  if (a.kind == "custom") {
    if (a.file.empty()) throw Error("cli.usage", "--group custom needs --file");
    return std::make_shared<const GroupTable>(GroupTable::from_json(read_json_file(a.file)));
  }
  throw Error("cli.usage", "unknown group kind", {{"group", a.kind}});
}

// Text view: criterion reports show their inequality chain, everything else
// its top-level scalars.
std::string text_view(const nlohmann::json& j) {
  std::ostringstream os;
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!it.value().is_structured()) os << it.key() << ": " << dump_json(it.value(), -1);
  if (j.contains("inequalities"))
    for (const auto& line : j.at("inequalities")) os << "  " << line.get<std::string>() << '\n';
  if (j.contains("flags"))
    for (const auto& line : j.at("flags")) os << "  flag: " << line.get<std::string>() << '\n';
  return os.str();
}

void emit(const Globals& g, const nlohmann::json& report, std::ostream& out) {
  const std::string body = dump_json(report);
  if (!g.out_path.empty()) {
    write_file_atomic(g.out_path, body);
    if (g.format == "text") out << text_view(report);
    return;
  }
  out << (g.format == "text" ? text_view(report) : body);
}

int cmd_group(const Globals& g, const GroupArgs& a, std::ostream& out) {
  const GroupPtr group = build_group(a);
  nlohmann::json j = group->to_json();
  j["kind"] = a.kind;
  j["group_id"] = group->fingerprint();
  emit(g, j, out);
  return kExitOk;
}

int cmd_angle(const Globals& g, AngleArgs a, std::ostream& out, std::ostream& err) {
  const GroupPtr group = build_group(a.group);
  if (a.k1.empty() && a.k2.empty()) {
    if (a.group.kind == "heisenberg" || a.group.kind == "product") {
      a.k1 = {"x"};
      a.k2 = {"y"};
    } else if (a.group.kind == "sym") {
      a.k1 = {"s1"};
      a.k2 = {"s2"};
    } else if (a.group.kind == "dihedral") {
      a.k1 = {"s"};
      a.k2 = {"t"};
    } else {
      throw Error("cli.usage", "custom groups need --k1 and --k2 generator labels");
    }
  }
  const SubgroupPair pair = generated_pair(group, a.k1, a.k2);
  const AngleReport rep = angle_report(pair.k1, pair.k2, parse_reals(a.r), a.dense_cap);
  nlohmann::json j = rep.to_json();
  j["group_kind"] = a.group.kind;
  j["group_order"] = group->order();
  j["group_id"] = group->fingerprint();
  j["k1"] = a.k1;
  j["k2"] = a.k2;
  emit(g, j, out);
  if (!rep.agrees) {
    err << dump_json(diagnostic("angle.lemma_mismatch", "coset-graph prediction disagrees with the regular representation",
                                {{"max_discrepancy", number_key(rep.max_discrepancy)}}),
                     -1);
    return kExitError;
  }
  return kExitOk;
}

std::vector<GeneratorPair> read_graph_edges(const std::string& path, std::size_t& n_vertices) {
  const nlohmann::json j = read_json_file(path);
  try {
    n_vertices = j.at("vertices").get<std::size_t>();
    std::vector<GeneratorPair> edges;
    for (const auto& e : j.at("edges")) {
      const auto v = e.get<std::vector<std::size_t>>();
      if (v.size() != 2) throw Error("kms.graph", "edges must be pairs [a, b]");
      edges.emplace_back(v[0], v[1]);
    }
    return edges;
  } catch (const nlohmann::json::exception& e) {
    throw Error("kms.graph", std::string("graph JSON needs {vertices, edges}: ") + e.what(), {{"path", path}});
  }
}

int cmd_criterion(const Globals& g, const CriterionArgs& a, std::ostream& out) {
  const int sources = !a.scheme_file.empty() + !a.steinberg.empty() + !a.kms.empty() + !a.links_file.empty();
  if (sources != 1)
    throw Error("cli.usage", "criterion needs exactly one of --scheme, --steinberg, --kms, --links");
  std::optional<GeneratorScheme> scheme;
  if (!a.scheme_file.empty()) {
    scheme.emplace(GeneratorScheme::from_json(read_json_file(a.scheme_file)));
  } else if (!a.steinberg.empty()) {
    scheme.emplace(steinberg_scheme(a.steinberg[0], a.steinberg[1], a.steinberg[2]));
  } else if (!a.kms.empty()) {
    std::size_t nv = 0;
    const auto edges = read_graph_edges(a.kms[0], nv);
    std::uint64_t q = 0;
    try {
      q = std::stoull(a.kms[1]);
    } catch (const std::exception&) {
      throw Error("cli.usage", "--kms needs a graph file and an integer q", {{"q", a.kms[1]}});
    }
    scheme.emplace(kms_scheme(nv, edges, q));
  } else {
    scheme.emplace(link_scheme(link_ingest_file(a.links_file)));
  }
  EvaluateOptions opt;
  opt.epsilon = a.epsilon;
  opt.c_prime = a.c_prime;
  if (!a.r_grid.empty()) opt.r_grid = parse_reals(a.r_grid);
  if (!a.p1_grid.empty()) opt.p1_grid = parse_reals(a.p1_grid);
  if (!a.p2_grid.empty()) opt.p2_grid = parse_reals(a.p2_grid);
  opt.type_constant = a.type_constant;
  opt.cotype_constant = a.cotype_constant;
  const CriterionReport rep = evaluate(*scheme, opt);
  nlohmann::json j = rep.to_json();
  j["scheme"] = scheme->to_json();
  emit(g, j, out);
  return rep.certified() ? kExitOk : kExitHypothesis;
}

int cmd_iterate(const Globals& g, const IterateArgs& a, std::ostream& out) {
  const ProjectionFamily family = ProjectionFamily::from_json(read_json_file(a.family_file), g.seed);
  IterateOptions opt;
  opt.check_n = a.check_n;
  opt.max_iter = a.max_iter;
  opt.tol = a.tol;
  opt.seed = g.seed;
  const ConvergenceCertificate cert = iterate_averaged(family, opt);
  nlohmann::json j = cert.to_json();
  j["family"] = {{"size", family.size()},
                 {"dimension", family.dimension()},
                 {"beta", family.beta()},
                 {"alpha", number_to_json(family.alpha())},
                 {"alpha_lower", family.alpha_lower()}};
  if (family.cos_max()) j["family"]["cos_max"] = *family.cos_max();
  j["sound"] = cert.sound(opt.slack);
  emit(g, j, out);
  return cert.sound(opt.slack) && cert.certificate_mode ? kExitOk : kExitHypothesis;
}

int cmd_expander(const Globals& g, const ExpanderArgs& a, std::ostream& out) {
  const ElementaryQuotient quotient = build_quotient(a.n, a.q, a.k, a.cap);
  const SpectralGapResult gap = spectral_gap(quotient.graph, {g.seed});
  PoincareOptions popt;
  popt.p_values = parse_reals(a.p);
  popt.dimension = a.dimension;
  popt.restarts = a.restarts;
  popt.iterations = a.iterations;
  popt.seed = g.seed;
  const PoincareReport rep = poincare_constants(quotient.graph, popt, &gap);
  nlohmann::json j = rep.to_json();
  j["n"] = a.n;
  j["q"] = a.q;
  j["k"] = a.k;
  j["gap_residual"] = gap.residual;
  j["generator_labels"] = quotient.generators.labels;
  j["degenerate_generators"] = quotient.generators.degenerate;
  if (!a.dot.empty()) write_file_atomic(a.dot, export_dot(quotient.graph));
  if (!a.csv.empty()) write_file_atomic(a.csv, export_csv(quotient.graph));
  if (!a.graph_json.empty()) write_file_atomic(a.graph_json, dump_json(export_json(quotient.graph)));
  emit(g, j, out);
  return kExitOk;
}

void add_group_options(CLI::App* app, GroupArgs& a, bool with_kind_flag) {
  const std::string name = with_kind_flag ? "--group" : "--kind";
  app->add_option(name, a.kind, "heisenberg | product | sym | dihedral | custom")
      ->check(CLI::IsMember({"heisenberg", "product", "sym", "dihedral", "custom"}));
  app->add_option("--q", a.q, "prime for heisenberg and product");
  app->add_option("--n", a.n, "degree for sym, polygon size for dihedral");
  app->add_option("--file", a.file, "group table JSON for custom");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Computations around robust Banach property (T) criteria", "robust-t"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML file mirroring the command-line flags");
  Globals globals;
  app.add_option("--seed", globals.seed, "master seed")->capture_default_str();
  app.add_option("--out", globals.out_path, "write the JSON report here (atomically)");
  app.add_option("--format", globals.format, "stdout view: json | text")->check(CLI::IsMember({"json", "text"}));

  GroupArgs group_args;
  auto* group = app.add_subcommand("group", "finite groups");
  group->require_subcommand(1);
  auto* group_build = group->add_subcommand("build", "build a group table");
  add_group_options(group_build, group_args, false);

  AngleArgs angle_args;
  auto* angle = app.add_subcommand("angle", "angles between subgroup projections");
  angle->require_subcommand(1);
  auto* angle_report_cmd = angle->add_subcommand("report", "Hilbert angle and Schatten norms of k1 k2 - k12");
  add_group_options(angle_report_cmd, angle_args.group, true);
  angle_report_cmd->add_option("--k1", angle_args.k1, "generator labels of K1")->delimiter(',');
  angle_report_cmd->add_option("--k2", angle_args.k2, "generator labels of K2")->delimiter(',');
  angle_report_cmd->add_option("--r", angle_args.r, "Schatten exponents (inf allowed)")->delimiter(',');
  angle_report_cmd->add_option("--dense-cap", angle_args.dense_cap, "largest group order for the dense oracle");

  IterateArgs iterate_args;
  auto* iterate = app.add_subcommand("iterate", "powers of the averaged projections operator");
  iterate->add_option("--family", iterate_args.family_file, "projection family JSON")->required();
  iterate->add_option("--check-n", iterate_args.check_n, "largest power compared with the limit");
  iterate->add_option("--max-iter", iterate_args.max_iter, "iteration budget for the limit");
  iterate->add_option("--tol", iterate_args.tol, "convergence tolerance (max norm)");

  CriterionArgs crit_args;
  auto* criterion = app.add_subcommand("criterion", "evaluate the robust (T) criterion");
  criterion->add_option("--scheme", crit_args.scheme_file, "generator scheme JSON");
  criterion->add_option("--steinberg", crit_args.steinberg, "n m q")->expected(3);
  criterion->add_option("--kms", crit_args.kms, "graph-file q")->expected(2);
  criterion->add_option("--links", crit_args.links_file, "link table JSON");
  criterion->add_option("--c-prime", crit_args.c_prime, "target constant c'");
  criterion->add_option("--epsilon", crit_args.epsilon, "declared epsilon");
  criterion->add_option("--r-grid", crit_args.r_grid, "Schatten exponents")->delimiter(',');
  criterion->add_option("--p1-grid", crit_args.p1_grid, "type exponents")->delimiter(',');
  criterion->add_option("--p2-grid", crit_args.p2_grid, "cotype exponents")->delimiter(',');
  criterion->add_option("--type-constant", crit_args.type_constant, "type constant T_p1");
  criterion->add_option("--cotype-constant", crit_args.cotype_constant, "cotype constant C_p2");

  ExpanderArgs exp_args;
  auto* expander = app.add_subcommand("expander", "Cayley graphs of EL_n(F_q[t]/(t^k))");
  expander->add_option("--n", exp_args.n, "matrix size (>= 3)");
  expander->add_option("--q", exp_args.q, "prime");
  expander->add_option("--k", exp_args.k, "truncation degree");
  expander->add_option("--p", exp_args.p, "l^p exponents for Poincare lower bounds")->delimiter(',');
  expander->add_option("--cap", exp_args.cap, "vertex cap");
  expander->add_option("--restarts", exp_args.restarts, "restarts per p");
  expander->add_option("--dimension", exp_args.dimension, "target dimension d");
  expander->add_option("--iterations", exp_args.iterations, "ascent steps per restart");
  expander->add_option("--dot", exp_args.dot, "write DOT here");
  expander->add_option("--csv", exp_args.csv, "write CSV edges here");
  expander->add_option("--graph-json", exp_args.graph_json, "write graph JSON here");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << dump_json(diagnostic("cli.usage", e.what()), -1);
    return kExitError;
  }

  try {
    if (*group_build) return cmd_group(globals, group_args, out);
    if (*angle_report_cmd) return cmd_angle(globals, angle_args, out, err);
    if (*iterate) return cmd_iterate(globals, iterate_args, out);
    if (*criterion) return cmd_criterion(globals, crit_args, out);
    if (*expander) return cmd_expander(globals, exp_args, out);
    throw Error("cli.usage", "no command given");
  } catch (const HypothesisError& e) {
    err << dump_json(diagnostic(e.code(), e.what(), e.context()), -1);
    return kExitHypothesis;
  } catch (const Error& e) {
    err << dump_json(diagnostic(e.code(), e.what(), e.context()), -1);
    return kExitError;
  } catch (const std::exception& e) {
    err << dump_json(diagnostic("internal", e.what()), -1);
    return kExitError;
  }
}

}  // namespace robust_t::cli
