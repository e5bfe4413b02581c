#include "spdesens/cli.hpp"

#include "spdesens/config.hpp"
#include "spdesens/exponent_plan.hpp"
#include "spdesens/faadibruno.hpp"
#include "spdesens/parallel.hpp"
#include "spdesens/solver.hpp"
#include "spdesens/verify.hpp"

#include <CLI11.hpp>

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#ifndef SPDESENS_VERSION
#define SPDESENS_VERSION "0.0.0"
#endif

namespace spdesens {
namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  int threads = 1;
  std::vector<double> epsilons;
  std::optional<int> order;
  std::string out;
  bool stream = false;
  std::string test;
  int n = 0;
  bool grouped = false;
};

/// Accumulates CSV text; every run renders to a string first so output is
/// independent of scheduling.
class Csv {
 public:
  explicit Csv(std::vector<std::string> columns) : columns_(std::move(columns)) {
    for (std::size_t k = 0; k < columns_.size(); ++k) text_ += (k ? "," : "") + columns_[k];
    text_ += '\n';
  }

  /// Fields containing a comma or quote are quoted with doubled quotes.
  Csv& cell(const std::string& s) {
    if (open_) text_ += ',';
    if (s.find_first_of(",\"\n") == std::string::npos) {
      text_ += s;
    } else {
      text_ += '"';
      for (char c : s) text_ += c == '"' ? std::string("\"\"") : std::string(1, c);
      text_ += '"';
    }
    open_ = true;
    return *this;
  }
  Csv& cell(double x) { return cell(format_number(x)); }
  Csv& cell(std::size_t x) { return cell(std::to_string(x)); }
  Csv& cell(const std::optional<double>& x) { return x ? cell(*x) : cell(std::string()); }
  Csv& cell(bool b) { return cell(std::string(b ? "true" : "false")); }
  void end_row() {
    text_ += '\n';
    open_ = false;
  }

  const std::string& text() const { return text_; }
  std::string columns() const {
    std::string s;
    for (std::size_t k = 0; k < columns_.size(); ++k) s += (k ? "," : "") + columns_[k];
    return s;
  }

 private:
  std::vector<std::string> columns_;
  std::string text_;
  bool open_ = false;
};

std::string hex(std::uint64_t x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, x);
  return buf;
}

void emit(const Csv& csv, const std::string& schema, const Options& opt, std::uint64_t hash,
          std::uint64_t seed, std::ostream& out) {
  if (opt.out.empty()) {
    out << csv.text();
    return;
  }
  std::ofstream file(opt.out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + opt.out);
  file << csv.text();
  std::ofstream manifest(opt.out + ".manifest", std::ios::binary);
  manifest << "version=" << SPDESENS_VERSION << '\n'
           << "schema=" << schema << '/' << kCsvSchemaVersion << '\n'
           << "columns=" << csv.columns() << '\n'
           << "config=" << opt.config << '\n'
           << "config_hash=" << hex(hash) << '\n'
           << "seed=" << seed << '\n';
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SPDESENS_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used, 0);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("SPDESENS_SEED is not an unsigned integer: ") + env);
  }
  return 0;
}

RunConfig prepare(const Options& opt) {
  if (opt.config.empty()) throw ConfigError("--config is required");
  RunConfig cfg = load_config(opt.config);
  if (opt.seed) {
    cfg.problem.seed = *opt.seed;
  } else if (!cfg.seed_given) {
    cfg.problem.seed = default_seed();
  }
  if (opt.paths) {
    if (*opt.paths == 0) throw ConfigError("--paths must be positive");
    cfg.verify.paths = *opt.paths;
  }
  if (!opt.epsilons.empty()) {
    for (std::size_t k = 0; k < opt.epsilons.size(); ++k) {
      if (!(opt.epsilons[k] > 0.0) || (k > 0 && !(opt.epsilons[k] < opt.epsilons[k - 1]))) {
        throw ConfigError("--epsilons must be positive and strictly decreasing");
      }
    }
    cfg.verify.epsilons = opt.epsilons;
  }
  if (opt.order) cfg.verify.order = *opt.order;
  return cfg;
}

VerifyOptions verify_options(const RunConfig& cfg, const Options& opt) {
  VerifyOptions v;
  v.paths = cfg.verify.paths;
  v.threads = opt.threads;
  v.p = cfg.p;
  v.tol_abs = cfg.verify.tol_abs;
  v.band_lo = cfg.verify.band_lo;
  v.band_hi = cfg.verify.band_hi;
  return v;
}

std::vector<StateVector> order_directions(const RunConfig& cfg, std::size_t count) {
  if (!cfg.verify.order_directions.empty()) {
    if (cfg.verify.order_directions.size() != count) {
      throw ConfigError("[verify] order_directions: expected " + std::to_string(count) + " vectors");
    }
    return cfg.verify.order_directions;
  }
  return make_direction_set(cfg.problem.dim(), count, cfg.verify.direction_seed);
}

Window full_window(const RunConfig& cfg) {
  return cfg.window.value_or(Window{0.0, cfg.problem.horizon});
}

void state_row(Csv& csv, std::size_t path, double t, const std::string& tag, const Eigen::VectorXd& v) {
  csv.cell(path).cell(t);
  if (!tag.empty()) csv.cell(tag);
  for (Eigen::Index k = 0; k < v.size(); ++k) csv.cell(v[k]);
  csv.end_row();
}

std::vector<std::string> state_columns(std::size_t d, bool tagged) {
  std::vector<std::string> cols{"path", "t"};
  if (tagged) cols.push_back("subset");
  for (std::size_t k = 1; k <= d; ++k) cols.push_back("u" + std::to_string(k));
  return cols;
}

/// Appends the grid rows of a path (left limits tagged with "-" when streaming).
void path_rows(Csv& csv, std::size_t m, const PathSample& p, const std::string& tag, bool stream) {
  if (!stream) {
    state_row(csv, m, p.times().back(), tag, p.value(p.size() - 1));
    return;
  }
  for (std::size_t i = 0; i < p.size(); ++i) state_row(csv, m, p.times()[i], tag, p.value(i));
}

int cmd_simulate(const Options& opt, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = prepare(opt);
  const Problem& pr = cfg.problem;
  const std::size_t paths = cfg.verify.paths;
  std::vector<std::optional<PathSample>> results(paths);
  parallel_for(paths, opt.threads, [&](std::size_t m) {
    results[m] = solve_mild(pr.op, pr.coefficients, pr.u0, pr.noise(m));
  });
  Csv csv(state_columns(pr.dim(), false));
  std::size_t blown = 0;
  for (std::size_t m = 0; m < paths; ++m) {
    blown += results[m]->blown_up() ? 1 : 0;
    path_rows(csv, m, *results[m], "", opt.stream);
  }
  emit(csv, opt.stream ? "simulate-stream" : "simulate", opt, cfg.hash, pr.seed, out);
  if (blown) err << "blown-up paths: " << blown << " of " << paths << '\n';
  return 0;
}

int cmd_derivative(const Options& opt, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = prepare(opt);
  const Problem& pr = cfg.problem;
  const int n = cfg.verify.order;
  if (n > pr.coefficients.max_order()) throw DerivativeOrderError(n, pr.coefficients.max_order());
  const auto dirs = order_directions(cfg, static_cast<std::size_t>(n));
  const std::size_t paths = cfg.verify.paths;
  std::vector<std::optional<SensitivitySystem>> results(paths);
  parallel_for(paths, opt.threads, [&](std::size_t m) {
    results[m] = solve_system(pr.op, pr.coefficients, pr.u0, dirs, pr.noise(m));
  });
  Csv csv(state_columns(pr.dim(), true));
  std::size_t blown = 0;
  for (std::size_t m = 0; m < paths; ++m) {
    const SensitivitySystem& sys = *results[m];
    blown += sys.base.blown_up() ? 1 : 0;
    path_rows(csv, m, sys.base, "{}", opt.stream);
    for (SubsetMask s = 1; s <= sys.full_mask(); ++s) path_rows(csv, m, sys.path(s), mask_to_string(s), opt.stream);
  }
  emit(csv, "derivative", opt, cfg.hash, pr.seed, out);
  if (blown) err << "blown-up paths: " << blown << " of " << paths << '\n';
  return 0;
}

Csv remainder_csv(const RemainderTable& t, std::size_t paths) {
  Csv csv({"test", "direction", "epsilon", "remainder", "se", "ratio", "paths", "p", "q",
           "blowup_fraction", "verdict"});
  for (const auto& row : t.rows) {
    csv.cell(t.test).cell(t.direction).cell(row.epsilon).cell(row.remainder.estimate)
        .cell(row.remainder.standard_error).cell(row.ratio).cell(paths).cell(t.p).cell(t.q)
        .cell(row.remainder.blowup_fraction).cell(std::string(t.pass ? "PASS" : "FAIL"));
    csv.end_row();
  }
  return csv;
}

int verdict(bool pass, const std::string& name, const std::string& diagnostic, std::ostream& err) {
  err << name << ": " << (pass ? "PASS" : "FAIL");
  if (!diagnostic.empty()) err << " (" << diagnostic << ")";
  err << '\n';
  return pass ? 0 : 1;
}

int cmd_verify(const Options& opt, std::ostream& out, std::ostream& err) {
  if (opt.test == "plan") {
    std::uint64_t hash = 0;
    PlanSettings ps;
    if (!opt.config.empty()) {
      const ConfigDocument doc = load_document(opt.config);
      for (const auto& [section, entries] : doc.sections) {
        if (section != "plan") continue;
        for (const auto& [key, value] : entries) {
          if (key != "n" && key != "m" && key != "p" && key != "q" && key != "budget") {
            throw ConfigError("unknown config keys: [plan] " + key);
          }
        }
      }
      ps = plan_settings(doc);
      hash = doc.hash;
    }
    std::optional<std::vector<Exponent>> budget;
    if (ps.budget) {
      budget.emplace();
      for (const auto& b : *ps.budget) budget->push_back(parse_exponent(b));
    }
    const int n = opt.order.value_or(ps.n);
    const PlanReport report = exponent_plan_check(n, parse_rational(ps.m), parse_rational(ps.p),
                                                  parse_rational(ps.q), budget);
    Csv csv({"constraint", "inequality", "lhs", "rhs", "strict", "holds", "binding", "verdict"});
    for (const auto& c : report.constraints) {
      csv.cell(c.name).cell("\"" + c.inequality + "\"").cell(c.lhs_infinite ? std::string("inf") : to_string(c.lhs)).cell(to_string(c.rhs))
          .cell(c.strict).cell(c.holds).cell(c.name == report.binding)
          .cell(std::string(report.pass ? "PASS" : "FAIL"));
      csv.end_row();
    }
    emit(csv, "verify-plan", opt, hash, 0, out);
    return verdict(report.pass, "plan", "binding: " + report.binding, err);
  }

  const RunConfig cfg = prepare(opt);
  const Problem& pr = cfg.problem;
  const VerifyOptions vo = verify_options(cfg, opt);
  const std::size_t d = pr.dim();

  if (opt.test == "gateaux") {
    const StateVector h = cfg.verify.h.value_or(StateVector::Ones(static_cast<Eigen::Index>(d)) /
                                               std::sqrt(static_cast<double>(d)));
    const auto table = gateaux_test(pr, h, cfg.verify.epsilons, vo);
    emit(remainder_csv(table, vo.paths), "verify-remainder", opt, cfg.hash, pr.seed, out);
    return verdict(table.pass, "gateaux", table.diagnostic, err);
  }
  if (opt.test == "higher") {
    const auto dirs = order_directions(cfg, static_cast<std::size_t>(cfg.verify.order));
    const auto table = higher_order_test(pr, dirs, cfg.verify.epsilons, cfg.q, vo);
    emit(remainder_csv(table, vo.paths), "verify-remainder", opt, cfg.hash, pr.seed, out);
    return verdict(table.pass, "higher", table.diagnostic, err);
  }
  if (opt.test == "chainrule") {
    const auto dirs = order_directions(cfg, static_cast<std::size_t>(cfg.verify.order) + 1);
    const auto table = chainrule_test(pr, cfg.verify.component, dirs, cfg.verify.epsilons, vo);
    emit(remainder_csv(table, vo.paths), "verify-remainder", opt, cfg.hash, pr.seed, out);
    return verdict(table.pass, "chainrule", table.diagnostic, err);
  }
  if (opt.test == "frechet") {
    VerifyOptions fo = vo;
    if (!cfg.verify.band_given) {
      fo.band_lo = 1.4;
      fo.band_hi = 2.6;
    }
    const auto dirs = make_direction_set(d, cfg.verify.directions, cfg.verify.direction_seed);
    const auto table = frechet_test(pr, dirs, cfg.verify.epsilons, cfg.q, fo);
    Csv csv({"epsilon", "max_remainder", "se", "argmax", "ratio", "directions", "paths", "p", "q",
             "verdict"});
    for (const auto& row : table.rows) {
      csv.cell(row.epsilon).cell(row.max_remainder).cell(row.standard_error).cell(row.argmax)
          .cell(row.ratio).cell(dirs.size()).cell(vo.paths).cell(vo.p).cell(cfg.q)
          .cell(std::string(table.pass ? "PASS" : "FAIL"));
      csv.end_row();
    }
    emit(csv, "verify-frechet", opt, cfg.hash, pr.seed, out);
    return verdict(table.pass, "frechet", table.diagnostic, err);
  }
  if (opt.test == "lipschitz") {
    const auto table = lipschitz_test(pr, cfg.verify.pairs, cfg.verify.magnitudes, vo, cfg.verify.pair_seed);
    Csv csv({"pair", "magnitude", "distance", "se", "quotient", "paths", "p", "verdict"});
    for (const auto& row : table.rows) {
      csv.cell(row.pair).cell(row.magnitude).cell(row.distance.estimate)
          .cell(row.distance.standard_error).cell(row.quotient).cell(vo.paths).cell(vo.p)
          .cell(std::string(table.pass ? "PASS" : "FAIL"));
      csv.end_row();
    }
    emit(csv, "verify-lipschitz", opt, cfg.hash, pr.seed, out);
    std::ostringstream spread;
    spread << "spread " << format_number(table.spread);
    return verdict(table.pass, "lipschitz",
                   table.diagnostic.empty() ? spread.str() : table.diagnostic, err);
  }
  if (opt.test == "contraction") {
    const auto table = contraction_diagnostic(pr, cfg.verify.windows, cfg.verify.frozen_path, cfg.p);
    Csv csv({"window", "factor", "path", "p", "verdict"});
    for (const auto& row : table.rows) {
      csv.cell(row.window).cell(row.factor).cell(static_cast<std::size_t>(cfg.verify.frozen_path))
          .cell(cfg.p).cell(std::string(table.pass ? "PASS" : "FAIL"));
      csv.end_row();
    }
    emit(csv, "verify-contraction", opt, cfg.hash, pr.seed, out);
    return verdict(table.pass, "contraction", "", err);
  }
  throw ConfigError("unknown verification '" + opt.test + "'");
}

int cmd_partitions(const Options& opt, std::ostream& out) {
  const auto& parts = set_partitions(opt.n);
  if (opt.grouped) {
    std::vector<std::pair<std::string, std::size_t>> groups;
    for (const auto& p : parts) {
      const std::string sig = p.size_signature();
      auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == sig; });
      if (it == groups.end()) groups.emplace_back(sig, 1);
      else ++it->second;
    }
    Csv csv({"block_sizes", "blocks", "multiplicity"});
    for (const auto& [sig, count] : groups) {
      const std::size_t blocks = static_cast<std::size_t>(std::count(sig.begin(), sig.end(), '|')) + 1;
      csv.cell(sig).cell(blocks).cell(count);
      csv.end_row();
    }
    emit(csv, "partitions-grouped", opt, 0, 0, out);
    return 0;
  }
  Csv csv({"index", "partition", "block_sizes", "blocks"});
  for (std::size_t k = 0; k < parts.size(); ++k) {
    csv.cell(k + 1).cell(parts[k].to_string()).cell(parts[k].size_signature()).cell(parts[k].size());
    csv.end_row();
  }
  emit(csv, "partitions", opt, 0, 0, out);
  return 0;
}

MarkFieldEnsemble mark_field(const CoefficientField& field, const MarkSpace& marks,
                             const std::vector<std::optional<PathSample>>& paths) {
  MarkFieldEnsemble e{marks.nodes(), marks.intensity(), {}};
  for (const auto& p : paths) e.paths.push_back(sample_mark_field(field, *p, e.nodes));
  return e;
}

int cmd_norms(const Options& opt, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = prepare(opt);
  const Problem& pr = cfg.problem;
  const std::size_t paths = cfg.verify.paths;
  const Window w = full_window(cfg);
  std::vector<std::optional<PathSample>> results(paths);
  parallel_for(paths, opt.threads, [&](std::size_t m) {
    results[m] = solve_mild(pr.op, pr.coefficients, pr.u0, pr.noise(m));
  });
  std::vector<PathSample> ensemble;
  ensemble.reserve(paths);
  for (auto& r : results) ensemble.push_back(*r);

  Csv csv({"name", "p", "q", "t0", "t1", "estimate", "se", "paths", "blowup_fraction", "note"});
  auto row = [&](const std::string& name, double q, Window win, const EnsembleStatistic& s,
                 const std::string& note) {
    csv.cell(name).cell(s.p).cell(q).cell(win.t0).cell(win.t1).cell(s.estimate).cell(s.standard_error)
        .cell(s.paths).cell(s.blowup_fraction).cell(note);
    csv.end_row();
  };
  row("sp_norm_u", std::nan(""), w, sp_norm(ensemble, cfg.p, w), "");
  if (pr.marks.intensity() > 0.0) {
    const MarkFieldEnsemble g = mark_field(*pr.coefficients.jump, pr.marks, results);
    row("lpq_nu_G", cfg.q, w, lpq_nu_norm(g, cfg.p, cfg.q, w), "");
    std::optional<std::pair<MarkFieldEnsemble, MarkFieldEnsemble>> split;
    if (pr.coefficients.jump_split) {
      split.emplace(mark_field(*pr.coefficients.jump_split->first, pr.marks, results),
                    mark_field(*pr.coefficients.jump_split->second, pr.marks, results));
    }
    if (cfg.p > 1.0 && cfg.p < 2.0 && !split) {
      err << "gp_norm_G skipped: 1 < p < 2 needs G1 and G2 in [coefficients]\n";
    } else {
      const auto s = gp_norm(g, split, cfg.p, w);
      row("gp_norm_G", std::nan(""), w, s, s.upper_bound ? "upper bound for the supplied split" : "");
    }
    if (!cfg.deltas.empty()) {
      const MarkFieldSample& g0 = g.paths.front();
      const KappaAudit audit =
          split ? kappa_audit(split->first.paths.front(), split->second.paths.front(), g.nodes,
                              g.intensity, cfg.deltas, cfg.p)
                : kappa_audit(g0, g.nodes, g.intensity, cfg.deltas, cfg.p);
      for (const auto& k : audit.rows) {
        csv.cell(std::string("kappa")).cell(cfg.p).cell(std::nan("")).cell(0.0).cell(k.delta)
            .cell(k.value).cell(0.0).cell(std::size_t{1}).cell(0.0)
            .cell(std::string(audit.monotone ? "path 0" : "path 0; not monotone"));
        csv.end_row();
      }
    }
  }
  emit(csv, "norms", opt, cfg.hash, pr.seed, out);
  return 0;
}

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral jump-diffusion simulator with pathwise sensitivities", "spdesens"};
  app.set_version_flag("--version", SPDESENS_VERSION);
  app.require_subcommand(1);
  Options opt;

  auto common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", opt.config, "Configuration file");
    if (config_required) c->required();
    sub->add_option("--seed", opt.seed, "Master seed (overrides the config)");
    sub->add_option("--paths", opt.paths, "Number of Monte Carlo paths");
    sub->add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", opt.out, "CSV output file (a .manifest is written next to it)");
  };

  auto* simulate = app.add_subcommand("simulate", "Simulate the state equation");
  common(simulate, true);
  simulate->add_flag("--stream", opt.stream, "Write every grid time instead of the final state");

  auto* derivative = app.add_subcommand("derivative", "Simulate the sensitivity system");
  common(derivative, true);
  derivative->add_option("--order", opt.order, "Sensitivity order n")->check(CLI::Range(1, 5));
  derivative->add_flag("--stream", opt.stream, "Write every grid time instead of the final state");

  auto* verify = app.add_subcommand("verify", "Run a verification test");
  verify->add_option("test", opt.test, "gateaux|frechet|higher|lipschitz|contraction|chainrule|plan")
      ->required()
      ->check(CLI::IsMember({"gateaux", "frechet", "higher", "lipschitz", "contraction", "chainrule", "plan"}));
  common(verify, false);
  verify->add_option("--epsilons", opt.epsilons, "Decreasing epsilon ladder")->delimiter(',');
  verify->add_option("--order", opt.order, "Order n")->check(CLI::Range(1, 5));

  auto* partitions = app.add_subcommand("partitions", "List the set partitions of {1..n}");
  partitions->add_option("--n", opt.n, "Set size")->required()->check(CLI::Range(1, 8));
  partitions->add_flag("--grouped", opt.grouped, "Group by block sizes with multiplicities");
  partitions->add_option("--out", opt.out, "CSV output file");

  auto* norms = app.add_subcommand("norms", "Estimate S^p, L^p(L^q(nu)) and G^p norms");
  common(norms, true);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return cmd_simulate(opt, out, err);
    if (*derivative) return cmd_derivative(opt, out, err);
    if (*verify) return cmd_verify(opt, out, err);
    if (*partitions) return cmd_partitions(opt, out);
    if (*norms) return cmd_norms(opt, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const PlanViolation& e) {
    err << "FAIL: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run(args, std::cout, std::cerr);
}

}  // namespace spdesens
