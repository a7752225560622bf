#include "jsr/cli.hpp"

#include "jsr/io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace jsr::cli {

namespace {

using io::json;

struct Config {
  int depth = 8;
  double tol = 1e-6;
  std::size_t budget = kDefaultNodeBudget;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool transpose = false;
  std::string out_path;
};

struct Outcome {
  json inputs = json::object();
  json results = json::object();
  int code = kSuccess;
};

std::string fmt(double x, int precision = 12) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s << std::setprecision(precision) << x;
  return s.str();
}

void row(std::ostream& out, const std::string& key, const std::string& value) {
  out << "  " << std::left << std::setw(22) << key << value << "\n";
}

MatrixFamily load_family(const std::string& path, const Config& cfg) {
  MatrixFamily f = io::parse_family(path);
  return cfg.transpose ? f.transposed() : f;
}

SearchOptions search_options(const Config& cfg) {
  SearchOptions s;
  s.node_budget = cfg.budget;
  s.threads = cfg.threads;
  return s;
}

VerdictOptions verdict_options(const Config& cfg) {
  VerdictOptions v;
  v.tol = cfg.tol;
  v.seed = cfg.seed;
  v.search = search_options(cfg);
  v.word_budget = cfg.budget;
  return v;
}

struct MeasureArgs {
  std::string markov, measure, periodic;
};

void add_measure_options(CLI::App* sub, MeasureArgs& m) {
  auto* a = sub->add_option("--markov", m.markov, "Markov measure file")->check(CLI::ExistingFile);
  auto* b = sub->add_option("--measure", m.measure, "measure file (markov or periodic)")->check(CLI::ExistingFile);
  auto* c = sub->add_option("--periodic", m.periodic, "periodic orbit measure, e.g. 1,2");
  a->excludes(b)->excludes(c);
  b->excludes(c);
}

ShiftMeasure load_measure(const MeasureArgs& m, const MatrixFamily& family, json& inputs) {
  if (!m.markov.empty()) {
    inputs["measure"] = m.markov;
    ShiftMeasure mu = io::parse_measure(m.markov);
    if (!std::holds_alternative<MarkovMeasure>(mu)) throw ValidationError(m.markov + ": expected a markov measure");
    return mu;
  }
  if (!m.measure.empty()) {
    inputs["measure"] = m.measure;
    return io::parse_measure(m.measure);
  }
  if (!m.periodic.empty()) {
    inputs["measure"] = "periodic:" + m.periodic;
    return PeriodicMeasure{PeriodicSequence(static_cast<int>(family.size()), parse_word(m.periodic))};
  }
  throw ValidationError("a measure is required: use --markov, --measure or --periodic");
}

void print_bracket(std::ostream& out, const BoundsBracket& b) {
  row(out, "lower", fmt(b.lower));
  row(out, "upper", fmt(b.upper));
  row(out, "width", fmt(b.width(), 6));
  row(out, "best word", to_string(b.best_word));
  row(out, "depth explored", std::to_string(b.depth_explored));
  row(out, "nodes visited", std::to_string(b.nodes_visited));
  row(out, "partial", b.partial ? "yes" : "no");
}

void print_verdict(std::ostream& out, const ExtremalityVerdict& v) {
  row(out, "verdict", to_string(v.verdict));
  row(out, "lyapunov", fmt(v.lyapunov.value) + " (" + to_string(v.lyapunov.method) + ")");
  if (v.lyapunov.method == LyapunovMethod::monte_carlo) row(out, "stderr", fmt(v.lyapunov.std_error, 4));
  if (v.exact) row(out, "exact n=" + std::to_string(v.exact->n_or_samples), fmt(v.exact->value));
  row(out, "log jsr bracket", "[" + fmt(v.jsr_bracket.lower > 0 ? std::log(v.jsr_bracket.lower) : -INFINITY) +
                                  ", " + fmt(v.jsr_bracket.upper > 0 ? std::log(v.jsr_bracket.upper) : -INFINITY) + "]");
  row(out, "gap", fmt(v.gap, 6));
  if (!v.note.empty()) row(out, "note", v.note);
}

void print_certificate(std::ostream& out, const FinitenessCertificate& c) {
  row(out, "verdict", c.verdict == FinitenessVerdict::certified ? "certified" : "inconclusive");
  row(out, "word", to_string(c.word));
  row(out, "value", fmt(c.value));
  row(out, "certified upper", fmt(c.upper()));
  row(out, "norm", c.certificate.kind == NormCertificate::Kind::euclidean
                       ? std::string("euclidean")
                       : "polytope, " + std::to_string(c.certificate.vertices.size()) + " vertices");
  row(out, "reason", c.reason);
}

// --- subcommands -------------------------------------------------------------

Outcome cmd_bounds(const std::string& path, const std::string& method, const Config& cfg, std::ostream& out) {
  Outcome o;
  const MatrixFamily f = load_family(path, cfg);
  o.inputs = {{"family", path}, {"method", method}};
  BoundsBracket b;
  if (method == "exhaustive" || method == "both") b = exhaustive_bracket(f, cfg.depth, search_options(cfg));
  if (method == "pruned" || method == "both") {
    PrunedSearchOptions po;
    po.node_budget = cfg.budget;
    const BoundsBracket p = pruned_search(f, cfg.tol, po);
    o.results["pruned"] = io::to_json(p);
    b = method == "both" ? intersect(b, p) : p;
  }
  o.results["bracket"] = io::to_json(b);
  out << "bounds (" << method << ")\n";
  print_bracket(out, b);
  return o;
}

Outcome cmd_finiteness(const std::string& path, const std::string& word, bool search, std::size_t vertex_budget,
                       const Config& cfg, std::ostream& out) {
  Outcome o;
  const MatrixFamily f = load_family(path, cfg);
  o.inputs = {{"family", path}, {"vertex_budget", vertex_budget}};
  CertifyOptions co;
  co.vertex_budget = vertex_budget;
  std::vector<Word> candidates;
  if (!word.empty()) {
    candidates.push_back(parse_word(word));
    o.inputs["word"] = word;
  } else if (search) {
    o.inputs["search"] = true;
    const BoundsBracket b = exhaustive_bracket(f, cfg.depth, search_options(cfg));
    candidates.push_back(b.best_word);
    PrunedSearchOptions po;
    po.node_budget = cfg.budget;
    const BoundsBracket p = pruned_search(f, cfg.tol, po);
    if (!cyclically_equal(p.best_word, b.best_word)) candidates.push_back(p.best_word);
    o.results["search_bracket"] = io::to_json(intersect(b, p));
  } else {
    throw ValidationError("finiteness needs --word or --search");
  }
  FinitenessCertificate last;
  for (const Word& w : candidates) {
    last = certify_finiteness(f, w, co);
    if (last.verdict == FinitenessVerdict::certified) break;
  }
  o.results["certificate"] = io::to_json(last);
  out << "finiteness\n";
  print_certificate(out, last);
  o.code = last.verdict == FinitenessVerdict::certified ? kSuccess : kInconclusive;
  return o;
}

Outcome cmd_reduce(const std::string& path, const Config& cfg, std::ostream& out) {
  Outcome o;
  const MatrixFamily f = load_family(path, cfg);
  o.inputs = {{"family", path}};
  const AlgebraDimension ad = algebra_dimension_report(f);
  const ReductionResult r = block_triangularize(f, cfg.seed);
  const DominantBlocks dom = dominant_blocks(f, r, cfg.depth, search_options(cfg));
  const ExtremalSubspace e = extremal_subspace(f, cfg.depth, cfg.seed, search_options(cfg));
  o.results = {{"algebra_dimension", ad.dimension},
               {"algebra_uncertain", ad.uncertain},
               {"irreducible", ad.dimension == f.dim() * f.dim()},
               {"reduction", io::to_json(r)},
               {"dominant_blocks", io::to_json(dom)},
               {"extremal_subspace", io::to_json(e)}};
  out << "reduce\n";
  row(out, "algebra dimension", std::to_string(ad.dimension) + (ad.uncertain ? " (uncertain)" : ""));
  row(out, "irreducible", ad.dimension == f.dim() * f.dim() ? "yes" : "no");
  std::string sizes;
  for (int s : r.block_sizes) sizes += (sizes.empty() ? "" : ",") + std::to_string(s);
  row(out, "block sizes", sizes);
  row(out, "residual", fmt(r.residual, 4));
  std::string idx;
  for (int i : dom.indices) idx += (idx.empty() ? "" : ",") + std::to_string(i);
  row(out, "dominant blocks", idx + (dom.ambiguous ? " (ambiguous)" : ""));
  row(out, "extremal subspace", e.determined ? "dim " + std::to_string(e.dimension()) : "undetermined");
  row(out, "rho estimate", fmt(e.rho_estimate));
  if (e.norm) row(out, "attained on E", fmt(e.attained));
  row(out, "diagnostics", e.diagnostics);
  o.code = e.determined ? kSuccess : kInconclusive;
  return o;
}

Outcome cmd_norm_check(const std::string& path, const std::string& norm_arg, double rho, const Config& cfg,
                       std::ostream& out) {
  Outcome o;
  const MatrixFamily f = load_family(path, cfg);
  o.inputs = {{"family", path}, {"norm", norm_arg}};
  const NormCertificate n = norm_arg == "euclidean" ? NormCertificate::euclidean(static_cast<int>(f.dim()))
                                                    : io::parse_norm(norm_arg);
  const BoundsBracket b = resolve_bracket(f, cfg.depth, verdict_options(cfg));
  const double estimate = std::isnan(rho) ? b.lower : rho;
  if (!std::isnan(rho)) o.inputs["rho"] = rho;
  const NormCheck c = check_extremal_norm(f, n, estimate, b.lower);
  o.results = {{"check", io::to_json(c)}, {"rho_estimate", io::number(estimate)}, {"bracket", io::to_json(b)}};
  out << "norm-check\n";
  row(out, "extremal", c.extremal ? "yes" : "no");
  row(out, "attained", fmt(c.attained));
  row(out, "rho estimate", fmt(estimate));
  row(out, "relative gap", fmt(c.gap, 6));
  row(out, "sound", c.sound ? "yes" : "no");
  return o;
}

Outcome cmd_ergodic(const std::string& path, const MeasureArgs& m, std::size_t n, std::size_t samples,
                    std::size_t length, const Config& cfg, std::ostream& out) {
  Outcome o;
  const MatrixFamily f = load_family(path, cfg);
  o.inputs = {{"family", path}, {"n", n}, {"mc_samples", samples}, {"mc_length", length}};
  const ShiftMeasure mu = load_measure(m, f, o.inputs);
  VerdictOptions vo = verdict_options(cfg);
  vo.exact_n = n;
  vo.mc_samples = samples;
  vo.mc_length = length;
  const ExtremalityVerdict v = extremality_verdict(f, mu, cfg.depth, vo);
  o.results["verdict"] = io::to_json(v);
  out << "ergodic\n";
  print_verdict(out, v);
  o.code = v.verdict == Verdict::undetermined ? kInconclusive : kSuccess;
  return o;
}

Outcome cmd_main_theorem(const std::string& path, const MeasureArgs& m, const std::string& xi_word,
                         std::size_t vertex_budget, const Config& cfg, std::ostream& out) {
  Outcome o;
  const MatrixFamily f = load_family(path, cfg);
  o.inputs = {{"family", path}, {"xi", xi_word}, {"vertex_budget", vertex_budget}};
  const ShiftMeasure mu = load_measure(m, f, o.inputs);
  const PeriodicSequence xi(static_cast<int>(f.size()), parse_word(xi_word));
  VerdictOptions vo = verdict_options(cfg);
  vo.vertex_budget = vertex_budget;
  const MainTheoremReport r = measure_to_finiteness(f, mu, xi, cfg.depth, vo);
  o.results["report"] = io::to_json(r);
  out << "main-theorem\n";
  row(out, "density point", r.density.is_density_point ? "yes" : "no");
  if (r.extremality) row(out, "extremality", to_string(r.extremality->verdict));
  row(out, "candidate", to_string(r.candidate));
  if (r.certificate) row(out, "certificate", r.certificate->verdict == FinitenessVerdict::certified ? "certified" : "inconclusive");
  row(out, "outcome", r.success ? "success" : "failed at " + to_string(r.failed_step));
  row(out, "message", r.message);
  o.code = r.success ? kSuccess : kInconclusive;
  return o;
}

Outcome cmd_corollaries(const std::string& path, const MeasureArgs& m, const Config& cfg, std::ostream& out) {
  Outcome o;
  const MatrixFamily f = load_family(path, cfg);
  o.inputs = {{"family", path}};
  const ShiftMeasure mu = load_measure(m, f, o.inputs);
  const auto* markov = std::get_if<MarkovMeasure>(&mu);
  if (!markov) throw ValidationError("corollaries needs a Markov measure");
  const CorollaryReport r = corollary_reports(f, *markov, cfg.depth, verdict_options(cfg));
  o.results["report"] = io::to_json(r);
  out << "corollaries\n";
  print_verdict(out, r.verdict);
  if (r.finiteness) row(out, "finiteness witness", to_string(r.finiteness->word));
  row(out, "scan max", fmt(r.scan_max) + " at " + to_string(r.scan_word));
  row(out, "certified upper", fmt(r.certified_upper) + " (" + r.upper_source + ")");
  row(out, "stability", to_string(r.stability));
  o.code = r.verdict.verdict == Verdict::undetermined ? kInconclusive : kSuccess;
  return o;
}

Outcome cmd_sweep(const std::string& path, const std::string& param, double from, double to, int steps,
                  int depth_min, const std::string& format, const std::string& csv_path, const Config& cfg,
                  std::ostream& out) {
  if (steps < 1) throw ValidationError("--steps must be at least 1");
  if (depth_min < 1 || depth_min > cfg.depth) throw ValidationError("--depth-min must lie in [1, --depth]");
  Outcome o;
  const io::FamilyTemplate t = io::parse_template(path);
  o.inputs = {{"family", path}, {"param", param}, {"from", from}, {"to", to}, {"steps", steps}, {"depth_min", depth_min}};
  json rows = json::array();
  std::ostringstream csv;
  csv << param << ",depth,lower,upper,width,best_word\n";
  for (int i = 0; i < steps; ++i) {
    const double a = steps == 1 ? from : from + (to - from) * static_cast<double>(i) / (steps - 1);
    MatrixFamily f = t.at(a);
    if (cfg.transpose) f = f.transposed();
    for (int depth = depth_min; depth <= cfg.depth; ++depth) {
      const BoundsBracket b = exhaustive_bracket(f, depth, search_options(cfg));
      rows.push_back({{param, a}, {"depth", depth}, {"lower", b.lower}, {"upper", b.upper},
                      {"width", b.width()}, {"best_word", io::to_json(b.best_word)}, {"partial", b.partial}});
      csv << std::setprecision(17) << a << "," << depth << "," << b.lower << "," << b.upper << ","
          << b.width() << ",\"" << to_string(b.best_word) << "\"\n";
    }
  }
  o.results["rows"] = rows;
  if (!csv_path.empty()) {
    std::ofstream f(csv_path);
    if (!f) throw ValidationError(csv_path + ": cannot write");
    f << csv.str();
  }
  if (format == "json")
    out << rows.dump(2) << "\n";
  else
    out << csv.str();
  return o;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint spectral radius toolkit: bounds, finiteness certificates, reductions and ergodic verdicts", "jsr"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kToolVersion);

  Config cfg;
  app.add_option("--depth", cfg.depth, "search depth")->check(CLI::Range(1, 64));
  app.add_option("--tol", cfg.tol, "decision tolerance")->check(CLI::PositiveNumber);
  app.add_option("--budget", cfg.budget, "node budget");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--threads", cfg.threads, "worker threads (0: all cores)");
  app.add_flag("--transpose", cfg.transpose, "column-vector convention: transpose every matrix");
  app.add_option("--out", cfg.out_path, "write the JSON report here");

  std::string family;
  auto family_arg = [&](CLI::App* s) {
    s->add_option("family", family, "family JSON file")->required()->check(CLI::ExistingFile);
  };

  auto* bounds = app.add_subcommand("bounds", "certified JSR bracket");
  family_arg(bounds);
  std::string method = "exhaustive";
  bounds->add_option("--method", method, "exhaustive, pruned or both")
      ->check(CLI::IsMember({"exhaustive", "pruned", "both"}));

  auto* fin = app.add_subcommand("finiteness", "invariant-polytope certificate for a candidate word");
  family_arg(fin);
  std::string word;
  bool search = false;
  std::size_t vertex_budget = 10000;
  auto* wopt = fin->add_option("--word", word, "candidate word, e.g. 1,2");
  auto* sopt = fin->add_flag("--search", search, "search for a candidate word first");
  wopt->excludes(sopt);
  fin->add_option("--vertex-budget", vertex_budget, "polytope vertex budget");

  auto* red = app.add_subcommand("reduce", "irreducibility test, block triangularization, extremal subspace");
  family_arg(red);

  auto* nc = app.add_subcommand("norm-check", "test whether a norm is extremal");
  family_arg(nc);
  std::string norm_arg = "euclidean";
  double rho = std::nan("");
  nc->add_option("--norm", norm_arg, "'euclidean' or a norm JSON file");
  nc->add_option("--rho", rho, "JSR estimate (default: certified lower bound)");

  MeasureArgs erg_m, mt_m, cor_m;
  std::size_t n_exact = 12, mc_samples = 1000, mc_length = 1000;
  auto* erg = app.add_subcommand("ergodic", "extremality verdict for a shift-invariant measure");
  family_arg(erg);
  add_measure_options(erg, erg_m);
  erg->add_option("--n", n_exact, "largest exact finite n")->check(CLI::PositiveNumber);
  erg->add_option("--mc-samples", mc_samples, "monte-carlo paths")->check(CLI::Range(2ul, 100000000ul));
  erg->add_option("--mc-length", mc_length, "monte-carlo path length")->check(CLI::PositiveNumber);

  auto* mt = app.add_subcommand("main-theorem", "from an extremal measure with periodic density point to a finiteness certificate");
  family_arg(mt);
  add_measure_options(mt, mt_m);
  std::string xi;
  mt->add_option("--xi", xi, "periodic point, e.g. 1,2")->required();
  std::size_t mt_budget = 10000;
  mt->add_option("--vertex-budget", mt_budget, "polytope vertex budget");

  auto* cor = app.add_subcommand("corollaries", "finiteness and periodic stability reports for a Markov measure");
  family_arg(cor);
  add_measure_options(cor, cor_m);

  auto* sw = app.add_subcommand("sweep", "bracket rows over a one-parameter family");
  sw->add_option("family", family, "family template JSON file")->required()->check(CLI::ExistingFile);
  std::string param = "alpha", format = "csv", csv_path;
  double from = 0.6, to = 0.9;
  int steps = 31, depth_min = 6;
  sw->add_option("--param", param, "parameter name");
  sw->add_option("--from", from, "first parameter value");
  sw->add_option("--to", to, "last parameter value");
  sw->add_option("--steps", steps, "number of parameter values");
  sw->add_option("--depth-min", depth_min, "smallest depth per row block");
  sw->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sw->add_option("--csv", csv_path, "also write the CSV rows here");

  std::vector<std::string> argv_store{"jsr"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kError;
  }

  const auto start = std::chrono::steady_clock::now();
  out << "# config: depth=" << cfg.depth << " tol=" << fmt(cfg.tol) << " budget=" << cfg.budget
      << " seed=" << cfg.seed << " threads=" << cfg.threads << " transpose=" << (cfg.transpose ? "true" : "false")
      << " version=" << kToolVersion << "\n";

  Outcome o;
  std::string name;
  try {
    if (*bounds) {
      name = "bounds";
      o = cmd_bounds(family, method, cfg, out);
    } else if (*fin) {
      name = "finiteness";
      o = cmd_finiteness(family, word, search, vertex_budget, cfg, out);
    } else if (*red) {
      name = "reduce";
      o = cmd_reduce(family, cfg, out);
    } else if (*nc) {
      name = "norm-check";
      o = cmd_norm_check(family, norm_arg, rho, cfg, out);
    } else if (*erg) {
      name = "ergodic";
      o = cmd_ergodic(family, erg_m, n_exact, mc_samples, mc_length, cfg, out);
    } else if (*mt) {
      name = "main-theorem";
      o = cmd_main_theorem(family, mt_m, xi, mt_budget, cfg, out);
    } else if (*cor) {
      name = "corollaries";
      o = cmd_corollaries(family, cor_m, cfg, out);
    } else if (*sw) {
      name = "sweep";
      o = cmd_sweep(family, param, from, to, steps, depth_min, format, csv_path, cfg, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!cfg.out_path.empty()) {
    const json report = {
        {"subcommand", name},
        {"tool_version", kToolVersion},
        {"seed", cfg.seed},
        {"config",
         {{"depth", cfg.depth}, {"tol", cfg.tol}, {"budget", cfg.budget}, {"threads", cfg.threads}, {"transpose", cfg.transpose}}},
        {"inputs", o.inputs},
        {"results", o.results},
        {"exit_code", o.code},
        {"timing", {{"wall_seconds", wall}}}};
    std::ofstream f(cfg.out_path);
    if (!f) {
      err << "error: cannot write " << cfg.out_path << "\n";
      return kError;
    }
    f << report.dump(2) << "\n";
  }
  return o.code;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace jsr::cli
