#include "jsr/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace jsr::io {

namespace {

[[noreturn]] void fail(const std::string& source, const std::string& msg) {
  throw ValidationError(source + ": " + msg);
}

void check_schema(const json& j, const std::string& source) {
  if (!j.is_object()) fail(source, "top level must be a JSON object");
  if (!j.contains("schema_version")) fail(source, "missing field 'schema_version'");
  const json& v = j.at("schema_version");
  if (!v.is_string() || v.get<std::string>() != kSchemaVersion)
    fail(source, "unsupported schema_version (expected \"1\")");
}

Complex parse_entry(const json& e, const std::string& where) {
  if (e.is_number()) {
    const double x = e.get<double>();
    if (!std::isfinite(x)) throw ValidationError(where + ": entry is not finite");
    return {x, 0.0};
  }
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
    const Complex z(e[0].get<double>(), e[1].get<double>());
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw ValidationError(where + ": entry is not finite");
    return z;
  }
  throw ValidationError(where + ": entry must be a number or an [re, im] pair");
}

std::vector<Matrix> parse_matrices(const json& j, const std::string& source) {
  if (!j.contains("matrices") || !j.at("matrices").is_array() || j.at("matrices").empty())
    fail(source, "'matrices' must be a non-empty array");
  const json& ms = j.at("matrices");
  long dim = -1;
  if (j.contains("dim")) {
    if (!j.at("dim").is_number_integer() || j.at("dim").get<long>() < 1)
      fail(source, "'dim' must be a positive integer");
    dim = j.at("dim").get<long>();
  }
  std::vector<Matrix> out;
  for (std::size_t k = 0; k < ms.size(); ++k) {
    const std::string mw = source + ": matrices[" + std::to_string(k) + "]";
    const json& m = ms[k];
    if (!m.is_array() || m.empty()) throw ValidationError(mw + ": must be a non-empty array of rows");
    const long rows = static_cast<long>(m.size());
    if (dim < 0) dim = rows;
    if (rows != dim)
      throw ValidationError(mw + ": has " + std::to_string(rows) + " rows, expected " + std::to_string(dim));
    Matrix out_m(dim, dim);
    for (long r = 0; r < rows; ++r) {
      const json& row = m[static_cast<std::size_t>(r)];
      const std::string rw = mw + "[" + std::to_string(r) + "]";
      if (!row.is_array()) throw ValidationError(rw + ": row must be an array");
      if (static_cast<long>(row.size()) != dim)
        throw ValidationError(rw + ": row has " + std::to_string(row.size()) + " entries, expected " +
                              std::to_string(dim) + " (matrix index " + std::to_string(k) + ")");
      for (long c = 0; c < dim; ++c)
        out_m(r, c) = parse_entry(row[static_cast<std::size_t>(c)], rw + "[" + std::to_string(c) + "]");
    }
    out.push_back(std::move(out_m));
  }
  return out;
}

std::vector<double> parse_reals(const json& a, const std::string& where) {
  if (!a.is_array()) throw ValidationError(where + ": must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : a) {
    if (!x.is_number()) throw ValidationError(where + ": must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Eigen::MatrixXd parse_real_matrix(const json& a, const std::string& where) {
  if (!a.is_array() || a.empty()) throw ValidationError(where + ": must be a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = parse_reals(a[static_cast<std::size_t>(i)], where + "[" + std::to_string(i) + "]");
    if (static_cast<Eigen::Index>(row.size()) != n) throw ValidationError(where + ": matrix must be square");
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  return m;
}

Word parse_json_word(const json& a, const std::string& where) {
  if (!a.is_array() || a.empty()) throw ValidationError(where + ": must be a non-empty array of letters");
  Word w;
  for (const auto& x : a) {
    if (!x.is_number_integer()) throw ValidationError(where + ": letters must be integers");
    w.letters.push_back(x.get<int>());
  }
  return w;
}

}  // namespace

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": malformed JSON: " + e.what());
  }
}

MatrixFamily parse_family_json(const json& j, const std::string& source) {
  check_schema(j, source);
  try {
    return MatrixFamily(parse_matrices(j, source));
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    fail(source, e.what());
  }
}

MatrixFamily parse_family(const std::string& path) { return parse_family_json(load_json(path), path); }

json family_to_json(const MatrixFamily& family) {
  json ms = json::array();
  for (const Matrix& m : family) ms.push_back(to_json(m));
  return {{"schema_version", kSchemaVersion}, {"dim", family.dim()}, {"matrices", ms}};
}

MatrixFamily FamilyTemplate::at(double alpha) const {
  std::vector<Matrix> out;
  for (std::size_t k = 0; k < matrices.size(); ++k) out.push_back(matrices[k] * std::pow(alpha, powers[k]));
  return MatrixFamily(out);
}

FamilyTemplate parse_template_json(const json& j, const std::string& source) {
  check_schema(j, source);
  FamilyTemplate t;
  t.matrices = parse_matrices(j, source);
  if (!j.contains("param_powers")) fail(source, "a parameter template needs 'param_powers'");
  const json& p = j.at("param_powers");
  if (!p.is_array() || p.size() != t.matrices.size())
    fail(source, "'param_powers' must list one integer per matrix");
  for (const auto& x : p) {
    if (!x.is_number_integer()) fail(source, "'param_powers' entries must be integers");
    t.powers.push_back(x.get<int>());
  }
  MatrixFamily check(t.matrices);
  (void)check;
  return t;
}

FamilyTemplate parse_template(const std::string& path) { return parse_template_json(load_json(path), path); }

ShiftMeasure parse_measure_json(const json& j, const std::string& source) {
  check_schema(j, source);
  if (!j.contains("type") || !j.at("type").is_string()) fail(source, "missing string field 'type'");
  const std::string type = j.at("type").get<std::string>();
  if (type == "markov") {
    if (!j.contains("transition")) fail(source, "markov measure needs 'transition'");
    Eigen::MatrixXd P = parse_real_matrix(j.at("transition"), source + ": transition");
    if (j.contains("stationary"))
      return MarkovMeasure(parse_reals(j.at("stationary"), source + ": stationary"), std::move(P));
    return MarkovMeasure::from_transition(std::move(P));
  }
  if (type == "periodic") {
    if (!j.contains("alphabet") || !j.at("alphabet").is_number_integer())
      fail(source, "periodic measure needs integer 'alphabet'");
    if (!j.contains("period")) fail(source, "periodic measure needs 'period'");
    return PeriodicMeasure{PeriodicSequence(j.at("alphabet").get<int>(),
                                            parse_json_word(j.at("period"), source + ": period"))};
  }
  fail(source, "unknown measure type '" + type + "' (expected markov or periodic)");
}

ShiftMeasure parse_measure(const std::string& path) { return parse_measure_json(load_json(path), path); }

json measure_to_json(const ShiftMeasure& mu) {
  if (const auto* pm = std::get_if<PeriodicMeasure>(&mu))
    return {{"schema_version", kSchemaVersion},
            {"type", "periodic"},
            {"alphabet", pm->alphabet()},
            {"period", to_json(pm->base.period_word())}};
  const auto& m = std::get<MarkovMeasure>(mu);
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.transition().rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.transition().cols(); ++j) row.push_back(m.transition()(i, j));
    rows.push_back(row);
  }
  return {{"schema_version", kSchemaVersion}, {"type", "markov"}, {"transition", rows}, {"stationary", m.stationary()}};
}

NormCertificate parse_norm_json(const json& j, const std::string& source) {
  check_schema(j, source);
  const std::string kind = j.value("kind", std::string("polytope"));
  NormCertificate n;
  if (kind == "euclidean") {
    if (!j.contains("dim") || !j.at("dim").is_number_integer()) fail(source, "euclidean norm needs 'dim'");
    n = NormCertificate::euclidean(j.at("dim").get<int>());
  } else if (kind == "polytope") {
    if (!j.contains("vertices") || !j.at("vertices").is_array() || j.at("vertices").empty())
      fail(source, "polytope norm needs non-empty 'vertices'");
    std::vector<Eigen::RowVectorXd> vs;
    for (std::size_t i = 0; i < j.at("vertices").size(); ++i) {
      const auto v = parse_reals(j.at("vertices")[i], source + ": vertices[" + std::to_string(i) + "]");
      vs.push_back(Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    n = NormCertificate::polytope(std::move(vs));
  } else {
    fail(source, "unknown norm kind '" + kind + "'");
  }
  validate_norm(n);
  return n;
}

NormCertificate parse_norm(const std::string& path) { return parse_norm_json(load_json(path), path); }

// ---------------------------------------------------------------------------

json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

json to_json(const Word& w) { return w.letters; }

json to_json(const Matrix& m) {
  const bool real = m.imag().cwiseAbs().maxCoeff() == 0.0;
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (real)
        row.push_back(m(i, j).real());
      else
        row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    }
    rows.push_back(row);
  }
  return rows;
}

json to_json(const BoundsBracket& b) {
  return {{"lower", number(b.lower)},
          {"upper", number(b.upper)},
          {"width", number(b.width())},
          {"best_word", to_json(b.best_word)},
          {"depth_explored", b.depth_explored},
          {"nodes_visited", b.nodes_visited},
          {"partial", b.partial}};
}

namespace {

std::string status_name(CertificateStatus s) {
  switch (s) {
    case CertificateStatus::verified: return "verified";
    case CertificateStatus::candidate: return "candidate";
    case CertificateStatus::failed: return "failed";
  }
  return "?";
}

}  // namespace

json to_json(const NormCertificate& n) {
  json j = {{"schema_version", kSchemaVersion},
            {"kind", n.kind == NormCertificate::Kind::euclidean ? "euclidean" : "polytope"},
            {"dim", n.dim},
            {"margin", number(n.margin)},
            {"status", status_name(n.status)}};
  if (n.kind == NormCertificate::Kind::polytope) {
    json vs = json::array();
    for (const auto& v : n.vertices) vs.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    j["vertex_count"] = n.vertices.size();
    j["vertices"] = vs;
  }
  return j;
}

json to_json(const FinitenessCertificate& c) {
  return {{"verdict", c.verdict == FinitenessVerdict::certified ? "certified" : "inconclusive"},
          {"word", to_json(c.word)},
          {"value", number(c.value)},
          {"upper", number(c.upper())},
          {"seed_rotation", to_json(c.seed_rotation)},
          {"reason", c.reason},
          {"certificate", to_json(c.certificate)}};
}

json to_json(const NormCheck& c) {
  return {{"extremal", c.extremal}, {"attained", number(c.attained)}, {"gap", number(c.gap)}, {"sound", c.sound}};
}

json to_json(const ReductionResult& r) {
  json blocks = json::array();
  for (const auto& b : r.blocks) {
    json ms = json::array();
    for (const Matrix& m : b) ms.push_back(to_json(m));
    blocks.push_back(ms);
  }
  return {{"transform", to_json(r.transform)},
          {"block_sizes", r.block_sizes},
          {"blocks", blocks},
          {"structure", r.lower_block_triangular ? "lower-block-triangular" : "unknown"},
          {"residual", number(r.residual)},
          {"uncertain", r.uncertain}};
}

json to_json(const DominantBlocks& d) {
  json bs = json::array();
  for (const auto& b : d.block_brackets) bs.push_back(to_json(b));
  return {{"indices", d.indices},
          {"ambiguous", d.ambiguous},
          {"family_bracket", to_json(d.family_bracket)},
          {"block_brackets", bs}};
}

json to_json(const ExtremalSubspace& e) {
  json j = {{"determined", e.determined},
            {"dimension", e.dimension()},
            {"basis", to_json(e.basis)},
            {"rho_estimate", number(e.rho_estimate)},
            {"attained", number(e.attained)},
            {"family_bracket", to_json(e.family_bracket)},
            {"diagnostics", e.diagnostics}};
  json rf = json::array();
  for (const Matrix& m : e.restricted_family) rf.push_back(to_json(m));
  j["restricted_family"] = rf;
  j["norm"] = e.norm ? to_json(*e.norm) : json(nullptr);
  return j;
}

json to_json(const LyapunovEstimate& e) {
  json j = {{"value", number(e.value)},
            {"method", to_string(e.method)},
            {"n_or_samples", e.n_or_samples},
            {"stderr", number(e.std_error)}};
  if (e.method == LyapunovMethod::monte_carlo) j["length"] = e.length;
  return j;
}

json to_json(const ExtremalityVerdict& v) {
  json j = {{"verdict", to_string(v.verdict)},
            {"lyapunov", to_json(v.lyapunov)},
            {"jsr_bracket", to_json(v.jsr_bracket)},
            {"log_lower", number(v.jsr_bracket.lower > 0 ? std::log(v.jsr_bracket.lower) : -INFINITY)},
            {"log_upper", number(v.jsr_bracket.upper > 0 ? std::log(v.jsr_bracket.upper) : -INFINITY)},
            {"gap", number(v.gap)},
            {"tol", number(v.tol)},
            {"note", v.note}};
  if (v.exact) j["exact"] = to_json(*v.exact);
  return j;
}

json to_json(const DensityDecision& d) {
  return {{"is_density_point", d.is_density_point},
          {"certificate", d.kind == CertificateKind::structural ? "structural" : "horizon-checked"},
          {"letters_examined", d.letters_examined}};
}

json to_json(const MainTheoremReport& r) {
  json j = {{"success", r.success},
            {"failed_step", to_string(r.failed_step)},
            {"density", to_json(r.density)},
            {"candidate", to_json(r.candidate)},
            {"candidate_value", number(r.candidate_value)},
            {"message", r.message}};
  j["extremality"] = r.extremality ? to_json(*r.extremality) : json(nullptr);
  j["certificate"] = r.certificate ? to_json(*r.certificate) : json(nullptr);
  return j;
}

json to_json(const CorollaryReport& r) {
  json attempts = json::array();
  for (const auto& a : r.attempts)
    attempts.push_back({{"word", to_json(a.word)},
                        {"value", number(a.value)},
                        {"verdict", a.verdict == FinitenessVerdict::certified ? "certified" : "inconclusive"},
                        {"reason", a.reason}});
  return {{"verdict", to_json(r.verdict)},
          {"finiteness_attempts", attempts},
          {"finiteness", r.finiteness ? to_json(*r.finiteness) : json(nullptr)},
          {"scan_max", number(r.scan_max)},
          {"scan_word", to_json(r.scan_word)},
          {"certified_upper", number(r.certified_upper)},
          {"upper_source", r.upper_source},
          {"stability", to_string(r.stability)}};
}

}  // namespace jsr::io
