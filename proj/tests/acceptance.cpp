// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on failure.
#include "oracles.hpp"

#include "jsr/cli.hpp"
#include "jsr/ergodic.hpp"
#include "jsr/io.hpp"
#include "jsr/reduction.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

using namespace jsr;
using io::json;
using oracle::kPhi;

namespace {

const std::string kShare = JSR_SHARE_DIR;
const double kLogPhi = std::log(kPhi);

struct Check {
  bool ok = true;
  std::ostringstream detail;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "jsr_acceptance";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

int cli_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

void ac1(Check& c) {
  const Matrix ab = oracle::golden_a() * oracle::golden_b();
  const double phi = std::sqrt(std::abs(oracle::quadratic_eigenvalues(ab).first));
  const std::string b = temp_path("ac1_bounds.json"), f = temp_path("ac1_fin.json");
  c.require(cli_run({"bounds", kShare + "/golden_pair.json", "--depth", "12", "--out", b}) == 0, "bounds exit 0");
  const json jb = io::load_json(b)["results"]["bracket"];
  const double lower = jb["lower"].get<double>();
  c.require(std::abs(lower - phi) <= 1e-9, "lower = phi");
  c.require(cyclically_equal(Word(jb["best_word"].get<std::vector<int>>()), Word{1, 2}), "best word ~ (1,2)");
  c.require(cli_run({"finiteness", kShare + "/golden_pair.json", "--word", "1,2", "--out", f}) == 0,
            "finiteness exit 0");
  const json jf = io::load_json(f)["results"]["certificate"];
  c.require(jf["verdict"] == "certified", "certified");
  c.require(std::abs(jf["value"].get<double>() - phi) <= 1e-9, "value = phi");
  c.detail << "lower=" << lower << " value=" << jf["value"].get<double>();
}

void ac2(Check& c) {
  const auto [m12, v12] = finiteness_to_measure(oracle::golden_pair(), Word{1, 2}, 8);
  c.require(cyclically_equal(m12.base.period_word(), Word{1, 2}), "measure on (1,2) orbit");
  c.require(v12.verdict == Verdict::extremal, "(1,2) extremal");
  c.require(std::abs(v12.gap) <= 1e-6, "gap <= 1e-6");
  const auto [m1, v1] = finiteness_to_measure(oracle::golden_pair(), Word{1}, 8);
  c.require(m1.base.period_word() == Word{1}, "measure on (1) orbit");
  c.require(v1.verdict == Verdict::not_extremal, "(1) not extremal");
  c.require(std::abs(v1.lyapunov.value) <= 1e-12, "lyapunov 0");
  c.require(std::abs(std::log(v1.jsr_bracket.lower) - kLogPhi) <= 1e-9, "log jsr = log phi");
  c.detail << "gap(1,2)=" << v12.gap << " lyap(1)=" << v1.lyapunov.value;
}

void ac3(Check& c) {
  const ShiftMeasure mu = PeriodicMeasure{PeriodicSequence(2, Word{1, 2})};
  const auto ok = measure_to_finiteness(oracle::golden_pair(), mu, PeriodicSequence(2, Word{1, 2}), 8);
  c.require(ok.success, "pipeline succeeds");
  c.require(ok.certificate && ok.certificate->verdict == FinitenessVerdict::certified, "certificate");
  c.require(ok.certificate && cyclically_equal(ok.certificate->word, Word{1, 2}), "witness (1,2)");
  const auto bad = measure_to_finiteness(oracle::golden_pair(), mu, PeriodicSequence(2, Word{1}), 8);
  c.require(!bad.success && bad.failed_step == PipelineStep::density_point, "fails at density point");
  c.require(!bad.message.empty(), "structured report");
  c.detail << "witness=" << (ok.certificate ? to_string(ok.certificate->word) : "none")
           << " failure=" << to_string(bad.failed_step);
}

void ac4(Check& c) {
  const MatrixFamily s = oracle::shear();
  c.require(!is_irreducible(s), "reducible");
  const ReductionResult r = block_triangularize(s);
  c.require(r.block_sizes == std::vector<int>{1, 1}, "two 1x1 blocks");
  Eigen::Matrix2d a;
  a << 1, 1, 0, 1;
  const double sv = oracle::singular_max_2x2(a);
  const NormCheck nc = check_extremal_norm(s, NormCertificate::euclidean(2), 1.0, 1.0);
  c.require(!nc.extremal, "euclidean not extremal");
  c.require(std::abs(nc.attained - sv) <= 1e-12 && std::abs(sv - kPhi) <= 1e-12, "attained phi");
  const ExtremalSubspace e = extremal_subspace(s, 8);
  c.require(e.determined && e.dimension() == 1, "E has dimension 1");
  c.require(e.restricted_family.size() == 1 && e.restricted_family[0].rows() == 1 &&
                std::abs(e.restricted_family[0](0, 0) - 1.0) <= 1e-12,
            "restricted family {[1]}");
  c.require(e.norm.has_value() && std::abs(e.attained - 1.0) <= 1e-12, "attains 1 on E");
  c.detail << "attained=" << nc.attained << " dimE=" << e.dimension();
}

void ac5(Check& c) {
  const std::vector<ShiftMeasure> ms{io::parse_measure(kShare + "/uniform_markov.json"),
                                     io::parse_measure(kShare + "/asymmetric_markov.json"),
                                     io::parse_measure(kShare + "/periodic_12.json")};
  double worst = 0.0;
  for (const auto& mu : ms)
    for (int n = 1; n <= 8; ++n) {
      double total = 0.0;
      for (const auto& w : oracle::all_words(2, n)) {
        const double p = cylinder_probability(mu, Word(w));
        total += p;
        double ext = 0.0, pre = 0.0;
        for (int a = 1; a <= 2; ++a) {
          auto right = w;
          right.push_back(a);
          ext += cylinder_probability(mu, Word(right));
          std::vector<int> left{a};
          left.insert(left.end(), w.begin(), w.end());
          pre += cylinder_probability(mu, Word(left));
        }
        worst = std::max({worst, std::abs(ext - p), std::abs(pre - p)});
      }
      worst = std::max(worst, std::abs(total - 1.0));
    }
  c.require(worst <= 1e-12, "axioms within 1e-12");
  c.detail << "max deviation=" << worst;
}

void ac6(Check& c) {
  oracle::Gen gen(2024);
  const ShiftMeasure u = MarkovMeasure::uniform_bernoulli(2);
  double worst_mono = -INFINITY, worst_upper = -INFINITY;
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixFamily f = gen.real_family(2, 2);
    double prev = INFINITY;
    for (int n : {1, 2, 4, 8}) {
      const double v = lyapunov_exact_finite(f, u, static_cast<std::size_t>(n)).value;
      // Largest norm over words of length n, from the independent SVD oracle.
      double m = 0.0;
      for (const auto& w : oracle::all_words(2, n)) m = std::max(m, oracle::norm_oracle(oracle::product_oracle(f, w)));
      const double bound = std::log(m) / n;
      if (std::isfinite(prev)) worst_mono = std::max(worst_mono, v - prev);
      worst_upper = std::max(worst_upper, v - bound);
      prev = v;
    }
  }
  c.require(worst_mono <= 1e-12, "nonincreasing");
  c.require(worst_upper <= 1e-12, "below log upper bound");
  c.detail << "max increase=" << worst_mono << " max excess=" << worst_upper;
}

void ac7(Check& c) {
  Eigen::MatrixXd P(2, 2);
  P << 0, 1, 1, 0;
  const MarkovMeasure alt({0.5, 0.5}, P);
  const auto e = lyapunov_monte_carlo(oracle::golden_pair(), alt, 500, 2000, 0);
  c.require(std::abs(e.value - kLogPhi) <= 3 * e.std_error, "within 3 stderr of log phi");
  c.detail << "estimate=" << e.value << " stderr=" << e.std_error;

  oracle::Gen gen(7);
  double worst = 0.0, worst_se = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const int d = gen.integer(1, 4);
    const Matrix a = gen.real(d);
    const std::size_t length = 500;
    const auto s = lyapunov_monte_carlo(MatrixFamily{a}, MarkovMeasure::uniform_bernoulli(1), 20, length, 3);
    // Oracle: repeated squaring with exact log bookkeeping.
    Matrix p = Matrix::Identity(d, d);
    double log_scale = 0.0;
    for (std::size_t i = 0; i < length; ++i) {
      p = p * a;
      const double n = p.norm();
      if (n > 0) {
        p /= n;
        log_scale += std::log(n);
      }
    }
    const double expected = (log_scale + std::log(oracle::norm_oracle(p))) / static_cast<double>(length);
    worst = std::max(worst, std::abs(s.value - expected));
    worst_se = std::max(worst_se, s.std_error);
  }
  c.require(worst <= 1e-9, "single matrix reproduces the power norm");
  c.require(worst_se <= 1e-9, "single matrix stderr <= 1e-9");
  c.detail << " single-matrix err=" << worst << " stderr=" << worst_se;
}

void ac8(Check& c) {
  oracle::Gen gen(808);
  double worst_resid = 0.0, worst_excess = -INFINITY;
  for (int trial = 0; trial < 10; ++trial) {
    const int m = trial % 2 ? 1 : 2, n = 3 - m;
    const Matrix q = gen.well_conditioned(3);
    std::vector<Matrix> ms;
    for (int k = 0; k < 2; ++k) {
      Matrix t = Matrix::Zero(3, 3);
      t.topLeftCorner(m, m) = gen.real(m);
      t.bottomRightCorner(n, n) = gen.real(n);
      t.bottomLeftCorner(n, m) = gen.real(3).topLeftCorner(n, m);
      ms.push_back(q.inverse() * t * q);
    }
    const MatrixFamily f(ms);
    const ReductionResult r = block_triangularize(f, static_cast<std::uint64_t>(trial));
    worst_resid = std::max(worst_resid, r.residual);
    const BoundsBracket fb = exhaustive_bracket(f, 8);
    double lo = 0.0, widths = fb.width();
    for (const auto& b : r.blocks) {
      const BoundsBracket bb = exhaustive_bracket(b, 8);
      lo = std::max(lo, bb.lower);
      widths += bb.width();
    }
    worst_excess = std::max(worst_excess, std::abs(lo - fb.lower) - widths);
    c.require(r.block_count() >= 2, "reducible structure found");
  }
  c.require(worst_resid <= 1e-8, "residual <= 1e-8");
  c.require(worst_excess <= 0.0, "max block bracket matches family bracket");
  c.detail << "max residual=" << worst_resid << " worst excess=" << worst_excess;
}

void ac9(Check& c) {
  const std::string out = temp_path("ac9_sweep.json");
  c.require(cli_run({"sweep", kShare + "/s_alpha.json", "--from", "0.60", "--to", "0.90", "--steps", "31", "--depth",
                     "10", "--depth-min", "6", "--out", out}) == 0,
            "sweep exit 0");
  const json rows = io::load_json(out)["results"]["rows"];
  c.require(rows.size() == 31 * 5, "31 x 5 rows");
  int bad_order = 0, bad_width = 0, missing_word = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const json& r = rows[i];
    if (r["lower"].get<double>() > r["upper"].get<double>()) ++bad_order;
    if (r["best_word"].empty()) ++missing_word;
    if (i % 5 != 0 && r["width"].get<double>() > rows[i - 1]["width"].get<double>() * (1 + 1e-12)) ++bad_width;
  }
  c.require(bad_order == 0, "lower <= upper");
  c.require(bad_width == 0, "width nonincreasing in depth");
  c.require(missing_word == 0, "best word listed");
  c.detail << "rows=" << rows.size();
}

void ac10(Check& c) {
  const MatrixFamily f = io::parse_family(kShare + "/diagonal_contractions.json");
  const auto r = corollary_reports(f, MarkovMeasure::uniform_bernoulli(2), 8);
  c.require(std::abs(r.scan_max - 0.5) <= 1e-12, "scan max 0.5");
  c.require(r.certified_upper <= 0.5 + 1e-9, "certified upper <= 0.5");
  c.require(r.certified_upper < 1.0, "rho < 1");
  c.detail << "scan max=" << r.scan_max << " certified upper=" << r.certified_upper << " (" << r.upper_source
           << ") verdict=" << to_string(r.verdict.verdict) << " stability=" << to_string(r.stability);
}

}  // namespace

int main() {
  struct Criterion {
    std::string name;
    std::function<void(Check&)> fn;
    double seconds;  // runtime limit
  };
  const std::vector<Criterion> criteria{{"golden pair regression", ac1, 5},  {"finiteness to measure", ac2, 5},
                                        {"measure to finiteness", ac3, 5},   {"shear counterexample", ac4, 2},
                                        {"measure axioms", ac5, 60},         {"finite-n monotonicity", ac6, 60},
                                        {"monte-carlo consistency", ac7, 30}, {"reduction conservation", ac8, 60},
                                        {"parameter sweep", ac9, 600},       {"stability corollary", ac10, 2}};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].fn(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.require(secs < criteria[i].seconds, "runtime < " + std::to_string(static_cast<int>(criteria[i].seconds)) + " s");
    if (!c.ok) ++failures;
    std::cout << "AC" << i + 1 << (c.ok ? " PASS" : " FAIL") << ": " << criteria[i].name << " (" << secs << " s) "
              << c.detail.str() << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " passed\n";
  return failures == 0 ? 0 : 1;
}
