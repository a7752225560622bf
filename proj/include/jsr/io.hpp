#pragma once

#include "jsr/ergodic.hpp"
#include "jsr/extremal_norm.hpp"
#include "jsr/matrix_core.hpp"
#include "jsr/reduction.hpp"
#include "jsr/spectral_bounds.hpp"
#include "jsr/symbolic.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace jsr::io {

using json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

/// Family file:
///   {"schema_version": "1", "dim": d, "matrices": [M_1, ...], "labels": [...]}
/// Entries are numbers or [re, im] pairs. An optional "param_powers" array
/// marks the file as a one-parameter template S_k(a) = a^{p_k} M_k.
MatrixFamily parse_family(const std::string& path);
MatrixFamily parse_family_json(const json& j, const std::string& source = "<json>");
json family_to_json(const MatrixFamily& family);

struct FamilyTemplate {
  std::vector<Matrix> matrices;
  std::vector<int> powers;
  MatrixFamily at(double alpha) const;
};

FamilyTemplate parse_template(const std::string& path);
FamilyTemplate parse_template_json(const json& j, const std::string& source = "<json>");

/// Measure file:
///   {"schema_version": "1", "type": "markov", "transition": [[...]], "stationary": [...]}
///   {"schema_version": "1", "type": "periodic", "alphabet": K, "period": [1, 2]}
/// "stationary" is optional; it is computed from the transition matrix when
/// absent.
ShiftMeasure parse_measure(const std::string& path);
ShiftMeasure parse_measure_json(const json& j, const std::string& source = "<json>");
json measure_to_json(const ShiftMeasure& mu);

/// Polytope or Euclidean norm file:
///   {"schema_version": "1", "kind": "polytope", "vertices": [[...], ...]}
///   {"schema_version": "1", "kind": "euclidean", "dim": d}
NormCertificate parse_norm(const std::string& path);
NormCertificate parse_norm_json(const json& j, const std::string& source = "<json>");

json load_json(const std::string& path);

/// Non-finite doubles become the strings "inf", "-inf", "nan".
json number(double x);
json to_json(const Word& w);
json to_json(const Matrix& m);
json to_json(const BoundsBracket& b);
json to_json(const NormCertificate& n);
json to_json(const FinitenessCertificate& c);
json to_json(const NormCheck& c);
json to_json(const ReductionResult& r);
json to_json(const DominantBlocks& d);
json to_json(const ExtremalSubspace& e);
json to_json(const LyapunovEstimate& e);
json to_json(const ExtremalityVerdict& v);
json to_json(const MainTheoremReport& r);
json to_json(const CorollaryReport& r);
json to_json(const DensityDecision& d);

}  // namespace jsr::io
