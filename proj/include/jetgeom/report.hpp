#pragma once

#include <json.hpp>

#include "jetgeom/canonical_bundle.hpp"

namespace jetgeom {

using Json = nlohmann::ordered_json;

/// Bumped whenever a field is renamed or removed.
inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

/// {"order": N, "terms": [{"exponents": {"t": 1}, "coefficient": "1/2"}, ...]},
/// terms in graded lexicographic order. Coefficients are Taylor coefficients
/// in the displacements from the base point.
template <class S>
Json jet_json(const Jet<S>& x);

template <class S>
Json jet_matrix_json(const JetMatrix<S>& a);

Json audit_json(const OrderAudit& audit);

/// Normalizations fixing the residual gauge, to make reports comparable.
Json gauge_json(const std::string& transversal, bool projective);

Json filtration_json(const FiltrationReport& r);
Json equation_type_json(const EquationTypeReport& r);

template <class S>
Json invariants_json(const InvariantReport<S>& r);

Json triviality_json(const TrivialityVerdict& v);

template <class S>
Json trace_check_json(const TraceCheck<S>& c, int order);

Json schwarzian_json(const SchwarzianCheck& c);

/// Normalization system, canonical frame and structure functions; the Cartan
/// block is included when computed.
template <class S>
Json bundle_json(const BundleResult<S>& r);

}  // namespace jetgeom
