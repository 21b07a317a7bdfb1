#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "corrstruct/bits.hpp"
#include "corrstruct/complexity.hpp"
#include "corrstruct/core.hpp"
#include "corrstruct/mace.hpp"
#include "corrstruct/spectral.hpp"
#include "corrstruct/theory.hpp"

namespace corrstruct {

using json = nlohmann::json;

/// {k, eigenvalues_hint, alphabets, tables keyed by symbol string}
json feature_set_to_json(const FeatureSet& fs, const std::vector<Alphabet>& alphabets);
FeatureSet feature_set_from_json(const json& j, std::vector<Alphabet>* alphabets_out = nullptr);

json distribution_to_json(const DistributionSet& dist);

json lemma1_report_to_json(const Lemma1Report& rep);
json theorem_report_to_json(const TheoremReport& rep);
json exponent_result_to_json(const ExponentResult& res);
json exceedance_curve_to_json(const ExceedanceCurve& curve);
json mace_trace_to_json(const MaceTrace& trace);

json bits_instance_to_json(const BitsInstance& inst);
BitsInstance bits_instance_from_json(const json& j);

void write_json_file(const json& j, const std::string& path);
json read_json_file(const std::string& path);

}  // namespace corrstruct
