#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "mf/cubature.h"
#include "mf/empirical.h"
#include "mf/grassmann.h"
#include "mf/moments.h"

namespace mf::io {

using Json = nlohmann::ordered_json;

// Every reader throws Error(ParseError) on missing or mistyped fields and
// forwards the domain validation errors of the constructed object.

Json to_json(const Projector &p);
Projector projector_from_json(const Json &j);

/// A non-finite gap is written as null and read back as +inf.
Json to_json(const CubatureRule &rule);
CubatureRule rule_from_json(const Json &j);

Json to_json(const MomentTensor &m);
MomentTensor moment_tensor_from_json(const Json &j);

Json to_json(const ProjectedMomentSet &set);
ProjectedMomentSet projected_from_json(const Json &j);

/// {"d", "k", "matrices": [[[row]...]...]}
Json to_json(const MeasurementEnsemble &ens);
MeasurementEnsemble ensemble_from_json(const Json &j);

Json to_json(const DiscreteDistribution &dist);
DiscreteDistribution distribution_from_json(const Json &j);

/// Header x1,...,xd then one row per sample.
void write_csv(std::ostream &os, const SampleBatch &batch);
SampleBatch read_csv(std::istream &is);

/// Two-space indented text with a trailing newline. Doubles use the shortest
/// representation that parses back to the same bits.
std::string dump(const Json &j);
Json parse(const std::string &text);

Json read_json_file(const std::string &path);
void write_text_file(const std::string &path, const std::string &text);
void write_json_file(const std::string &path, const Json &j);

} // namespace mf::io
