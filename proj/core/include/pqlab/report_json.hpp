#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "pqlab/besov.hpp"
#include "pqlab/config.hpp"
#include "pqlab/covering.hpp"
#include "pqlab/hypothesis.hpp"
#include "pqlab/lavrentiev.hpp"
#include "pqlab/mollify.hpp"
#include "pqlab/solver.hpp"

namespace pqlab {

// Non-finite doubles are written as strings ("inf", "-inf", "nan").
void to_json(nlohmann::json& j, const Mat& m);
void to_json(nlohmann::json& j, const GrowthParams& g);
void to_json(nlohmann::json& j, const HypothesisReport& r);
void to_json(nlohmann::json& j, const CoverAudit& a);
void to_json(nlohmann::json& j, const PouAudit& a);
void to_json(nlohmann::json& j, const NormLadder& n);
void to_json(nlohmann::json& j, const SolveReport& r);
void to_json(nlohmann::json& j, const PathReport& r);
void to_json(nlohmann::json& j, const MollifyStudyRow& r);
void to_json(nlohmann::json& j, const H4Defect& d);
void to_json(nlohmann::json& j, const SlopeFit& f);
void to_json(nlohmann::json& j, const BesovReport& r);
void to_json(nlohmann::json& j, const AprioriExponents& a);
void to_json(nlohmann::json& j, const GapLevel& l);
void to_json(nlohmann::json& j, const GapPathEntry& e);
void to_json(nlohmann::json& j, const GapReport& r);
void to_json(nlohmann::json& j, const SequenceReport& r);
void to_json(nlohmann::json& j, const ExperimentConfig& c);

nlohmann::json number(double v);
/// Two-space indented text with a trailing newline.
std::string dump(const nlohmann::json& j);

}  // namespace pqlab
