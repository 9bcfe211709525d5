#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "medsens/benchmarking.hpp"
#include "medsens/inference.hpp"
#include "medsens/oracle.hpp"
#include "medsens/robustness.hpp"

namespace medsens {

inline constexpr const char* kSchemaVersion = "medsens/1";

nlohmann::ordered_json to_json(const EffectReport& r);
nlohmann::ordered_json to_json(const BootstrapSummary& s);
nlohmann::ordered_json to_json(const RVReport& r);
nlohmann::ordered_json to_json(const NaturalSensitivity& s);
nlohmann::ordered_json to_json(const LeaveOneOutSensitivity& s);
nlohmann::ordered_json observed_json(const MediationMoments& mm);

// Bootstrap-backed report for an arbitrary adjusted estimator.
EffectReport bootstrap_report(const MediationMoments& mm, const BootstrapPlan& plan,
                              const std::function<double(const MediationMoments&)>& estimator, EffectKind kind,
                              EffectMethod method, double z, BootstrapSummary* summary = nullptr);

std::string curve_csv(const RVReport& direct, const RVReport& indirect);
std::string study_csv(const std::vector<StudyRow>& rows);

}  // namespace medsens
