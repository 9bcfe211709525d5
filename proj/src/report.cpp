#include "medsens/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "medsens/error.hpp"

namespace medsens {

using nlohmann::ordered_json;

namespace {

ordered_json vec_json(const VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

ordered_json finite_or_null(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

}  // namespace

ordered_json to_json(const EffectReport& r) {
  ordered_json j;
  j["effect_kind"] = to_string(r.effect_kind);
  j["method"] = to_string(r.method);
  j["estimate"] = r.estimate;
  j["std_err"] = r.std_err;
  j["t_stat"] = finite_or_null(r.t_stat);
  j["ci_lower"] = r.ci_lower;
  j["ci_upper"] = r.ci_upper;
  if (r.method == EffectMethod::SampleClassical) {
    j["worst_case_signs"] = r.worst_case_signs;
    j["signs"] = r.signs;
  }
  return j;
}

ordered_json to_json(const BootstrapSummary& s) {
  return ordered_json{{"std_err", s.std_err}, {"percentile_lower", s.ci_lower}, {"percentile_upper", s.ci_upper}};
}

ordered_json to_json(const RVReport& r) {
  ordered_json j;
  j["effect_kind"] = to_string(r.effect_kind);
  j["confounder_mode"] = to_string(r.mode);
  j["sign_flipped"] = r.sign_flipped;
  j["observed_t"] = finite_or_null(r.observed_t);
  j["rv_estimate"] = r.rv_estimate;
  j["rv_ci"] = r.rv_ci;
  ordered_json curve = ordered_json::array();
  for (const auto& [rho, t] : r.curve) curve.push_back(ordered_json::array({rho, finite_or_null(t)}));
  j["curve"] = curve;
  return j;
}

ordered_json to_json(const NaturalSensitivity& s) {
  return ordered_json{{"r_y", s.r_y}, {"r_m", vec_json(s.r_m)}, {"r_a", s.r_a}};
}

ordered_json to_json(const LeaveOneOutSensitivity& s) {
  return ordered_json{{"r_y", s.r_y}, {"r_m", vec_json(s.r_m)}, {"r_a", s.r_a}};
}

ordered_json observed_json(const MediationMoments& mm) {
  ordered_json j;
  j["n"] = mm.n;
  j["p"] = mm.p;
  j["q"] = mm.q;
  j["theta1"] = mm.theta1_obs;
  j["theta3"] = vec_json(mm.theta3_obs);
  j["beta1"] = vec_json(mm.beta1_obs);
  j["gamma1"] = mm.gamma1_obs;
  j["indirect"] = mm.indirect_obs();
  j["r2_m_a_c"] = mm.r_m_a_c.squaredNorm();
  j["r2_y_m_ac"] = mm.r_y_m_ac.squaredNorm();
  return j;
}

EffectReport bootstrap_report(const MediationMoments& mm, const BootstrapPlan& plan,
                              const std::function<double(const MediationMoments&)>& estimator, EffectKind kind,
                              EffectMethod method, double z, BootstrapSummary* summary) {
  BootstrapSummary s = bootstrap_se(plan, estimator);
  if (summary) *summary = s;
  return make_report(estimator(mm), s.std_err, kind, method, z);
}

std::string curve_csv(const RVReport& direct, const RVReport& indirect) {
  std::ostringstream os;
  os << "rho,min_t_direct,min_t_indirect\n";
  const std::size_t n = std::min(direct.curve.size(), indirect.curve.size());
  for (std::size_t i = 0; i < n; ++i)
    os << fmt(direct.curve[i].first) << ',' << fmt(direct.curve[i].second) << ',' << fmt(indirect.curve[i].second)
       << '\n';
  return os.str();
}

std::string study_csv(const std::vector<StudyRow>& rows) {
  std::ostringstream os;
  os << "dim_m,r2_a_m,r2_y_m,n,replications,rv_scalar,rv_vector,ratio,rv_ci_scalar,rv_ci_vector\n";
  for (const auto& r : rows)
    os << r.design.dim_m << ',' << fmt(r.design.r2_a_m) << ',' << fmt(r.design.r2_y_m) << ',' << r.design.n << ','
       << r.rv_scalar.size() << ',' << fmt(r.mean_scalar) << ',' << fmt(r.mean_vector) << ',' << fmt(r.ratio) << ','
       << fmt(r.mean_ci_scalar) << ',' << fmt(r.mean_ci_vector) << '\n';
  return os.str();
}

}  // namespace medsens
