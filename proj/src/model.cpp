#include "lsz/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lsz {

ModelSpec validate(const ModelSpec& spec, const ValidateOptions& opt) {
  ModelSpec out = spec;
  auto check_side = [&](std::vector<ModelSpec::Eigenvalue>& v, const char* name) {
    long total = 0;
    for (const auto& ev : v) {
      if (!std::isfinite(ev.value))
        raise(ErrorCode::InvalidArgument, std::string(name) + ": non-finite eigenvalue");
      if (ev.mult <= 0)
        raise(ErrorCode::MultiplicityMismatch, std::string(name) + ": multiplicity must be positive");
      if (opt.strict_positive && !(ev.value > 0))
        raise(ErrorCode::NonPositiveInput, std::string(name) + ": eigenvalues must be > 0 in strict mode");
      total += ev.mult;
    }
    if (total != spec.n)
      raise(ErrorCode::MultiplicityMismatch,
            std::string(name) + ": multiplicities sum to " + std::to_string(total) +
                ", expected N = " + std::to_string(spec.n));
    std::sort(v.begin(), v.end(),
              [](const auto& a, const auto& b) { return a.value < b.value; });
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i].value == v[i - 1].value)
        raise(ErrorCode::DuplicateEigenvalue,
              std::string(name) + ": coinciding eigenvalues must be merged into multiplicities");
  };
  if (out.n <= 0) raise(ErrorCode::InvalidArgument, "N must be a positive integer");
  if (!std::isfinite(out.lambda)) raise(ErrorCode::InvalidArgument, "lambda must be finite");
  if (out.e.empty() || out.e_tilde.empty())
    raise(ErrorCode::InvalidArgument, "both eigenvalue lists must be non-empty");
  check_side(out.e, "eigenvalues_E");
  check_side(out.e_tilde, "eigenvalues_Etilde");
  return out;
}

ModelSpec model_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  ModelSpec spec;
  for (const auto& pair : j.at("eigenvalues_E"))
    spec.e.push_back({pair.at(0).get<double>(), pair.at(1).get<long>()});
  for (const auto& pair : j.at("eigenvalues_Etilde"))
    spec.e_tilde.push_back({pair.at(0).get<double>(), pair.at(1).get<long>()});
  spec.lambda = j.at("lambda").get<double>();
  spec.n = j.at("N").get<long>();
  return spec;
}

std::string model_to_json(const ModelSpec& spec) {
  nlohmann::json j;
  j["eigenvalues_E"] = nlohmann::json::array();
  for (const auto& ev : spec.e) j["eigenvalues_E"].push_back({ev.value, ev.mult});
  j["eigenvalues_Etilde"] = nlohmann::json::array();
  for (const auto& ev : spec.e_tilde) j["eigenvalues_Etilde"].push_back({ev.value, ev.mult});
  j["lambda"] = spec.lambda;
  j["N"] = spec.n;
  return j.dump(2);
}

ModelSpec load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::InvalidArgument, "cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

rat exact_rational(double x) {
  if (!std::isfinite(x)) raise(ErrorCode::InvalidArgument, "exact_rational: non-finite input");
  if (x == 0.0) return rat(0);
  int exp = 0;
  double m = std::frexp(x, &exp);  // x = m * 2^exp, |m| in [0.5, 1)
  long long mant = static_cast<long long>(std::ldexp(m, 53));
  exp -= 53;
  rat r(mant);
  boost::multiprecision::cpp_int two(1);
  if (exp >= 0) {
    two <<= exp;
    r *= rat(two);
  } else {
    two <<= -exp;
    r /= rat(two);
  }
  return r;
}

RationalModel to_rational(const ModelSpec& spec) {
  RationalModel rm;
  rm.n = spec.n;
  for (const auto& ev : spec.e) {
    rm.e.push_back(exact_rational(ev.value));
    rm.r.push_back(ev.mult);
  }
  for (const auto& ev : spec.e_tilde) {
    rm.e_tilde.push_back(exact_rational(ev.value));
    rm.r_tilde.push_back(ev.mult);
  }
  return rm;
}

}  // namespace lsz
