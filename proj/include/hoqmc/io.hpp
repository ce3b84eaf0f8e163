#pragma once

// JSON and CSV serialization of matrices, nets, metrics, coefficients and
// worst-case error reports.

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hoqmc/bounds.hpp"
#include "hoqmc/digits.hpp"
#include "hoqmc/dual.hpp"
#include "hoqmc/error.hpp"
#include "hoqmc/ff.hpp"
#include "hoqmc/nets.hpp"
#include "hoqmc/walsh.hpp"
#include "hoqmc/wce.hpp"

namespace hoqmc {

using Json = nlohmann::ordered_json;

namespace detail {

template <class T>
T json_get(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InvalidInput(std::string("JSON is missing key \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidInput(std::string("JSON key \"") + key + "\": " + ex.what());
  }
}

inline Json min_metric_json(const MinMetricValue& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace detail

inline Json to_json(const FieldMatrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<Elem>(row.begin(), row.end()));
  }
  return Json{{"b", m.base().value()}, {"rows", m.rows()}, {"cols", m.cols()}, {"entries", rows}};
}

inline FieldMatrix field_matrix_from_json(const Json& j) {
  const PrimeBase base(detail::json_get<std::uint32_t>(j, "b"));
  const auto rows = detail::json_get<std::size_t>(j, "rows");
  const auto cols = detail::json_get<std::size_t>(j, "cols");
  const auto entries = detail::json_get<std::vector<std::vector<std::int64_t>>>(j, "entries");
  if (entries.size() != rows) throw InvalidInput("matrix JSON: entries has wrong row count");
  std::vector<Elem> flat;
  flat.reserve(rows * cols);
  for (const auto& row : entries) {
    if (row.size() != cols) throw InvalidInput("matrix JSON: entries has wrong column count");
    for (auto e : row) {
      if (e < 0 || e >= base.value()) throw InvalidInput("matrix JSON: entry not reduced mod b");
      flat.push_back(static_cast<Elem>(e));
    }
  }
  return FieldMatrix(base, rows, cols, std::move(flat));
}

inline Json to_json(const ConstructionParams& p) {
  return Json{{"s", p.s},         {"alpha", p.alpha}, {"beta", p.beta},
              {"g", p.g},         {"w", p.w},         {"b", p.b.value()},
              {"betas", p.effective_betas()}, {"strict", p.strict}};
}

inline ConstructionParams construction_params_from_json(const Json& j) {
  ConstructionParams p;
  p.s = detail::json_get<unsigned>(j, "s");
  p.alpha = detail::json_get<unsigned>(j, "alpha");
  p.beta = detail::json_get<unsigned>(j, "beta");
  p.g = detail::json_get<unsigned>(j, "g");
  p.w = detail::json_get<unsigned>(j, "w");
  p.b = PrimeBase(detail::json_get<std::uint32_t>(j, "b"));
  if (j.contains("betas")) p.betas = detail::json_get<std::vector<Elem>>(j, "betas");
  if (j.contains("strict")) p.strict = detail::json_get<bool>(j, "strict");
  return p;
}

// {"b","s","m","n","provenance","matrices"} plus "params" for constructed nets.
inline Json to_json(const DigitalNet& net) {
  Json mats = Json::array();
  for (const auto& c : net.matrices()) mats.push_back(to_json(c));
  Json j{{"b", net.base().value()}, {"s", net.s()},
         {"m", net.m()},            {"n", net.n()},
         {"provenance", to_string(net.provenance())}, {"matrices", mats}};
  if (net.params()) j["params"] = to_json(*net.params());
  return j;
}

inline DigitalNet net_from_json(const Json& j) {
  const PrimeBase base(detail::json_get<std::uint32_t>(j, "b"));
  const auto s = detail::json_get<std::size_t>(j, "s");
  const auto m = detail::json_get<std::size_t>(j, "m");
  const auto n = detail::json_get<std::size_t>(j, "n");
  Provenance prov = Provenance::Custom;
  if (j.contains("provenance")) prov = provenance_from_string(detail::json_get<std::string>(j, "provenance"));
  if (!j.contains("matrices") || !j.at("matrices").is_array()) throw InvalidInput("net JSON: matrices missing");
  std::vector<FieldMatrix> mats;
  for (const auto& mj : j.at("matrices")) {
    auto c = field_matrix_from_json(mj);
    require_same_base(c.base(), base);
    if (c.rows() != n || c.cols() != m) throw InvalidInput("net JSON: matrix shape differs from n x m");
    mats.push_back(std::move(c));
  }
  if (mats.size() != s) throw InvalidInput("net JSON: matrix count differs from s");
  DigitalNet net(base, std::move(mats), prov);
  if (j.contains("params")) net.set_params(construction_params_from_json(j.at("params")));
  return net;
}

inline Json net_from_text_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidInput(std::string("malformed JSON: ") + ex.what());
  }
}

inline Json to_json(const DigitVector& k) { return Json{{"value", k.to_decimal()}, {"b", k.base().value()}}; }

inline Json to_json(const MultiIndex& k) {
  Json arr = Json::array();
  for (const auto& c : k.components()) arr.push_back(c.to_decimal());
  return arr;
}

inline Json to_json(const MetricBounds& b) {
  return Json{{"hamming", b.hamming}, {"mu_beta", b.mu_beta}, {"mu_1", b.mu_1},
              {"beta", b.beta},       {"t", b.t},             {"t_prime", b.t_prime}};
}

inline Json metrics_json(const MetricSummary& m, const std::optional<MetricBounds>& bounds) {
  Json mu = Json::object();
  for (const auto& [a, v] : m.mu) mu[std::to_string(a)] = detail::min_metric_json(v);
  Json j{{"hamming_min", detail::min_metric_json(m.hamming)},
         {"nrt_min", detail::min_metric_json(m.nrt)},
         {"mu_alpha_min", mu},
         {"dual_size", m.dual_size}};
  if (bounds) {
    j["bounds"] = to_json(*bounds);
    j["bounds_satisfied"] = bounds_satisfied(m, *bounds);
  } else {
    j["bounds"] = Json::object();
    j["bounds_satisfied"] = nullptr;
  }
  return j;
}

inline Json to_json(const WalshCoefficient& c) {
  return Json{{"re", c.value.real()}, {"im", c.value.imag()}, {"abs_error", c.abs_error}};
}

inline Json to_json(const WceReport& r) {
  Json j{{"N", r.N},
         {"e", r.e},
         {"e_squared", r.e_squared},
         {"method", to_string(r.method)},
         {"error_budget", r.error_budget},
         {"truncation_radius", r.truncation_radius ? Json(*r.truncation_radius) : Json(nullptr)},
         {"workers", r.workers},
         {"rational", r.rational}};
  if (r.method == WceMethod::TruncatedDualSum) {
    j["main_part"] = r.main_part;
    j["tail_budget"] = r.tail_budget;
  }
  return j;
}

inline Json to_json(const BoundBreakdown& b) {
  auto rat = [](const Rational& q) {
    std::ostringstream os;
    os << q;
    return os.str();
  };
  return Json{{"A_interp", rat(b.A_interp)},
              {"B_interp", rat(b.B_interp)},
              {"G", b.G},
              {"t", b.t},
              {"t_prime", b.t_prime},
              {"t_prime_alpha", b.t_prime_alpha},
              {"S1", b.S1},
              {"S1_tail_bound", b.S1_tail_bound},
              {"B_alpha_b", b.B_alpha_b},
              {"B_alpha_b_is_surrogate", b.B_alpha_b_is_surrogate},
              {"decay_constant", b.decay_constant},
              {"main_part_explicit", b.main_part_explicit},
              {"main_part_bound", b.main_part_bound},
              {"discretization_explicit", b.discretization_explicit},
              {"dual_factor_shape", b.dual_factor_shape},
              {"discretization_bound", b.discretization_bound},
              {"within_hypotheses", b.within_hypotheses},
              {"empirical", {"decay_constant", "dual_factor_shape", "discretization_bound", "main_part_bound"}},
              {"notes", b.notes}};
}

enum class PointFormat { Rational, Decimal };

// One row per point, s columns: "numerator/b^n" or decimal floats.
inline std::string points_csv(const DigitalNet& net, PointFormat format) {
  std::ostringstream os;
  os.precision(17);
  std::ostringstream den;
  den << net.base().value() << '^' << net.n();
  for_each_point(net, [&](std::uint64_t, const NetPoint& p) {
    for (std::size_t j = 0; j < p.dimension(); ++j) {
      if (j) os << ',';
      if (format == PointFormat::Rational) {
        os << p.numerator(j) << '/' << den.str();
      } else {
        os << p.to_double(j);
      }
    }
    os << '\n';
  });
  return os.str();
}

}  // namespace hoqmc
