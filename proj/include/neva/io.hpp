#pragma once

// File formats: network and scenario JSON inputs, CSV/JSON result output.
//
// Network file
//   {"banks": [{"id": "A", "external_assets": 1.0, "external_liabilities": 0.0}, ...],
//    "liabilities": [{"debtor": "B", "creditor": "A", "amount": 1.2}, ...]}
// Each liability edge is oriented debtor -> creditor: the debtor owes the
// amount, and the creditor holds it as an interbank asset.
//
// Scenario file
//   {"valuation": {"external_kind": "unit", "interbank_kind": "exante_en_gbm",
//                  "beta": 1, "sigma": 0.1, "tau": 1},
//    "solver": {"epsilon": 1e-10, "max_iterations": 100000, "start": "face_values"},
//    "scenario": {"stress": {"alpha_grid": [0, 0.1, 0.2]}}}
// The scenario object holds exactly one of: solve, stress, limit_maturity,
// limit_beta, curve, mc_global.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "neva/analysis.hpp"
#include "neva/log.hpp"
#include "neva/network.hpp"
#include "neva/solver.hpp"
#include "neva/valuation.hpp"

namespace neva {

/// Malformed or invalid input. The message names the offending location.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using json = nlohmann::json;

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

inline json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(source + ":" + std::to_string(line_of(text, e.byte)) + ": JSON parse error: " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) throw InputError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError(where + "/" + key + ": missing field");
  return *it;
}

inline double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw InputError(where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InputError(where + ": must be finite");
  return d;
}

inline std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw InputError(where + ": expected a string");
  return v.get<std::string>();
}

inline std::vector<double> as_number_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw InputError(where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_number(v[k], where + "/" + std::to_string(k)));
  return out;
}

// Scalar or array.
inline std::vector<double> as_number_or_list(const json& v, const std::string& where) {
  if (v.is_array()) return as_number_list(v, where);
  return {as_number(v, where)};
}

inline double number_or(const json& obj, const std::string& key, double fallback, const std::string& where) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, where + "/" + key);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Network files

inline FinancialNetwork parse_network(const std::string& text, const std::string& source = "<network>") {
  using detail::json;
  const json doc = detail::parse_json_text(text, source);
  const std::string root = source + ":";
  const json& banks = detail::require(doc, "banks", root);
  if (!banks.is_array()) throw InputError(root + "/banks: expected an array");

  std::vector<std::string> ids;
  std::vector<double> assets, liabs;
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < banks.size(); ++k) {
    const std::string where = root + "/banks/" + std::to_string(k);
    const json& b = banks[k];
    std::string id = detail::as_string(detail::require(b, "id", where), where + "/id");
    if (id.empty()) throw InputError(where + "/id: must be non-empty");
    if (!index.emplace(id, ids.size()).second) throw InputError(where + "/id: duplicate bank id '" + id + "'");
    const double a = detail::as_number(detail::require(b, "external_assets", where), where + "/external_assets");
    const double l =
        detail::as_number(detail::require(b, "external_liabilities", where), where + "/external_liabilities");
    if (a < 0.0) throw InputError(where + "/external_assets: must be >= 0");
    if (l < 0.0) throw InputError(where + "/external_liabilities: must be >= 0");
    ids.push_back(std::move(id));
    assets.push_back(a);
    liabs.push_back(l);
  }

  const std::size_t n = ids.size();
  std::vector<double> matrix(n * n, 0.0);
  std::vector<bool> seen(n * n, false);
  if (auto it = doc.find("liabilities"); it != doc.end()) {
    if (!it->is_array()) throw InputError(root + "/liabilities: expected an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string where = root + "/liabilities/" + std::to_string(k);
      const json& e = (*it)[k];
      const std::string debtor = detail::as_string(detail::require(e, "debtor", where), where + "/debtor");
      const std::string creditor = detail::as_string(detail::require(e, "creditor", where), where + "/creditor");
      const double amount = detail::as_number(detail::require(e, "amount", where), where + "/amount");
      const std::string edge = " (" + debtor + " -> " + creditor + ")";
      auto d = index.find(debtor);
      auto c = index.find(creditor);
      if (d == index.end()) throw InputError(where + "/debtor: unknown bank '" + debtor + "'");
      if (c == index.end()) throw InputError(where + "/creditor: unknown bank '" + creditor + "'");
      if (d->second == c->second) throw InputError(where + ": self-loan" + edge);
      if (amount < 0.0) throw InputError(where + "/amount: negative amount" + edge);
      const std::size_t cell = d->second * n + c->second;
      if (seen[cell]) log::warn(where + ": duplicate liability" + edge + " summed with earlier entry");
      seen[cell] = true;
      matrix[cell] += amount;
    }
  }
  try {
    return FinancialNetwork(std::move(ids), std::move(assets), std::move(liabs), std::move(matrix));
  } catch (const std::invalid_argument& e) {
    throw InputError(root + " " + e.what());
  }
}

inline FinancialNetwork load_network(const std::string& path) { return parse_network(detail::read_file(path), path); }

/// Network file text; edges listed in (debtor, creditor) matrix order.
inline std::string dump_network(const FinancialNetwork& net) {
  using detail::json;
  json doc;
  doc["banks"] = json::array();
  for (std::size_t i = 0; i < net.size(); ++i)
    doc["banks"].push_back({{"id", net.bank_id(i)},
                            {"external_assets", net.external_assets(i)},
                            {"external_liabilities", net.external_liabilities(i)}});
  doc["liabilities"] = json::array();
  for (std::size_t i = 0; i < net.size(); ++i)
    for (std::size_t j = 0; j < net.size(); ++j)
      if (net.liability(i, j) > 0.0)
        doc["liabilities"].push_back(
            {{"debtor", net.bank_id(i)}, {"creditor", net.bank_id(j)}, {"amount", net.liability(i, j)}});
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Scenario files

enum class ScenarioKind { solve, stress, limit_maturity, limit_beta, curve, mc_global };

inline const char* scenario_key(ScenarioKind k) noexcept {
  switch (k) {
    case ScenarioKind::solve: return "solve";
    case ScenarioKind::stress: return "stress";
    case ScenarioKind::limit_maturity: return "limit_maturity";
    case ScenarioKind::limit_beta: return "limit_beta";
    case ScenarioKind::curve: return "curve";
    case ScenarioKind::mc_global: return "mc_global";
  }
  return "?";
}

/// One curve of the `curve` scenario: a valuation family evaluated at fixed
/// borrower constants over the equity grid.
struct CurveSpec {
  std::string family;
  ValuationSpec spec;
  BorrowerTerms terms;
};

/// The four interbank curves of the standard comparison plot.
inline std::vector<CurveSpec> default_curves() {
  std::vector<CurveSpec> c;
  c.push_back({"eisenberg_noe", ValuationSpec::eisenberg_noe(), {2.0, 0.0, 0.0, 0.0}});
  c.push_back({"furfine", ValuationSpec::furfine(1.0), {}});
  c.push_back({"linear_debtrank", ValuationSpec::linear_debtrank(), {0.0, 2.5, 0.0, 0.0}});
  c.push_back({"exante_en_gbm", ValuationSpec::exante_gbm(1.0, 1.0, 1.0), {2.0, 0.0, 1.0, 1.0}});
  return c;
}

struct Scenario {
  ValuationSpec valuation;
  SolveConfig solver;
  ScenarioKind kind = ScenarioKind::solve;

  std::vector<double> alpha_grid;              // stress
  std::vector<double> sigma;                   // limit_maturity, mc_global
  std::vector<double> tau_sequence;            // limit_maturity
  double beta = 1.0;                           // limit_maturity, mc_global
  std::vector<double> beta_sequence;           // limit_beta
  std::vector<double> equity_grid;             // curve
  std::vector<CurveSpec> curves;               // curve
  double tau = 0.0;                            // mc_global
  std::size_t samples = 0;                     // mc_global
  std::uint64_t seed = 0;                      // mc_global
};

namespace detail {

inline ValuationSpec parse_valuation(const json& v, const std::string& where) {
  if (!v.is_object()) throw InputError(where + ": expected an object");
  ValuationSpec s;
  if (auto it = v.find("external_kind"); it != v.end()) {
    auto k = parse_external_kind(as_string(*it, where + "/external_kind"));
    if (!k) throw InputError(where + "/external_kind: unknown kind '" + it->get<std::string>() + "'");
    s.external_kind = *k;
  }
  if (auto it = v.find("interbank_kind"); it != v.end()) {
    auto k = parse_interbank_kind(as_string(*it, where + "/interbank_kind"));
    if (!k) throw InputError(where + "/interbank_kind: unknown kind '" + it->get<std::string>() + "'");
    s.interbank_kind = *k;
  }
  s.alpha = number_or(v, "alpha", s.alpha, where);
  s.beta = number_or(v, "beta", s.beta, where);
  s.recovery_rate = number_or(v, "recovery_rate", s.recovery_rate, where);
  s.tau = number_or(v, "tau", s.tau, where);
  if (auto it = v.find("sigma"); it != v.end()) s.sigma = as_number_or_list(*it, where + "/sigma");
  return s;
}

inline SolveConfig parse_solver(const json& v, std::size_t banks, const std::string& where) {
  if (!v.is_object()) throw InputError(where + ": expected an object");
  SolveConfig cfg;
  if (auto it = v.find("epsilon"); it != v.end()) cfg.epsilon = as_number(*it, where + "/epsilon");
  if (auto it = v.find("max_iterations"); it != v.end()) {
    if (!it->is_number_integer() || it->get<long long>() < 1)
      throw InputError(where + "/max_iterations: expected a positive integer");
    cfg.max_iterations = it->get<std::size_t>();
  }
  if (auto it = v.find("start"); it != v.end()) {
    if (it->is_string()) {
      const std::string s = it->get<std::string>();
      if (s == "face_values") cfg.start = StartKind::face_values;
      else if (s == "lower_bounds") cfg.start = StartKind::lower_bounds;
      else throw InputError(where + "/start: unknown start '" + s + "'");
    } else if (it->is_object() && it->contains("custom")) {
      cfg.start = StartKind::custom;
      cfg.custom_start = EquityVector(as_number_list((*it)["custom"], where + "/start/custom"));
      if (cfg.custom_start.size() != banks) throw InputError(where + "/start/custom: one value per bank required");
    } else {
      throw InputError(where + "/start: expected a start name or {\"custom\": [...]}");
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(where + ": " + e.what());
  }
  return cfg;
}

inline std::vector<double> parse_grid(const json& v, const std::string& where) {
  if (v.is_array()) return as_number_list(v, where);
  if (v.is_object()) {
    const double lo = as_number(require(v, "min", where), where + "/min");
    const double hi = as_number(require(v, "max", where), where + "/max");
    const json& p = require(v, "points", where);
    if (!p.is_number_integer() || p.get<long long>() < 2) throw InputError(where + "/points: expected an integer >= 2");
    if (!(lo < hi)) throw InputError(where + ": min must be < max");
    return linear_grid(lo, hi, p.get<std::size_t>());
  }
  throw InputError(where + ": expected an array or {min, max, points}");
}

inline CurveSpec parse_curve(const json& v, const std::string& where) {
  CurveSpec c;
  c.spec = parse_valuation(v, where);
  c.family = v.contains("family") ? as_string(v["family"], where + "/family")
                                  : std::string(to_string(c.spec.interbank_kind));
  c.terms.obligations = number_or(v, "obligations", 0.0, where);
  c.terms.book_equity = number_or(v, "book_equity", 0.0, where);
  c.terms.external_assets = number_or(v, "external_assets", 0.0, where);
  c.terms.sigma = c.spec.sigma.empty() ? 0.0 : c.spec.sigma.front();
  if (c.terms.obligations < 0.0 || c.terms.external_assets < 0.0)
    throw InputError(where + ": obligations and external_assets must be >= 0");
  try {
    c.spec.validate(1);
  } catch (const std::invalid_argument& e) {
    throw InputError(where + ": " + e.what());
  }
  return c;
}

inline std::uint64_t parse_seed(const json& v, const std::string& where) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
    throw InputError(where + ": expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

}  // namespace detail

/// Parses and validates a scenario against a network of `banks` banks.
inline Scenario parse_scenario(const std::string& text, std::size_t banks, const std::string& source = "<scenario>") {
  using detail::json;
  const json doc = detail::parse_json_text(text, source);
  const std::string root = source + ":";
  if (!doc.is_object()) throw InputError(root + " expected an object");
  Scenario sc;
  if (auto it = doc.find("valuation"); it != doc.end()) sc.valuation = detail::parse_valuation(*it, root + "/valuation");
  if (auto it = doc.find("solver"); it != doc.end()) sc.solver = detail::parse_solver(*it, banks, root + "/solver");

  const json& block = detail::require(doc, "scenario", root);
  if (!block.is_object() || block.size() != 1)
    throw InputError(root + "/scenario: expected exactly one scenario block");
  const std::string key = block.begin().key();
  const json& body = block.begin().value();
  const std::string where = root + "/scenario/" + key;
  if (!body.is_object()) throw InputError(where + ": expected an object");

  bool found = false;
  for (auto k : {ScenarioKind::solve, ScenarioKind::stress, ScenarioKind::limit_maturity, ScenarioKind::limit_beta,
                 ScenarioKind::curve, ScenarioKind::mc_global})
    if (key == scenario_key(k)) {
      sc.kind = k;
      found = true;
    }
  if (!found) throw InputError(where + ": unknown scenario '" + key + "'");

  auto check_unit = [&](double v, const std::string& at) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError(at + ": must lie in [0, 1]");
  };
  auto check_positive = [&](double v, const std::string& at) {
    if (!(v > 0.0)) throw InputError(at + ": must be > 0");
  };
  auto check_decreasing = [&](const std::vector<double>& seq, const std::string& at) {
    if (seq.empty()) throw InputError(at + ": must be non-empty");
    for (std::size_t k = 1; k < seq.size(); ++k)
      if (!(seq[k] < seq[k - 1])) throw InputError(at + ": must be strictly decreasing");
  };
  auto check_sigma = [&](const std::vector<double>& s, const std::string& at) {
    if (s.size() != 1 && s.size() != banks) throw InputError(at + ": scalar or one value per bank required");
    for (double x : s) check_positive(x, at);
  };

  switch (sc.kind) {
    case ScenarioKind::solve:
      break;
    case ScenarioKind::stress:
      sc.alpha_grid = detail::as_number_list(detail::require(body, "alpha_grid", where), where + "/alpha_grid");
      if (sc.alpha_grid.empty()) throw InputError(where + "/alpha_grid: must be non-empty");
      for (double a : sc.alpha_grid) check_unit(a, where + "/alpha_grid");
      break;
    case ScenarioKind::limit_maturity:
      sc.sigma = detail::as_number_or_list(detail::require(body, "sigma", where), where + "/sigma");
      check_sigma(sc.sigma, where + "/sigma");
      sc.tau_sequence = detail::as_number_list(detail::require(body, "tau_sequence", where), where + "/tau_sequence");
      check_decreasing(sc.tau_sequence, where + "/tau_sequence");
      for (double t : sc.tau_sequence) check_positive(t, where + "/tau_sequence");
      sc.beta = detail::number_or(body, "beta", 1.0, where);
      check_unit(sc.beta, where + "/beta");
      break;
    case ScenarioKind::limit_beta:
      sc.beta_sequence =
          detail::as_number_list(detail::require(body, "beta_sequence", where), where + "/beta_sequence");
      check_decreasing(sc.beta_sequence, where + "/beta_sequence");
      for (double b : sc.beta_sequence) check_unit(b, where + "/beta_sequence");
      break;
    case ScenarioKind::curve:
      sc.equity_grid = detail::parse_grid(detail::require(body, "equity_grid", where), where + "/equity_grid");
      if (auto it = body.find("curves"); it != body.end()) {
        if (!it->is_array() || it->empty()) throw InputError(where + "/curves: expected a non-empty array");
        for (std::size_t k = 0; k < it->size(); ++k)
          sc.curves.push_back(detail::parse_curve((*it)[k], where + "/curves/" + std::to_string(k)));
      } else {
        sc.curves = default_curves();
      }
      break;
    case ScenarioKind::mc_global: {
      sc.sigma = detail::as_number_or_list(detail::require(body, "sigma", where), where + "/sigma");
      check_sigma(sc.sigma, where + "/sigma");
      sc.tau = detail::as_number(detail::require(body, "tau", where), where + "/tau");
      check_positive(sc.tau, where + "/tau");
      sc.beta = detail::number_or(body, "beta", 1.0, where);
      check_unit(sc.beta, where + "/beta");
      const json& s = detail::require(body, "samples", where);
      if (!s.is_number_integer() || s.get<long long>() < 1)
        throw InputError(where + "/samples: expected a positive integer");
      sc.samples = s.get<std::size_t>();
      if (auto it = body.find("seed"); it != body.end()) sc.seed = detail::parse_seed(*it, where + "/seed");
      break;
    }
  }

  if (sc.kind == ScenarioKind::solve || sc.kind == ScenarioKind::stress) {
    try {
      sc.valuation.validate(banks);
    } catch (const std::invalid_argument& e) {
      throw InputError(root + "/valuation: " + e.what());
    }
  }
  return sc;
}

inline Scenario load_scenario(const std::string& path, std::size_t banks) {
  return parse_scenario(detail::read_file(path), banks, path);
}

// ---------------------------------------------------------------------------
// Result serialization

enum class Format { csv, json };

/// 17 significant digits: parses back to the identical double.
inline std::string format_double(double x) {
  if (!std::isfinite(x)) return "nan";
  if (x == 0.0) x = 0.0;  // drop the sign of negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_number(double x) { return std::isfinite(x) ? format_double(x) : std::string(); }

inline std::string json_string(const std::string& s) { return json(s).dump(); }
inline std::string json_number(double x) { return std::isfinite(x) ? format_double(x) : std::string("null"); }
inline std::string json_bool(bool b) { return b ? "true" : "false"; }

// Tiny writer for flat records; numbers keep 17 significant digits.
class JsonObject {
 public:
  JsonObject& field(const std::string& key, const std::string& raw) {
    body_ += (body_.empty() ? "" : ", ") + json_string(key) + ": " + raw;
    return *this;
  }
  JsonObject& num(const std::string& key, double v) { return field(key, json_number(v)); }
  JsonObject& str(const std::string& key, const std::string& v) { return field(key, json_string(v)); }
  JsonObject& flag(const std::string& key, bool v) { return field(key, json_bool(v)); }
  JsonObject& count(const std::string& key, std::size_t v) { return field(key, std::to_string(v)); }
  std::string done() const { return "{" + body_ + "}"; }

 private:
  std::string body_;
};

inline std::string json_array(const std::vector<std::string>& items, const std::string& indent = "    ") {
  if (items.empty()) return "[]";
  std::string out = "[\n";
  for (std::size_t k = 0; k < items.size(); ++k) out += indent + items[k] + (k + 1 < items.size() ? ",\n" : "\n");
  return out + indent.substr(0, indent.size() >= 2 ? indent.size() - 2 : 0) + "]";
}

inline std::string json_document(const std::vector<std::pair<std::string, std::string>>& fields) {
  std::string out = "{\n";
  for (std::size_t k = 0; k < fields.size(); ++k)
    out += "  " + json_string(fields[k].first) + ": " + fields[k].second + (k + 1 < fields.size() ? ",\n" : "\n");
  return out + "}\n";
}

// Bank indices ordered by id.
inline std::vector<std::size_t> banks_by_id(const FinancialNetwork& net) {
  std::vector<std::size_t> order(net.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return net.bank_id(a) < net.bank_id(b); });
  return order;
}

}  // namespace detail

/// Columns: bank_id, book_equity, equity, defaulted, iterations.
inline std::string serialize_solve(const FinancialNetwork& net, const SolveReport& r, Format fmt) {
  const EquityVector book = book_equity(net);
  if (fmt == Format::csv) {
    std::string out = "bank_id,book_equity,equity,defaulted,iterations\n";
    for (std::size_t i = 0; i < net.size(); ++i)
      out += detail::csv_field(net.bank_id(i)) + "," + detail::csv_number(book[i]) + "," +
             detail::csv_number(r.solution[i]) + "," + (r.solution[i] < 0.0 ? "true" : "false") + "," +
             std::to_string(r.iterations) + "\n";
    return out;
  }
  std::vector<std::string> rows;
  for (std::size_t i = 0; i < net.size(); ++i)
    rows.push_back(detail::JsonObject()
                       .str("bank_id", net.bank_id(i))
                       .num("book_equity", book[i])
                       .num("equity", r.solution[i])
                       .flag("defaulted", r.solution[i] < 0.0)
                       .count("iterations", r.iterations)
                       .done());
  return detail::json_document({{"command", detail::json_string("solve")},
                                {"kind", detail::json_string(to_string(r.kind))},
                                {"converged", detail::json_bool(r.converged)},
                                {"iterations", std::to_string(r.iterations)},
                                {"residual", detail::json_number(r.residual)},
                                {"epsilon", detail::json_number(r.epsilon)},
                                {"monotone", detail::json_bool(r.monotone)},
                                {"continuity_warning", detail::json_bool(r.continuity_warning)},
                                {"rows", detail::json_array(rows)}});
}

/// Columns: alpha, bank_id, delta_equity, network_effect; rows sorted by
/// (alpha, bank_id). `discounts`, when given, must align with `results`.
inline std::string serialize_stress(const FinancialNetwork& net, const std::vector<StressResult>& results,
                                    Format fmt, const std::vector<DiscountComparison>* discounts = nullptr) {
  std::vector<std::size_t> points(results.size());
  std::iota(points.begin(), points.end(), std::size_t{0});
  std::stable_sort(points.begin(), points.end(),
                   [&](std::size_t a, std::size_t b) { return results[a].alpha < results[b].alpha; });
  const auto banks = detail::banks_by_id(net);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  if (fmt == Format::csv) {
    std::string out = "alpha,bank_id,delta_equity,network_effect\n";
    for (std::size_t p : points)
      for (std::size_t i : banks)
        out += detail::csv_number(results[p].alpha) + "," + detail::csv_field(net.bank_id(i)) + "," +
               detail::csv_number(results[p].delta_equity[i]) + "," +
               detail::csv_number(results[p].network_effect.value_or(nan)) + "\n";
    return out;
  }
  std::vector<std::string> rows, summaries;
  for (std::size_t p : points) {
    const StressResult& r = results[p];
    for (std::size_t i : banks)
      rows.push_back(detail::JsonObject()
                         .num("alpha", r.alpha)
                         .str("bank_id", net.bank_id(i))
                         .num("delta_equity", r.delta_equity[i])
                         .num("network_effect", r.network_effect.value_or(nan))
                         .done());
    std::vector<std::string> edges;
    for (std::size_t e = 0; e < r.edges.size(); ++e) {
      detail::JsonObject o;
      o.str("lender", net.bank_id(r.edges[e].lender))
          .str("borrower", net.bank_id(r.edges[e].borrower))
          .num("amount", r.edges[e].amount)
          .num("value", r.edges[e].value);
      if (discounts) {
        const DiscountDifference& d = (*discounts)[p].edges.at(e);
        o.num("single_name_value", d.single_name).num("discount_difference", d.difference);
      }
      edges.push_back(o.done());
    }
    summaries.push_back(detail::JsonObject()
                            .num("alpha", r.alpha)
                            .flag("converged", r.converged)
                            .count("iterations", r.iterations)
                            .num("network_effect", r.network_effect.value_or(nan))
                            .num("write_offs", r.write_offs)
                            .num("retained_value", r.retained_value)
                            .field("edges", detail::json_array(edges, "        "))
                            .done());
  }
  return detail::json_document({{"command", detail::json_string("stress")},
                                {"rows", detail::json_array(rows)},
                                {"points", detail::json_array(summaries)}});
}

/// Columns: parameter, bank_id, equity, deviation; rows sorted by descending
/// parameter, then bank_id.
inline std::string serialize_limit(const FinancialNetwork& net, const LimitSeries& s, Format fmt,
                                   const std::string& command = "limit") {
  std::vector<std::size_t> order(s.parameters.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s.parameters[a] > s.parameters[b]; });
  const auto banks = detail::banks_by_id(net);
  if (fmt == Format::csv) {
    std::string out = "parameter,bank_id,equity,deviation\n";
    for (std::size_t k : order)
      for (std::size_t i : banks)
        out += detail::csv_number(s.parameters[k]) + "," + detail::csv_field(net.bank_id(i)) + "," +
               detail::csv_number(s.equities[k][i]) + "," + detail::csv_number(s.deviations[k]) + "\n";
    return out;
  }
  std::vector<std::string> rows, reference, flagged;
  for (std::size_t k : order)
    for (std::size_t i : banks)
      rows.push_back(detail::JsonObject()
                         .num("parameter", s.parameters[k])
                         .str("bank_id", net.bank_id(i))
                         .num("equity", s.equities[k][i])
                         .num("deviation", s.deviations[k])
                         .flag("converged", s.converged[k])
                         .done());
  for (std::size_t i : banks)
    reference.push_back(detail::JsonObject().str("bank_id", net.bank_id(i)).num("equity", s.reference[i]).done());
  for (std::size_t j : s.flagged_banks) flagged.push_back(detail::json_string(net.bank_id(j)));
  return detail::json_document({{"command", detail::json_string(command)},
                                {"partial", detail::json_bool(s.partial)},
                                {"reference_converged", detail::json_bool(s.reference_converged)},
                                {"reference", detail::json_array(reference)},
                                {"flagged_banks", detail::json_array(flagged)},
                                {"rows", detail::json_array(rows)}});
}

struct CurvePoint {
  std::string family;
  double equity;
  double value;
};

inline std::vector<CurvePoint> evaluate_curves(const std::vector<CurveSpec>& curves, std::span<const double> grid) {
  std::vector<CurvePoint> out;
  for (const CurveSpec& c : curves)
    for (double e : grid) out.push_back({c.family, e, interbank_value(c.spec, 1.0, e, c.terms)});
  return out;
}

/// Columns: family, equity, value.
inline std::string serialize_curves(const std::vector<CurvePoint>& points, Format fmt) {
  if (fmt == Format::csv) {
    std::string out = "family,equity,value\n";
    for (const CurvePoint& p : points)
      out += detail::csv_field(p.family) + "," + detail::csv_number(p.equity) + "," + detail::csv_number(p.value) + "\n";
    return out;
  }
  std::vector<std::string> rows;
  for (const CurvePoint& p : points)
    rows.push_back(detail::JsonObject().str("family", p.family).num("equity", p.equity).num("value", p.value).done());
  return detail::json_document({{"command", detail::json_string("curve")}, {"rows", detail::json_array(rows)}});
}

/// Columns: bank_id, mean_equity, std_error, samples, dropped.
inline std::string serialize_monte_carlo(const FinancialNetwork& net, const MonteCarloResult& r, std::uint64_t seed,
                                         Format fmt) {
  if (fmt == Format::csv) {
    std::string out = "bank_id,mean_equity,std_error,samples,dropped\n";
    for (std::size_t i = 0; i < net.size(); ++i)
      out += detail::csv_field(net.bank_id(i)) + "," + detail::csv_number(r.mean[i]) + "," +
             detail::csv_number(r.std_error[i]) + "," + std::to_string(r.samples) + "," + std::to_string(r.dropped) +
             "\n";
    return out;
  }
  std::vector<std::string> rows;
  for (std::size_t i = 0; i < net.size(); ++i)
    rows.push_back(detail::JsonObject()
                       .str("bank_id", net.bank_id(i))
                       .num("mean_equity", r.mean[i])
                       .num("std_error", r.std_error[i])
                       .done());
  return detail::json_document({{"command", detail::json_string("mc-global")},
                                {"seed", std::to_string(seed)},
                                {"samples", std::to_string(r.samples)},
                                {"dropped", std::to_string(r.dropped)},
                                {"valid", detail::json_bool(r.valid)},
                                {"rows", detail::json_array(rows)}});
}

}  // namespace neva
