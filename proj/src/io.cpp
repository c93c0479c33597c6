#include "ccm/io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>

namespace ccm::io {

namespace {

const json& field(const json& doc, const char* key, const std::string& where) {
  if (!doc.is_object() || !doc.contains(key)) throw InvalidInput(where + ": missing field '" + key + "'");
  return doc.at(key);
}

std::size_t count_of(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw InvalidInput(where + ": expected a nonnegative integer");
  return v.get<std::size_t>();
}

Economy economy_from(const json& doc) {
  const std::size_t goods = count_of(field(doc, "goods", "economy"), "economy.goods");
  const json& u = field(doc, "utility", "economy");
  const std::string kind = field(u, "kind", "economy.utility").get<std::string>();
  auto rows = [&](const char* key) {
    const json& v = field(u, key, "economy.utility");
    if (!v.is_array() || v.empty()) throw InvalidInput("economy.utility." + std::string(key) + ": expected rows");
    std::vector<Vec> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(vector_of(v[i], "economy.utility." + std::string(key) + "[" + std::to_string(i) + "]"));
      if (key == std::string("values") && out.back().size() != goods)
        throw InvalidInput("economy.utility.values: each row needs one value per good");
    }
    return out;
  };
  if (kind == "additive") return Economy::additive(rows("values"));
  if (kind == "unit_demand") return Economy::unit_demand(rows("values"));
  if (kind == "table") return Economy(goods, rows("tables"));
  if (kind == "bundles") {
    const std::size_t agents = count_of(field(u, "agents", "economy.utility"), "economy.utility.agents");
    std::vector<Economy::Listed> listed;
    const json& list = field(u, "bundles", "economy.utility");
    if (!list.is_array()) throw InvalidInput("economy.utility.bundles: expected a list");
    for (std::size_t t = 0; t < list.size(); ++t) {
      const std::string where = "economy.utility.bundles[" + std::to_string(t) + "]";
      Bundle b = 0;
      for (const json& g : field(list[t], "goods", where)) {
        const std::size_t h = count_of(g, where + ".goods");
        if (h >= goods) throw InvalidInput(where + ": unknown good " + std::to_string(h));
        b |= Bundle{1} << h;
      }
      listed.push_back({count_of(field(list[t], "agent", where), where + ".agent"), b,
                        number(field(list[t], "value", where), where + ".value")});
    }
    return Economy::monotone_closure(agents, goods, listed);
  }
  throw InvalidInput("economy.utility.kind: unknown kind '" + kind + "'");
}

MatchingProblem matching_from(const json& doc) {
  Matrix w = matrix_of(field(doc, "partner_utility", "matching"), "matching.partner_utility");
  std::vector<Assignment> k;
  if (doc.contains("sides")) {
    std::vector<int> side;
    for (const json& s : doc.at("sides")) side.push_back(static_cast<int>(count_of(s, "matching.sides")));
    if (side.size() != w.rows()) throw InvalidInput("matching.sides: one side per agent");
    k = two_sided_matchings(side);
  } else {
    const json& list = field(doc, "matchings", "matching");
    if (list.is_string() && list.get<std::string>() == "all") {
      k = all_involutions(w.rows());
    } else {
      if (!list.is_array()) throw InvalidInput("matching.matchings: expected a list or \"all\"");
      for (const json& a : list) {
        Assignment row;
        for (const json& m : a) row.push_back(count_of(m, "matching.matchings"));
        k.push_back(std::move(row));
      }
    }
  }
  return MatchingProblem(std::move(k), std::move(w));
}

}  // namespace

double number(const json& v, const std::string& where) {
  double out;
  if (v.is_number()) {
    out = v.get<double>();
  } else if (v.is_string()) {
    const std::string s = v.get<std::string>();
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw InvalidInput(where + ": '" + s + "' is not a decimal number");
  } else {
    throw InvalidInput(where + ": expected a number");
  }
  if (!std::isfinite(out)) throw InvalidInput(where + ": number must be finite");
  return out;
}

Vec vector_of(const json& v, const std::string& where) {
  if (!v.is_array()) throw InvalidInput(where + ": expected a list of numbers");
  Vec out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Matrix matrix_of(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw InvalidInput(where + ": expected a nonempty list of rows");
  std::vector<Vec> rows;
  for (std::size_t i = 0; i < v.size(); ++i) {
    rows.push_back(vector_of(v[i], where + "[" + std::to_string(i) + "]"));
    if (rows.back().size() != rows.front().size()) throw InvalidInput(where + ": rows differ in length");
  }
  return Matrix::from_rows(rows);
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

std::string problem_hash(const json& doc) {
  const std::string text = doc.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("SHA-256 computation failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

ProblemFile parse_problem(const json& doc) {
  if (!doc.is_object()) throw InvalidInput("problem: expected a JSON object");
  ProblemFile p;
  p.type = field(doc, "type", "problem").get<std::string>();
  p.hash = problem_hash(doc);
  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    if (s.contains("tol")) p.solver.tol = number(s.at("tol"), "solver.tol");
    if (s.contains("sweep")) p.solver.sweep = count_of(s.at("sweep"), "solver.sweep");
    if (s.contains("grid")) p.solver.grid = count_of(s.at("grid"), "solver.grid");
    if (s.contains("c")) p.solver.c = vector_of(s.at("c"), "solver.c");
  }
  if (p.type == "collective")
    p.collective.emplace(matrix_of(field(doc, "utility", "collective"), "collective.utility"));
  else if (p.type == "matching")
    p.matching.emplace(matching_from(doc));
  else if (p.type == "economy")
    p.economy.emplace(economy_from(doc));
  else if (p.type == "bargaining") {
    const Matrix v = matrix_of(field(doc, "vertices", "bargaining"), "bargaining.vertices");
    p.bargaining.emplace(Polytope::coco_hull(v.to_rows()));
  } else {
    throw InvalidInput("problem.type: unknown type '" + p.type + "'");
  }
  return p;
}

ProblemFile load_problem(const std::filesystem::path& path) { return parse_problem(read_json(path)); }

Polytope bargaining_set(const ProblemFile& p) {
  if (p.bargaining) return *p.bargaining;
  if (p.economy) return bargaining_of_economy(*p.economy);
  return bargaining_of(collective_of(p));
}

CollectiveProblem collective_of(const ProblemFile& p) {
  if (p.collective) return *p.collective;
  if (p.matching) return to_collective(*p.matching);
  if (p.economy) return to_collective_exchange(*p.economy);
  throw InvalidInput("a bargaining file has no outcomes to price");
}

json to_json(std::span<const double> v) { return json(Vec(v.begin(), v.end())); }

json to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(to_json(m.row(i)));
  return rows;
}

json to_json(const SimplexGame& g) { return {{"scale", g.scale()}, {"offset", g.offset()}}; }

json to_json(const Verdict& v) {
  json list = json::array();
  for (const Violation& x : v.violations)
    list.push_back({{"condition", x.condition}, {"agent", x.agent}, {"slack", x.slack}, {"detail", x.detail}});
  return {{"passed", v.passed()}, {"violations", list}};
}

json to_json(const LindahlCertificate& c) {
  return {{"prices", to_json(c.prices)}, {"lottery", c.lottery}, {"payoffs", c.payoffs},
          {"alpha", c.alpha},           {"c", c.c},              {"witness", to_json(c.witness())}};
}

json to_json(const EquitableVerdict& v) {
  json out = {{"status", to_string(v.status)}, {"member", v.member()}, {"resolution", v.resolution},
              {"reason", v.reason}};
  if (v.certificate) {
    out["witness"] = to_json(v.certificate->witness);
    out["fair_point"] = v.certificate->fair_point;
    out["domination_checked"] = v.certificate->domination_checked;
  }
  return out;
}

json economy_json(const Economy& e) {
  json doc = {{"format", kProblemFormat}, {"type", "economy"}, {"goods", e.goods()}};
  if (e.kind() == Economy::Kind::additive) {
    json values = json::array();
    for (std::size_t i = 0; i < e.agents(); ++i) {
      Vec row;
      for (std::size_t h = 0; h < e.goods(); ++h) row.push_back(e.value(i, Bundle{1} << h));
      values.push_back(row);
    }
    doc["utility"] = {{"kind", "additive"}, {"values", values}};
    return doc;
  }
  // Bundles that lose value when any good is removed determine the closure.
  json listed = json::array();
  for (std::size_t i = 0; i < e.agents(); ++i) {
    const Vec& t = e.table(i);
    for (Bundle m = 1; m < t.size(); ++m) {
      bool tight = t[m] > 0.0;
      for (Bundle rest = m; tight && rest; rest &= rest - 1) tight = t[m & ~(rest & -rest)] < t[m];
      if (!tight) continue;
      listed.push_back({{"agent", i}, {"goods", allocation_json({m}, e.goods())[0]}, {"value", t[m]}});
    }
  }
  doc["utility"] = {{"kind", "bundles"}, {"agents", e.agents()}, {"bundles", listed}};
  return doc;
}

json allocation_json(const Allocation& a, std::size_t goods) {
  json out = json::array();
  for (Bundle b : a) {
    json share = json::array();
    for (std::size_t h = 0; h < goods; ++h)
      if (b >> h & 1U) share.push_back(h);
    out.push_back(share);
  }
  return out;
}

Allocation allocation_of(const json& v, std::size_t agents, std::size_t goods, const std::string& where) {
  if (!v.is_array() || v.size() != agents) throw InvalidInput(where + ": expected one share per agent");
  Allocation a;
  for (const json& share : v) {
    Bundle b = 0;
    for (const json& g : share) {
      const std::size_t h = count_of(g, where);
      if (h >= goods) throw InvalidInput(where + ": unknown good " + std::to_string(h));
      b |= Bundle{1} << h;
    }
    a.push_back(b);
  }
  return a;
}

json certificate_header(const std::string& kind, const ProblemFile& p) {
  return {{"format", kCertificateFormat},
          {"kind", kind},
          {"problem_hash", p.hash},
          {"version", CCM_VERSION},
          {"tolerances",
           {{"geometry", tol::kGeom},
            {"lp", tol::kLp},
            {"optimality", tol::kOpt},
            {"support", tol::kSupport},
            {"verify", p.solver.tol.value_or(tol::kVerify)},
            {"dedup", tol::kDedup}}}};
}

}  // namespace ccm::io
