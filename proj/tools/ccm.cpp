#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ccm/io.hpp"

using namespace ccm;
using io::json;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kInadmissible = 2, kFailed = 3, kAtResolution = 4, kNumerical = 5 };

struct Options {
  std::string file;
  std::string certificate;
  std::string c;
  std::string point;
  std::string mode;
  std::string out;
  std::size_t sweep = 0;
  std::size_t grid = 0;
  double tol = 0.0;
};

Vec parse_csv(const std::string& text, const char* flag) {
  Vec out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(io::number(json(item), flag));
  if (out.empty()) throw InvalidInput(std::string(flag) + ": expected comma-separated numbers");
  return out;
}

void emit(const json& doc, const Options& o) {
  const std::string text = doc.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw InvalidInput("cannot write " + o.out);
  f << text;
}

double verify_tol(const Options& o, const io::ProblemFile& p) {
  if (o.tol > 0.0) return o.tol;
  return p.solver.tol.value_or(tol::kVerify);
}

json support_of(const Economy& e, std::span<const double> lottery) {
  const std::vector<Allocation> all = enumerate_allocations(e);
  json out = json::array();
  for (std::size_t j = 0; j < lottery.size(); ++j)
    if (lottery[j] > tol::kSupport)
      out.push_back({{"outcome", j}, {"allocation", io::allocation_json(all[j], e.goods())}, {"weight", lottery[j]}});
  return out;
}

json lindahl_entry(const io::ProblemFile& p, const CollectiveProblem& cp, const LindahlCertificate& cert, double tol) {
  json entry = io::to_json(cert);
  entry["verdict"] = io::to_json(verify_lindahl(cp, cert.prices, cert.lottery, tol));
  if (p.economy) entry["support"] = support_of(*p.economy, cert.lottery);
  if (p.matching) {
    const PartnerEquilibrium eq = lindahl_to_walras(*p.matching, cert.prices, cert.lottery);
    entry["partner_prices"] = io::to_json(eq.partner_prices);
    entry["demand"] = io::to_json(eq.demand);
    entry["partner_verdict"] = io::to_json(verify_walras_matching(*p.matching, eq.partner_prices, eq.demand,
                                                                  eq.lottery, tol));
  }
  return entry;
}

int cmd_solve(const Options& o, bool matching_only) {
  const io::ProblemFile p = io::load_problem(o.file);
  if (matching_only && !p.matching) throw InvalidInput("match needs a matching problem");
  const CollectiveProblem cp = io::collective_of(p);
  const double tol = verify_tol(o, p);
  json doc = io::certificate_header(p.matching ? "walras_matching" : "lindahl", p);

  const std::size_t steps = o.sweep ? o.sweep : (o.c.empty() ? p.solver.sweep.value_or(0) : 0);
  json list = json::array();
  if (steps) {
    const SweepResult s = sweep_lindahl_payoffs(cp, steps);
    for (const LindahlCertificate& cert : s.certificates) list.push_back(lindahl_entry(p, cp, cert, tol));
    doc["mode"] = "sweep";
    doc["resolution"] = steps;
    doc["cells"] = s.cells;
    doc["admissible_cells"] = s.admissible_cells;
    doc["failures"] = s.failures;
  } else {
    const Vec c = !o.c.empty() ? parse_csv(o.c, "--c") : p.solver.c.value_or(Vec(cp.agents(), 0.0));
    const std::optional<LindahlCertificate> cert = lindahl_from_nash(cp, c);
    if (!cert) {
      std::cerr << json{{"error", "inadmissible"}, {"c", c}}.dump() << "\n";
      return kInadmissible;
    }
    list.push_back(lindahl_entry(p, cp, *cert, tol));
    doc["mode"] = "single";
  }
  doc["certificates"] = list;
  emit(doc, o);
  return kOk;
}

json check(std::size_t index, const Verdict& v) {
  json out = io::to_json(v);
  out["index"] = index;
  return out;
}

int cmd_verify(const Options& o) {
  const json problem = io::read_json(o.file);
  const io::ProblemFile p = io::parse_problem(problem);
  const json cert = io::read_json(o.certificate);
  if (!cert.is_object() || !cert.contains("kind") || !cert.contains("problem_hash"))
    throw InvalidInput("certificate: missing kind or problem_hash");
  if (cert.at("problem_hash").get<std::string>() != p.hash)
    throw InvalidInput("certificate was issued for a different problem (hash mismatch)");
  const std::string kind = cert.at("kind").get<std::string>();
  const double tol = verify_tol(o, p);

  json checks = json::array();
  bool passed = true;
  auto record = [&](std::size_t index, const Verdict& v) {
    passed = passed && v.passed();
    checks.push_back(check(index, v));
  };

  if (kind == "lindahl" || kind == "walras_matching") {
    const CollectiveProblem cp = io::collective_of(p);
    const json& list = cert.at("certificates");
    for (std::size_t t = 0; t < list.size(); ++t) {
      const std::string where = "certificates[" + std::to_string(t) + "]";
      const Matrix prices = io::matrix_of(list[t].at("prices"), where + ".prices");
      const Vec lottery = io::vector_of(list[t].at("lottery"), where + ".lottery");
      Verdict v = verify_lindahl(cp, prices, lottery, tol);
      if (list[t].contains("payoffs")) {
        const Vec claimed = io::vector_of(list[t].at("payoffs"), where + ".payoffs");
        const Vec actual = cp.payoffs(lottery);
        if (claimed.size() != actual.size() || max_abs_diff(claimed, actual) > tol * std::max(1.0, max_abs(actual)))
          v.violations.push_back({"payoffs", -1, claimed.size() == actual.size() ? max_abs_diff(claimed, actual) : 1.0,
                                  "claimed payoffs differ from u.q"});
      }
      if (kind == "walras_matching") {
        if (!p.matching) throw InvalidInput("walras_matching certificate needs a matching problem");
        const Verdict w = verify_walras_matching(*p.matching, io::matrix_of(list[t].at("partner_prices"), where),
                                                 io::matrix_of(list[t].at("demand"), where), lottery, tol);
        v.violations.insert(v.violations.end(), w.violations.begin(), w.violations.end());
      }
      record(t, v);
    }
  } else if (kind == "walras_exchange") {
    if (!p.economy) throw InvalidInput("walras_exchange certificate needs an economy problem");
    const Economy& e = *p.economy;
    const PackagePrices prices = cert.contains("good_prices")
                                     ? PackagePrices::additive(io::vector_of(cert.at("good_prices"), "good_prices"))
                                     : PackagePrices(io::vector_of(cert.at("package_prices"), "package_prices"));
    RandomAllocation theta;
    for (const json& a : cert.at("allocation"))
      theta.push_back({io::allocation_of(a.at("shares"), e.agents(), e.goods(), "allocation.shares"),
                       io::number(a.at("weight"), "allocation.weight")});
    Verdict v = verify_walras_exchange(e, prices, theta, tol);
    if (cert.contains("payoffs")) {
      const Vec claimed = io::vector_of(cert.at("payoffs"), "payoffs");
      const Vec actual = exchange_payoffs(e, theta);
      if (claimed.size() != actual.size() || max_abs_diff(claimed, actual) > tol * std::max(1.0, max_abs(actual)))
        v.violations.push_back({"payoffs", -1, 0.0, "claimed payoffs differ from the allocation's"});
    }
    record(0, v);
  } else if (kind == "equitable") {
    const Polytope b = io::bargaining_set(p);
    const Vec x = io::vector_of(cert.at("point"), "point");
    Verdict v;
    const std::string claimed = cert.at("status").get<std::string>();
    if (claimed == to_string(EquitableStatus::member_with_certificate)) {
      const SimplexGame g(io::vector_of(cert.at("witness").at("scale"), "witness.scale"),
                          io::vector_of(cert.at("witness").at("offset"), "witness.offset"));
      if (!validate_certificate(b, x, {g, g.fair_outcome(), true, false}))
        v.violations.push_back({"witness", -1, 0.0, "witness does not dominate the set or miss the point"});
    } else {
      EquitableOptions opts;
      if (cert.value("resolution", 0) > 0) {
        opts.method = MembershipMethod::grid;
        opts.grid_steps = cert.at("resolution").get<std::size_t>();
      }
      const std::string actual =
          contains(b, x) ? to_string(equitable_contains(b, x, opts).status) : to_string(EquitableStatus::non_member_certified);
      if (actual != claimed) v.violations.push_back({"status", -1, 0.0, "recomputed status is " + actual});
    }
    record(0, v);
  } else if (kind == "nash") {
    const Polytope b = io::bargaining_set(p);
    const Vec claimed = io::vector_of(cert.at("point"), "point");
    const Point actual = nash_solution(b);
    Verdict v;
    if (claimed.size() != actual.size() || max_abs_diff(claimed, actual) > 1e-6)
      v.violations.push_back({"nash_point", -1, 0.0, "recomputed Nash point is " + format_vec(actual)});
    record(0, v);
  } else {
    throw InvalidInput("certificate: unknown kind '" + kind + "'");
  }
  emit({{"kind", "verdict"}, {"certificate_kind", kind}, {"problem_hash", p.hash}, {"passed", passed},
        {"checks", checks}},
       o);
  return passed ? kOk : kFailed;
}

int cmd_equitable(const Options& o) {
  const io::ProblemFile p = io::load_problem(o.file);
  if (o.point.empty()) throw InvalidInput("--point is required");
  const Polytope b = io::bargaining_set(p);
  const Vec x = parse_csv(o.point, "--point");
  if (x.size() != b.dim()) throw InvalidInput("--point has the wrong dimension");
  EquitableOptions opts;
  if (o.tol > 0.0) opts.eps = o.tol;
  const std::size_t grid = o.grid ? o.grid : p.solver.grid.value_or(0);
  if (grid) {
    opts.method = MembershipMethod::grid;
    opts.grid_steps = grid;
  }
  json doc = io::certificate_header("equitable", p);
  doc["point"] = x;
  if (!contains(b, x, opts.eps)) {
    doc.update(json{{"status", to_string(EquitableStatus::non_member_certified)},
                    {"member", false},
                    {"resolution", 0},
                    {"reason", "not feasible"}});
    emit(doc, o);
    return kFailed;
  }
  const EquitableVerdict v = equitable_contains(b, x, opts);
  doc.update(io::to_json(v));
  emit(doc, o);
  switch (v.status) {
    case EquitableStatus::member_with_certificate: return kOk;
    case EquitableStatus::non_member_certified: return kFailed;
    case EquitableStatus::non_member_at_resolution: return kAtResolution;
  }
  return kFailed;
}

int cmd_nash(const Options& o) {
  const io::ProblemFile p = io::load_problem(o.file);
  const Polytope b = io::bargaining_set(p);
  json doc = io::certificate_header("nash", p);
  doc["point"] = nash_solution(b);
  doc["supporting_simplex"] = io::to_json(supporting_simplex(b));
  std::optional<CollectiveProblem> cp;
  if (p.economy) {
    // Large economies have a bargaining set but too many allocations to list.
    try {
      cp = io::collective_of(p);
    } catch (const InvalidInput& e) {
      doc["lottery_omitted"] = e.what();
    }
  } else if (!p.bargaining) {
    cp = io::collective_of(p);
  }
  if (cp) {
    const NashAllocation a = nash_allocation(*cp);
    doc["lottery"] = a.lottery;
    doc["condition_residual"] = a.condition_residual;
  }
  emit(doc, o);
  return kOk;
}

int cmd_commodify(const Options& o) {
  const io::ProblemFile p = io::load_problem(o.file);
  const Polytope b = io::bargaining_set(p);
  std::string mode = o.mode.empty() ? (b.dim() == 2 ? "two" : "general") : o.mode;
  const Economy e = mode == "two" ? commodify_two(b) : commodify_general(b);
  emit(io::economy_json(e), o);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collective choice markets: Lindahl equilibria, equitable bargaining and commodification"};
  app.set_version_flag("--version", std::string(CCM_VERSION));
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("file", o.file, "problem file (JSON)")->required();
    sub->add_option("--out", o.out, "write the result to PATH instead of stdout");
    sub->add_option("--tol", o.tol, "verification tolerance")->check(CLI::PositiveNumber);
  };
  CLI::App* solve = app.add_subcommand("solve", "Lindahl equilibrium from a utility floor, or a sweep of floors");
  add_common(solve);
  solve->add_option("--c", o.c, "utility floor per agent, comma separated");
  solve->add_option("--sweep", o.sweep, "sweep floors on an N-step grid per agent")->check(CLI::PositiveNumber);
  CLI::App* match = app.add_subcommand("match", "partner-price equilibrium of a matching problem");
  add_common(match);
  match->add_option("--c", o.c, "utility floor per agent, comma separated");
  match->add_option("--sweep", o.sweep, "sweep floors on an N-step grid per agent")->check(CLI::PositiveNumber);
  CLI::App* verify = app.add_subcommand("verify", "re-check a certificate against its problem");
  add_common(verify);
  verify->add_option("certificate", o.certificate, "certificate file (JSON)")->required();
  CLI::App* equitable = app.add_subcommand("equitable", "membership of a point in the equitable solution");
  add_common(equitable);
  equitable->add_option("--point", o.point, "payoff vector, comma separated")->required();
  equitable->add_option("--grid", o.grid, "use the floor grid search with N steps")->check(CLI::PositiveNumber);
  CLI::App* nash = app.add_subcommand("nash", "Nash bargaining point and its supporting simplex");
  add_common(nash);
  CLI::App* commodify = app.add_subcommand("commodify", "exchange economy reproducing a bargaining set");
  add_common(commodify);
  commodify->add_option("--mode", o.mode, "two or general")->check(CLI::IsMember({"two", "general"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*solve) return cmd_solve(o, false);
    if (*match) return cmd_solve(o, true);
    if (*verify) return cmd_verify(o);
    if (*equitable) return cmd_equitable(o);
    if (*nash) return cmd_nash(o);
    if (*commodify) return cmd_commodify(o);
  } catch (const InvalidInput& e) {
    std::cerr << json{{"error", "invalid_input"}, {"message", e.what()}}.dump() << "\n";
    return kInvalid;
  } catch (const NumericalError& e) {
    std::cerr << json{{"error", "numerical"}, {"message", e.what()}}.dump() << "\n";
    return kNumerical;
  } catch (const json::exception& e) {
    std::cerr << json{{"error", "invalid_input"}, {"message", e.what()}}.dump() << "\n";
    return kInvalid;
  }
  return kInvalid;
}
