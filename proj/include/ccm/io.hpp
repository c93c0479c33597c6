#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "ccm/exchange.hpp"
#include "ccm/matching.hpp"
#include "ccm/solutions.hpp"

namespace ccm::io {

using nlohmann::json;

inline constexpr const char* kProblemFormat = "ccm-problem/1";
inline constexpr const char* kCertificateFormat = "ccm-certificate/1";

struct SolverOverrides {
  std::optional<double> tol;
  std::optional<std::size_t> sweep;
  std::optional<std::size_t> grid;
  std::optional<Vec> c;
};

/// A parsed problem document. Exactly one of the payloads is set, matching
/// `type`.
struct ProblemFile {
  std::string type;  // collective, matching, economy, bargaining
  std::string hash;
  SolverOverrides solver;
  std::optional<CollectiveProblem> collective;
  std::optional<MatchingProblem> matching;
  std::optional<Economy> economy;
  std::optional<Polytope> bargaining;
};

/// Throws InvalidInput naming the offending field.
json read_json(const std::filesystem::path& path);
ProblemFile parse_problem(const json& doc);
ProblemFile load_problem(const std::filesystem::path& path);

/// SHA-256 of the compact, key-sorted serialization.
std::string problem_hash(const json& doc);

/// The bargaining set a problem induces.
Polytope bargaining_set(const ProblemFile& p);

/// The collective problem behind collective, matching and economy files.
CollectiveProblem collective_of(const ProblemFile& p);

/// Numbers may be given as JSON numbers or decimal strings.
double number(const json& v, const std::string& where);
Vec vector_of(const json& v, const std::string& where);
Matrix matrix_of(const json& v, const std::string& where);

json to_json(std::span<const double> v);
json to_json(const Matrix& m);
json to_json(const SimplexGame& g);
json to_json(const Verdict& v);
json to_json(const LindahlCertificate& c);
json to_json(const EquitableVerdict& v);
json economy_json(const Economy& e);
json allocation_json(const Allocation& a, std::size_t goods);
Allocation allocation_of(const json& v, std::size_t agents, std::size_t goods, const std::string& where);

/// Certificate skeleton with format, kind, hash, version and tolerances.
json certificate_header(const std::string& kind, const ProblemFile& p);

}  // namespace ccm::io
