#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hardylab/structure.hpp"

namespace hardylab::lab {

inline constexpr int kSchemaVersion = 1;

// Deterministic random source: std::mt19937_64 seeded directly; doubles are
// the top 53 bits of the raw draw.  No platform-default randomness anywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double sym() { return 2.0 * uniform() - 1.0; }
  cplx c() {
    const double re = sym();
    const double im = sym();
    return {re, im};
  }
  Vec cvec(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = c();
    return v;
  }
  // uniform integer in [lo, hi]
  int pick(int lo, int hi) {
    const int span = hi - lo + 1;
    int off = static_cast<int>(uniform() * span);
    if (off >= span) off = span - 1;
    return lo + off;
  }

 private:
  std::mt19937_64 eng_;
};

// Upper bounds handed to the generator; the drawn shape is recorded back into
// the scenario so that run() never touches the random stream.
struct ScenarioParams {
  int l = 3;       // symbol degree cap
  int lp = 5;      // second symbol degree cap
  int m = 3;       // fiber cap
  int k = 3;       // perturbation rank / defect cap
  int N = 8;       // block count cap
  int D = 200;     // Taylor degree
  int guard = 2;   // top blocks kept clear of generated subspaces
  double tol = 1e-8;
  // generation-time knob, not serialized: force every Blaschke zero to the
  // origin so no Taylor truncation error enters anywhere
  bool origin_only = false;
};

struct Scenario {
  int schema = kSchemaVersion;
  std::uint64_t seed = 0;
  std::string theorem;
  ScenarioParams params;  // actual drawn values
  nlohmann::ordered_json payload;
};

bool known_theorem(const std::string& id);

Scenario generate(std::uint64_t seed, const std::string& theorem,
                  const ScenarioParams& ranges);

struct LedgerRecord {
  int schema = kSchemaVersion;
  std::uint64_t seed = 0;
  std::string theorem;
  std::string status;  // pass | fail | invalid-instance
  std::map<std::string, double> residuals;
  std::map<std::string, double> info;  // dimensions, counts, flags
  std::string message;
  double elapsed_ms = 0.0;
};

LedgerRecord run(const Scenario& sc, double tol);

std::string scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const std::string& text);
std::string record_to_json(const LedgerRecord& rec);  // one line
LedgerRecord record_from_json(const std::string& line);

struct Summary {
  int total = 0, passed = 0, failed = 0, invalid = 0;
  std::map<std::string, double> worst_residuals;
  std::vector<std::uint64_t> failing_seeds;
  double total_ms = 0.0;
};

Summary summarize(const std::vector<LedgerRecord>& records);
std::string summary_text(const Summary& s);
std::string summary_json(const Summary& s);

// serialization helpers shared with the CLI
nlohmann::ordered_json json_complex(cplx z);
cplx complex_from_json(const nlohmann::json& j);
nlohmann::ordered_json json_vec(const Vec& v);
Vec vec_from_json(const nlohmann::json& j);
nlohmann::ordered_json json_mat(const Mat& M);  // row-major
Mat mat_from_json(const nlohmann::json& j);

}  // namespace hardylab::lab
