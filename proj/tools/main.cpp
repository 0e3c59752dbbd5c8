// Command-line front end: scenario generation, single runs, seeded suites,
// and ledger reports.  Exit codes: 0 all pass, 1 an invariant failed,
// 2 invalid input or a violated hypothesis.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <hardylab/lab.hpp>

namespace lab = hardylab::lab;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInvalid = 2;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void append_line(const std::string& path, const std::string& line) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path + " for append");
  out << line << "\n";
}

std::vector<lab::LedgerRecord> load_ledger(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<lab::LedgerRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(lab::record_from_json(line));
  }
  return out;
}

int status_code(const std::vector<lab::LedgerRecord>& records) {
  bool any_fail = false, any_invalid = false;
  for (const auto& r : records) {
    if (r.status == "fail") any_fail = true;
    if (r.status == "invalid-instance") any_invalid = true;
  }
  if (any_fail) return kExitFail;
  if (any_invalid) return kExitInvalid;
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-section laboratory for perturbed shift operators on "
               "vector-valued Hardy spaces"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a seeded scenario file");
  std::uint64_t seed = 0;
  std::string theorem, out_path;
  lab::ScenarioParams ranges;
  gen->add_option("--seed", seed, "random seed")->required();
  gen->add_option("--theorem", theorem, "scenario family id")->required();
  gen->add_option("--l", ranges.l, "symbol degree cap");
  gen->add_option("--lp", ranges.lp, "second symbol degree cap");
  gen->add_option("--m", ranges.m, "fiber dimension cap");
  gen->add_option("--k", ranges.k, "perturbation rank / defect cap");
  gen->add_option("--blocks", ranges.N, "block count");
  gen->add_option("--taylor-degree", ranges.D, "Taylor truncation degree");
  gen->add_option("--guard", ranges.guard, "top blocks kept clear");
  gen->add_option("--out", out_path, "output scenario file")->required();

  // run
  auto* runc = app.add_subcommand("run", "run one scenario and append a ledger record");
  std::string in_path, ledger_path;
  double tol = 1e-8;
  runc->add_option("--in", in_path, "scenario file")->required();
  runc->add_option("--tol", tol, "acceptance tolerance");
  runc->add_option("--ledger", ledger_path, "ledger file to append")->required();

  // suite
  auto* suite = app.add_subcommand("suite", "run a batch of seeded scenarios");
  int trials = 10;
  suite->add_option("--theorem", theorem, "scenario family id")->required();
  suite->add_option("--trials", trials, "number of scenarios")->required();
  suite->add_option("--seed", seed, "base seed");
  suite->add_option("--tol", tol, "acceptance tolerance");
  suite->add_option("--l", ranges.l, "symbol degree cap");
  suite->add_option("--lp", ranges.lp, "second symbol degree cap");
  suite->add_option("--m", ranges.m, "fiber dimension cap");
  suite->add_option("--k", ranges.k, "perturbation rank / defect cap");
  suite->add_option("--blocks", ranges.N, "block count");
  suite->add_option("--taylor-degree", ranges.D, "Taylor truncation degree");
  suite->add_option("--guard", ranges.guard, "top blocks kept clear");
  suite->add_option("--ledger", ledger_path, "ledger file to append")->required();

  // report
  auto* report = app.add_subcommand("report", "summarize a ledger");
  bool as_json = false;
  report->add_option("--ledger", ledger_path, "ledger file")->required();
  report->add_flag("--json", as_json, "machine-readable output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      if (!lab::known_theorem(theorem)) {
        std::cerr << "unknown theorem id: " << theorem << "\n";
        return kExitInvalid;
      }
      const lab::Scenario sc = lab::generate(seed, theorem, ranges);
      std::ofstream out(out_path);
      if (!out) throw std::runtime_error("cannot open " + out_path);
      out << lab::scenario_to_json(sc);
      return kExitPass;
    }

    if (runc->parsed()) {
      const lab::Scenario sc = lab::scenario_from_json(slurp(in_path));
      const lab::LedgerRecord rec = lab::run(sc, tol);
      append_line(ledger_path, lab::record_to_json(rec));
      std::cout << rec.theorem << " seed " << rec.seed << ": " << rec.status;
      if (!rec.message.empty()) std::cout << " (" << rec.message << ")";
      std::cout << "\n";
      return status_code({rec});
    }

    if (suite->parsed()) {
      if (!lab::known_theorem(theorem)) {
        std::cerr << "unknown theorem id: " << theorem << "\n";
        return kExitInvalid;
      }
      std::vector<lab::LedgerRecord> records;
      for (int i = 0; i < trials; ++i) {
        const lab::Scenario sc = lab::generate(seed + static_cast<std::uint64_t>(i),
                                               theorem, ranges);
        lab::LedgerRecord rec = lab::run(sc, tol);
        append_line(ledger_path, lab::record_to_json(rec));
        records.push_back(std::move(rec));
      }
      std::cout << lab::summary_text(lab::summarize(records));
      return status_code(records);
    }

    if (report->parsed()) {
      const auto records = load_ledger(ledger_path);
      const lab::Summary s = lab::summarize(records);
      if (as_json)
        std::cout << lab::summary_json(s);
      else
        std::cout << lab::summary_text(s);
      return status_code(records);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}
