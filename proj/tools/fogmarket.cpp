// Copyright 2026 The fogmarket Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// fogmarket command-line tool.
//
//   fogmarket generate --nodes 40 --services 8 --seed 1 --out inst.json
//   fogmarket solve    --scheme geg --in inst.json --out sol.json
//   fogmarket admm     --in inst.json --transport masked --agents peer
//   fogmarket verify   --in inst.json --sol sol.json
//   fogmarket audit    --in inst.json --scheme swm
//   fogmarket bench    --seeds 50 --schemes all
//   fogmarket breach   --p 0.1 --b 2 --platform honest

#include "fogmarket/fogmarket.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace fogmarket;

namespace {

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitVerifyFailed = 3;

struct UsageError : Error {
  using Error::Error;
};

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << Json{{"error", kind}, {"message", message}}.dump() << '\n';
}

fs::path out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("FOGMARKET_OUT_DIR")) return env;
  return ".";
}

/// Writes through a temporary file so readers never see a partial output.
void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << content;
    if (!f) throw Error("write failed for " + path.string());
  }
  fs::rename(tmp, path);
}

class Run {
 public:
  Run(std::string command, Json config, std::uint64_t seed = 0) {
    manifest_.command = std::move(command);
    manifest_.config = std::move(config);
    manifest_.config_digest = sha256_hex(manifest_.config.dump());
    manifest_.seed = seed;
  }

  void write(const fs::path& path, const std::string& content) {
    write_atomic(path, content);
    record(path);
  }

  void record(const fs::path& path) { manifest_.outputs.push_back(path.string()); }

  /// Records the manifest in `dir`, or next to the first output. Nothing is
  /// recorded when nothing was written.
  void finish(const fs::path& dir_hint = {}) {
    manifest_.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    if (manifest_.outputs.empty()) return;
    const fs::path dir = dir_hint.empty() ? fs::path(manifest_.outputs.front()).parent_path() : dir_hint;
    write_atomic(dir / (manifest_.command + ".manifest.json"), manifest_.to_json().dump(2) + "\n");
  }

 private:
  RunManifest manifest_;
  std::chrono::steady_clock::time_point started_ = std::chrono::steady_clock::now();
};

std::string csv_number(double v) { return detail::format_number(v); }

std::vector<SchemeId> parse_schemes(const std::string& text) {
  if (text == "all") return {kAllSchemes.begin(), kAllSchemes.end()};
  std::vector<SchemeId> out;
  std::stringstream ss(text);
  std::string name;
  while (std::getline(ss, name, ',')) {
    const auto s = parse_scheme(name);
    if (!s) throw UsageError("unknown scheme '" + name + "'");
    out.push_back(*s);
  }
  if (out.empty()) throw UsageError("no schemes given");
  return out;
}

Json scheme_result_to_json(const MarketInstance& inst, const SchemeResult& res) {
  if (res.equilibrium) {
    Json j = solution_to_json(*res.equilibrium);
    j["metadata"]["scheme"] = std::string(to_string(res.scheme));
    return j;
  }
  Json j = allocation_solution_to_json(inst, res.allocation, std::string(to_string(res.scheme)),
                                       res.wall_time_s);
  j["metadata"]["scheme"] = std::string(to_string(res.scheme));
  return j;
}

// -- generate ------------------------------------------------------------------

struct GenerateArgs {
  std::size_t nodes = 40;
  std::size_t services = 8;
  std::uint64_t seed = 1;
  double limit = 600.0;
  std::vector<double> budgets;
  std::string catalog;
  bool per_node_demand = false;
  std::string out;
  std::string dir;
};

GeneratorConfig generator_config(const GenerateArgs& a) {
  GeneratorConfig cfg;
  cfg.nodes = a.nodes;
  cfg.services = a.services;
  cfg.seed = a.seed;
  cfg.utility_limit = a.limit;
  cfg.budgets = a.budgets;
  cfg.same_demand_at_every_node = !a.per_node_demand;
  if (!a.catalog.empty()) cfg.catalog = load_catalog(a.catalog);
  return cfg;
}

int cmd_generate(const GenerateArgs& a) {
  Run run("generate",
          {{"nodes", a.nodes}, {"services", a.services}, {"limit", a.limit}, {"budgets", a.budgets},
           {"catalog", a.catalog}, {"per_node_demand", a.per_node_demand}},
          a.seed);
  const auto g = generate(generator_config(a));
  const fs::path path = a.out.empty() ? out_dir(a.dir) / "instance.json" : fs::path(a.out);
  run.write(path, generated_to_json(g).dump(2) + "\n");
  run.finish();
  return 0;
}

// -- solve ---------------------------------------------------------------------

struct SolveArgs {
  std::string scheme = "geg";
  std::string in;
  std::string out;
  std::string dir;
  std::optional<std::uint64_t> random_start;
};

int cmd_solve(const SolveArgs& a) {
  const auto scheme = parse_scheme(a.scheme);
  if (!scheme) throw UsageError("unknown scheme '" + a.scheme + "'");
  Run run("solve", {{"scheme", a.scheme}, {"in", a.in}});
  const auto inst = load_instance(a.in);
  EquilibriumOptions opts;
  opts.random_start_seed = a.random_start;
  const auto res = run_scheme(inst, *scheme, opts);
  const fs::path path = a.out.empty() ? out_dir(a.dir) / "solution.json" : fs::path(a.out);
  run.write(path, scheme_result_to_json(inst, res).dump(2) + "\n");
  run.finish();
  return 0;
}

// -- admm ----------------------------------------------------------------------

struct AdmmArgs {
  std::string in;
  std::string out;
  std::string trace;
  std::string transcript;
  std::string dir;
  double rho = 1.0;
  double gamma1 = 1e-4;
  double gamma2 = 1e-4;
  int max_iter = 5000;
  std::string transport = "plain";
  std::string agents = "platform";
  std::size_t neighbors = 2;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

int cmd_admm(const AdmmArgs& a) {
  Run run("admm",
          {{"in", a.in}, {"rho", a.rho}, {"gamma1", a.gamma1}, {"gamma2", a.gamma2},
           {"max_iter", a.max_iter}, {"transport", a.transport}, {"agents", a.agents},
           {"neighbors", a.neighbors}},
          a.seed);
  const auto inst = load_instance(a.in);
  AdmmOptions opts;
  opts.rho = a.rho;
  opts.gamma_primal = a.gamma1;
  opts.gamma_dual = a.gamma2;
  opts.max_iter = a.max_iter;
  opts.threads = a.threads;
  opts.aggregator = a.agents == "peer" ? Aggregator::peer : Aggregator::platform;

  std::unique_ptr<AveragingTransport> transport;
  MaskedAveraging* masked = nullptr;
  if (a.transport == "masked") {
    if (inst.num_services() < 2) throw UsageError("masked transport needs at least two services");
    auto m = std::make_unique<MaskedAveraging>(a.neighbors, a.seed, opts.aggregator, !a.transcript.empty());
    masked = m.get();
    transport = std::move(m);
  } else {
    transport = std::make_unique<PlainAveraging>();
  }
  const auto res = run_admm(inst, *transport, opts);

  const fs::path dir = out_dir(a.dir);
  Json sol = solution_to_json(res.solution);
  if (masked) sol["metadata"]["messages_sent"] = masked->messages_sent();
  run.write(a.out.empty() ? dir / "admm_solution.json" : fs::path(a.out), sol.dump(2) + "\n");
  std::ostringstream trace;
  write_trace_csv(trace, res.state.history, inst.num_services());
  run.write(a.trace.empty() ? dir / "admm_trace.csv" : fs::path(a.trace), trace.str());
  if (masked && !a.transcript.empty()) {
    std::ostringstream lines;
    for (const auto& rd : masked->rounds()) write_transcript_jsonl(lines, rd);
    run.write(a.transcript, lines.str());
  }
  run.finish();
  if (!res.converged) {
    print_error("not_converged", "iteration cap reached; primal residual " +
                                     csv_number(res.state.r_primal) + ", dual residual " +
                                     csv_number(res.state.r_dual));
  }
  return 0;
}

// -- verify --------------------------------------------------------------------

struct VerifyArgs {
  std::string in;
  std::string sol;
  std::string out;
  double tol = 1e-5;
};

int cmd_verify(const VerifyArgs& a) {
  Run run("verify", {{"in", a.in}, {"sol", a.sol}, {"tol", a.tol}});
  const auto inst = load_instance(a.in);
  const auto sol = solution_from_json(inst, load_json(a.sol));
  const auto rep = verify_equilibrium(inst, sol, a.tol);
  const std::string text = report_to_json(rep).dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    run.write(a.out, text);
  }
  run.finish();
  return rep.all_pass() ? 0 : kExitVerifyFailed;
}

// -- audit ---------------------------------------------------------------------

struct AuditArgs {
  std::string in;
  std::string sol;
  std::string scheme;
  std::string out;
  std::uint64_t seed = 0;
};

int cmd_audit(const AuditArgs& a) {
  if (a.sol.empty() == a.scheme.empty()) throw UsageError("audit needs exactly one of --sol or --scheme");
  Run run("audit", {{"in", a.in}, {"sol", a.sol}, {"scheme", a.scheme}}, a.seed);
  const auto inst = load_instance(a.in);
  Allocation x;
  std::string label = a.scheme;
  if (!a.sol.empty()) {
    const auto j = load_json(a.sol);
    x = allocation_from_json(inst, j.at("allocation"));
    label = j.value("metadata", Json::object()).value("scheme", j["metadata"].value("method", "external"));
  } else {
    const auto s = parse_scheme(a.scheme);
    if (!s) throw UsageError("unknown scheme '" + a.scheme + "'");
    x = run_scheme(inst, *s).allocation;
  }
  const std::string text = std::string(kAuditCsvHeader) + "\n" +
                           audit_csv_row(label, a.seed, audit_fairness(inst, x)) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    run.write(a.out, text);
  }
  run.finish();
  return 0;
}

// -- bench ---------------------------------------------------------------------

struct BenchArgs {
  std::size_t seeds = 50;
  std::uint64_t master_seed = 1;
  std::string schemes = "all";
  std::size_t nodes = 40;
  std::size_t services = 8;
  double limit = 600.0;
  std::string catalog;
  std::string dir;
  unsigned jobs = 1;
  std::size_t max_neighbors = 0;
};

struct SeedRun {
  std::string runs;       // rows of runs.csv
  std::string utilities;  // rows of utilities.csv
  std::string timing;     // rows of timing.csv
  std::map<std::string, std::map<std::string, double>> metrics;  // scheme -> metric -> value
};

SeedRun bench_seed(const BenchArgs& a, const std::vector<SchemeId>& schemes, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.nodes = a.nodes;
  cfg.services = a.services;
  cfg.utility_limit = a.limit;
  cfg.seed = seed;
  if (!a.catalog.empty()) cfg.catalog = load_catalog(a.catalog);
  const auto inst = generate(cfg).instance;
  SeedRun out;
  for (auto s : schemes) {
    const auto res = run_scheme(inst, s);
    const auto fair = audit_fairness(inst, res.allocation);
    const double total = std::accumulate(res.utilities.begin(), res.utilities.end(), 0.0);
    const double least = *std::min_element(res.utilities.begin(), res.utilities.end());
    const Eigen::VectorXd peak = fair.peak_utilization();
    const std::string name(to_string(s));
    auto& m = out.metrics[name];
    m = {{"total_utility", total},
         {"min_utility", least},
         {"ef_index", fair.envy_free_index},
         {"min_sharing_margin", fair.min_sharing_margin()},
         {"min_proportionality", fair.min_proportionality()},
         {"mean_utilization", fair.mean_utilization()},
         {"min_peak_utilization", peak.minCoeff()}};
    out.runs += name + "," + std::to_string(seed);
    for (const auto& key : {"total_utility", "min_utility", "ef_index", "min_sharing_margin",
                            "min_proportionality", "mean_utilization", "min_peak_utilization"}) {
      out.runs += "," + csv_number(m[key]);
    }
    out.runs += "\n";
    for (std::size_t i = 0; i < res.utilities.size(); ++i) {
      out.utilities += name + "," + std::to_string(seed) + "," + std::to_string(i) + "," +
                       csv_number(res.utilities[i]) + "\n";
    }
    out.timing += name + "," + std::to_string(seed) + "," + csv_number(res.wall_time_s) + "\n";
  }
  return out;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

int cmd_bench(const BenchArgs& a) {
  if (a.seeds == 0) throw UsageError("--seeds must be positive");
  const auto schemes = parse_schemes(a.schemes);
  Run run("bench",
          {{"seeds", a.seeds}, {"schemes", a.schemes}, {"nodes", a.nodes}, {"services", a.services},
           {"limit", a.limit}, {"catalog", a.catalog}},
          a.master_seed);
  const fs::path dir = out_dir(a.dir);
  std::vector<SeedRun> results(a.seeds);
  std::vector<std::exception_ptr> errors(a.seeds);
  const unsigned workers = std::max(1u, std::min<unsigned>(a.jobs, static_cast<unsigned>(a.seeds)));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t k = w; k < a.seeds; k += workers) {
        try {
          const std::uint64_t seed = a.master_seed + k;
          results[k] = bench_seed(a, schemes, seed);
          write_atomic(dir / "seeds" / ("seed_" + std::to_string(seed) + ".csv"), results[k].runs);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const std::vector<std::string> metrics = {"total_utility",       "min_utility",
                                            "ef_index",            "min_sharing_margin",
                                            "min_proportionality", "mean_utilization",
                                            "min_peak_utilization"};
  std::string runs = "scheme,seed";
  for (const auto& m : metrics) runs += "," + m;
  runs += "\n";
  std::string utils = "scheme,seed,service,utility\n";
  std::string timing = "scheme,seed,wall_time_s\n";
  for (std::size_t k = 0; k < a.seeds; ++k) {
    runs += results[k].runs;
    utils += results[k].utilities;
    timing += results[k].timing;
    run.record(dir / "seeds" / ("seed_" + std::to_string(a.master_seed + k) + ".csv"));
  }
  std::string summary = "scheme,metric,mean,min,q1,median,q3,max\n";
  for (auto s : schemes) {
    const std::string name(to_string(s));
    for (const auto& m : metrics) {
      std::vector<double> v;
      for (const auto& r : results) v.push_back(r.metrics.at(name).at(m));
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      summary += name + "," + m + "," + csv_number(mean) + "," + csv_number(quantile(v, 0.0)) + "," +
                 csv_number(quantile(v, 0.25)) + "," + csv_number(quantile(v, 0.5)) + "," +
                 csv_number(quantile(v, 0.75)) + "," + csv_number(quantile(v, 1.0)) + "\n";
    }
  }
  std::string privacy = "services,neighbors,messages_per_round\n";
  const std::size_t max_b = a.max_neighbors ? std::min(a.max_neighbors, a.services - 1) : a.services - 1;
  for (std::size_t b = 1; b <= max_b; ++b) {
    privacy += std::to_string(a.services) + "," + std::to_string(b) + "," +
               std::to_string(message_count(a.services, b)) + "\n";
  }
  run.write(dir / "runs.csv", runs);
  run.write(dir / "utilities.csv", utils);
  run.write(dir / "summary.csv", summary);
  run.write(dir / "privacy_cost.csv", privacy);
  run.write(dir / "timing.csv", timing);
  run.finish(dir);
  return 0;
}

// -- breach --------------------------------------------------------------------

struct BreachArgs {
  std::vector<double> p = {0.1};
  std::size_t b = 2;
  std::string platform = "both";
  std::vector<double> q;
  std::size_t estimate_services = 0;
  std::size_t rounds = 1000;
  std::uint64_t seed = 1;
};

int cmd_breach(const BreachArgs& a) {
  std::vector<double> q = a.q.empty() ? std::vector<double>{1.0} : a.q;
  if (a.estimate_services) q = estimate_inbound_distribution(a.estimate_services, a.b, a.rounds, a.seed);
  std::vector<bool> states;
  if (a.platform == "honest" || a.platform == "both") states.push_back(false);
  if (a.platform == "corrupt" || a.platform == "both") states.push_back(true);
  std::cout << "p,n_i,platform,probability\n";
  for (double p : a.p) {
    for (bool corrupt : states) {
      for (std::size_t n = 1; n <= a.b; ++n) {
        ThreatModel model{p, q, corrupt};
        std::cout << csv_number(p) << ',' << n << ',' << (corrupt ? "corrupt" : "honest") << ','
                  << csv_number(breach_probability(model, n)) << '\n';
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fog resource market: equilibria, ADMM, privacy and fairness audits"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Draw a random instance from a node catalog");
  g->add_option("--nodes,-M", gen.nodes, "Fog nodes")->check(CLI::PositiveNumber);
  g->add_option("--services,-N", gen.services, "Services")->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed, "Random seed");
  g->add_option("--limit", gen.limit, "Utility limit of every service")->check(CLI::PositiveNumber);
  g->add_option("--budgets", gen.budgets, "Explicit budget per service (default: all 1)");
  g->add_option("--catalog", gen.catalog, "Node catalog JSON")->check(CLI::ExistingFile);
  g->add_flag("--per-node-demand", gen.per_node_demand, "Draw a separate demand at every node");
  g->add_option("--out,-o", gen.out, "Instance file (default: <out-dir>/instance.json)");
  g->add_option("--out-dir", gen.dir, "Output directory (default: $FOGMARKET_OUT_DIR or .)");

  SolveArgs sol;
  auto* s = app.add_subcommand("solve", "Compute an allocation with one scheme");
  s->add_option("--scheme", sol.scheme, "geg, eg, prop, swm or mm")
      ->check(CLI::IsMember({"geg", "eg", "prop", "swm", "mm"}));
  s->add_option("--in,-i", sol.in, "Instance file")->required()->check(CLI::ExistingFile);
  s->add_option("--out,-o", sol.out, "Solution file (default: <out-dir>/solution.json)");
  s->add_option("--out-dir", sol.dir, "Output directory");
  s->add_option("--random-start", sol.random_start, "Seed for a random interior starting point");

  AdmmArgs adm;
  auto* d = app.add_subcommand("admm", "Run the distributed ADMM protocol");
  d->add_option("--in,-i", adm.in, "Instance file")->required()->check(CLI::ExistingFile);
  d->add_option("--out,-o", adm.out, "Solution file (default: <out-dir>/admm_solution.json)");
  d->add_option("--trace", adm.trace, "Iteration trace CSV (default: <out-dir>/admm_trace.csv)");
  d->add_option("--transcript", adm.transcript, "Masking transcript, JSON lines (masked transport)");
  d->add_option("--out-dir", adm.dir, "Output directory");
  d->add_option("--rho", adm.rho, "Penalty parameter")->check(CLI::PositiveNumber);
  d->add_option("--gamma1", adm.gamma1, "Primal residual tolerance")->check(CLI::PositiveNumber);
  d->add_option("--gamma2", adm.gamma2, "Dual residual tolerance")->check(CLI::PositiveNumber);
  d->add_option("--max-iter", adm.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
  d->add_option("--transport", adm.transport, "plain or masked")->check(CLI::IsMember({"plain", "masked"}));
  d->add_option("--agents", adm.agents, "platform or peer aggregator")
      ->check(CLI::IsMember({"platform", "peer"}));
  d->add_option("--neighbors,-b", adm.neighbors, "Mask recipients per service")->check(CLI::PositiveNumber);
  d->add_option("--seed", adm.seed, "Mask seed");
  d->add_option("--threads", adm.threads, "Worker threads for the x-updates")->check(CLI::PositiveNumber);

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Check equilibrium conditions of a priced solution");
  v->add_option("--in,-i", ver.in, "Instance file")->required()->check(CLI::ExistingFile);
  v->add_option("--sol", ver.sol, "Solution file")->required()->check(CLI::ExistingFile);
  v->add_option("--out,-o", ver.out, "Report file (default: stdout)");
  v->add_option("--tol", ver.tol, "Tolerance")->check(CLI::PositiveNumber);

  AuditArgs aud;
  auto* u = app.add_subcommand("audit", "Fairness audit of an allocation");
  u->add_option("--in,-i", aud.in, "Instance file")->required()->check(CLI::ExistingFile);
  u->add_option("--sol", aud.sol, "Solution file to audit")->check(CLI::ExistingFile);
  u->add_option("--scheme", aud.scheme, "Compute the allocation with this scheme instead");
  u->add_option("--seed", aud.seed, "Seed label for the CSV row");
  u->add_option("--out,-o", aud.out, "CSV file (default: stdout)");

  BenchArgs ben;
  auto* b = app.add_subcommand("bench", "Compare schemes over seeded random instances");
  b->add_option("--seeds", ben.seeds, "Number of instances")->check(CLI::PositiveNumber);
  b->add_option("--master-seed", ben.master_seed, "Seed of the first instance");
  b->add_option("--schemes", ben.schemes, "'all' or a comma-separated list");
  b->add_option("--nodes,-M", ben.nodes, "Fog nodes")->check(CLI::PositiveNumber);
  b->add_option("--services,-N", ben.services, "Services")->check(CLI::Range(2, 100000));
  b->add_option("--limit", ben.limit, "Utility limit")->check(CLI::PositiveNumber);
  b->add_option("--catalog", ben.catalog, "Node catalog JSON")->check(CLI::ExistingFile);
  b->add_option("--out-dir", ben.dir, "Output directory");
  b->add_option("--jobs,-j", ben.jobs, "Seeds solved in parallel")->check(CLI::PositiveNumber);
  b->add_option("--max-neighbors", ben.max_neighbors, "Largest b in the message-cost table");

  BreachArgs br;
  auto* r = app.add_subcommand("breach", "Probability that a service's iterate is disclosed");
  r->add_option("--p", br.p, "Channel compromise probability (repeatable)")->check(CLI::Range(0.0, 1.0));
  r->add_option("--b", br.b, "Mask recipients per service")->check(CLI::PositiveNumber);
  r->add_option("--platform", br.platform, "honest, corrupt or both")
      ->check(CLI::IsMember({"honest", "corrupt", "both"}));
  r->add_option("--q", br.q, "Q(0), Q(1), ...: inbound-only contact distribution");
  r->add_option("--estimate", br.estimate_services, "Estimate Q by simulation with this many services");
  r->add_option("--rounds", br.rounds, "Simulated rounds for --estimate")->check(CLI::PositiveNumber);
  r->add_option("--seed", br.seed, "Seed for --estimate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_generate(gen);
    if (s->parsed()) return cmd_solve(sol);
    if (d->parsed()) return cmd_admm(adm);
    if (v->parsed()) return cmd_verify(ver);
    if (u->parsed()) return cmd_audit(aud);
    if (b->parsed()) return cmd_bench(ben);
    if (r->parsed()) return cmd_breach(br);
  } catch (const UsageError& e) {
    print_error("usage", e.what());
    return kExitUsage;
  } catch (const DegenerateInstance& e) {
    print_error("degenerate_instance", e.what());
    return kExitError;
  } catch (const InvalidInstance& e) {
    print_error("invalid_instance", e.what());
    return kExitError;
  } catch (const std::exception& e) {
    print_error("error", e.what());
    return kExitError;
  }
  return kExitUsage;
}
