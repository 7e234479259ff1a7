#include "tcboost/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>

#include "tcboost/error.hpp"
#include "tcboost/log.hpp"
#include "tcboost/metrics.hpp"

namespace tcboost::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool is_adaboost(const std::string& method) { return method == engine::kAdaBoost; }

struct Outcome {
  Cell cell;
  std::vector<engine::TraceRecord> trace;
};

// Index of the best validation accuracy; ties go to the smaller hyperparameter.
std::size_t pick_winner(const std::vector<const Outcome*>& runs) {
  std::size_t best = runs.size();
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& c = runs[k]->cell;
    if (!c.ok) continue;
    if (best == runs.size()) {
      best = k;
      continue;
    }
    const auto& b = runs[best]->cell;
    if (c.val_acc > b.val_acc || (c.val_acc == b.val_acc && c.hyperparameter < b.hyperparameter))
      best = k;
  }
  return best;
}

void check_seeds(const std::vector<std::uint64_t>& seeds, const char* what) {
  if (seeds.empty()) throw ValidationError(std::string(what) + ": at least one seed is required");
  std::vector<std::uint64_t> sorted(seeds);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ValidationError(std::string(what) + ": seeds must be distinct");
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Fill rows from the per-seed cell outcomes, in seed order.
void collect_winners(const std::vector<Outcome>& outcomes, const std::string& method,
                     const std::string& dataset, int depth, bool keep_traces,
                     ExperimentReport& report) {
  std::map<std::uint64_t, std::vector<const Outcome*>> by_seed;
  std::vector<std::uint64_t> order;
  for (const auto& o : outcomes) {
    if (o.cell.method != method) continue;
    if (!by_seed.count(o.cell.seed)) order.push_back(o.cell.seed);
    by_seed[o.cell.seed].push_back(&o);
  }
  for (auto seed : order) {
    const auto& runs = by_seed[seed];
    const std::size_t k = pick_winner(runs);
    if (k == runs.size()) {
      log::warn(method + " seed " + std::to_string(seed) + ": every grid cell failed");
      continue;
    }
    const auto& c = runs[k]->cell;
    SeedResult row;
    row.method = method;
    row.dataset = dataset;
    row.depth = depth;
    row.seed = seed;
    row.chosen_hp = c.hyperparameter;
    row.val_acc = c.val_acc;
    row.test_acc = c.test_acc;
    row.nnz = c.nnz;
    row.seconds = c.seconds;
    if (keep_traces) row.trace = runs[k]->trace;
    report.rows.push_back(std::move(row));
  }
}

template <class Job>
void run_parallel(std::size_t count, int workers, Job&& job) {
  const long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(workers, 1))
  for (long k = 0; k < n; ++k) job(static_cast<std::size_t>(k));
}

void finish_cell(Cell& cell, const engine::EnsembleModel& model, const data::Split& sp) {
  cell.val_acc = metrics::accuracy(model, sp.validation);
  cell.test_acc = metrics::accuracy(model, sp.test);
  cell.nnz = metrics::sparsity(model);
  cell.iterations = model.metadata.iterations;
  cell.termination = engine::to_string(model.metadata.termination);
  cell.ok = true;
}

}  // namespace

std::string to_string(RangeKind k) {
  switch (k) {
    case RangeKind::log10_exponent: return "log10_exponent";
    case RangeKind::linear: return "linear";
    case RangeKind::linear_scaled_by_m: return "linear_scaled_by_M";
  }
  return "unknown";
}

RangeKind range_kind_from_string(const std::string& s) {
  if (s == "log10_exponent" || s == "log10") return RangeKind::log10_exponent;
  if (s == "linear") return RangeKind::linear;
  if (s == "linear_scaled_by_M" || s == "linear_scaled_by_m") return RangeKind::linear_scaled_by_m;
  throw ValidationError("unknown range kind '" + s +
                        "' (valid: log10_exponent, linear, linear_scaled_by_M)");
}

void GridSpec::validate() const {
  if (count == 1) {
    if (lower != upper) throw ValidationError("grid: a single-value grid needs lower == upper");
    return;
  }
  if (count < 2) throw ValidationError("grid: count must be >= 2");
  // A scaled upper end is compared once M is known.
  if (kind != RangeKind::linear_scaled_by_m && !(lower < upper))
    throw ValidationError("grid: lower must be < upper");
  if (kind != RangeKind::log10_exponent && !(lower > 0.0))
    throw ValidationError("grid: linear ranges must be positive");
}

GridSpec default_grid(const std::string& method) {
  if (is_adaboost(method)) return {method, RangeKind::log10_exponent, -3.0, 0.0, 10};
  switch (master::formulation_from_string(method)) {
    case master::Formulation::nm_boost:
    case master::Formulation::lp_boost:
    case master::Formulation::cg_boost:
      return {method, RangeKind::log10_exponent, -4.0, -0.33, 10};
    case master::Formulation::qrlp_boost:
    case master::Formulation::erlp_boost:
      return {method, RangeKind::linear_scaled_by_m, 1.0, 0.06, 10};
    case master::Formulation::md_boost: return {method, RangeKind::linear, 1.0, 120.0, 10};
    case master::Formulation::hard_margin: return {method, RangeKind::linear, 1.0, 1.0, 1};
  }
  throw ValidationError("no default grid for '" + method + "'");
}

std::vector<double> grid_values(const GridSpec& spec, std::size_t m) {
  spec.validate();
  double lo = spec.lower, hi = spec.upper;
  if (spec.kind == RangeKind::linear_scaled_by_m) {
    hi *= static_cast<double>(m);
    if (spec.count > 1 && !(lo < hi))
      throw ValidationError("grid: scaled upper end " + std::to_string(hi) +
                            " is not above the lower end");
  }
  std::vector<double> out(static_cast<std::size_t>(spec.count));
  const double steps = spec.count > 1 ? static_cast<double>(spec.count - 1) : 1.0;
  for (int k = 0; k < spec.count; ++k) {
    double v = k == spec.count - 1 ? hi : lo + (hi - lo) * static_cast<double>(k) / steps;
    if (k == 0) v = lo;
    out[static_cast<std::size_t>(k)] = spec.kind == RangeKind::log10_exponent ? std::pow(10.0, v) : v;
  }
  return out;
}

Profile Profile::library() { return {true, 100, std::nullopt}; }
Profile Profile::paper() { return {false, 100, 45.0 * 60.0}; }

void ExperimentReport::merge(const ExperimentReport& other) {
  if (kind.empty()) kind = other.kind;
  summaries.insert(summaries.end(), other.summaries.begin(), other.summaries.end());
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  cells.insert(cells.end(), other.cells.begin(), other.cells.end());
}

std::vector<MethodSummary> summarize(const std::vector<SeedResult>& rows,
                                     const std::vector<Cell>& cells) {
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& r : rows) {
    const std::pair<std::string, std::string> key{r.method, r.dataset};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::vector<MethodSummary> out;
  for (const auto& [method, dataset] : keys) {
    MethodSummary s;
    s.method = method;
    s.dataset = dataset;
    std::vector<double> acc, nnz;
    for (const auto& r : rows) {
      if (r.method != method || r.dataset != dataset) continue;
      s.depth = r.depth;
      acc.push_back(r.test_acc);
      nnz.push_back(static_cast<double>(r.nnz));
      s.chosen_hps.push_back(r.chosen_hp);
    }
    for (const auto& c : cells) {
      if (c.method != method) continue;
      s.seconds += c.seconds;
      if (!c.ok) s.complete = false;
    }
    s.seeds = acc.size();
    s.mean_test_acc = mean(acc);
    s.std_test_acc = sample_std(acc);
    s.mean_nnz = mean(nnz);
    s.median_nnz = median(nnz);
    out.push_back(std::move(s));
  }
  return out;
}

ExperimentReport sweep(const data::BinaryDataset& data, const SweepOptions& options) {
  check_seeds(options.seeds, "sweep");
  const GridSpec grid = options.grid.value_or(default_grid(options.method));
  grid.validate();
  const bool ada = is_adaboost(options.method);
  master::FormulationParams params;
  if (!ada) {
    params.formulation = master::formulation_from_string(options.method);
    params.eps_stop = options.eps_stop;
    params.edge_aggregation = options.edge_aggregation;
  }

  std::vector<data::Split> splits;
  for (auto seed : options.seeds) {
    auto spec = options.fractions;
    spec.seed = seed;
    splits.push_back(data::split(data, spec));
  }
  std::vector<std::vector<double>> values;
  for (const auto& sp : splits) values.push_back(grid_values(grid, sp.train.size()));

  struct Job {
    std::size_t seed_index;
    double hp;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < splits.size(); ++s)
    for (double hp : values[s]) jobs.push_back({s, hp});

  std::vector<Outcome> outcomes(jobs.size());
  run_parallel(jobs.size(), options.workers, [&](std::size_t k) {
    const auto& job = jobs[k];
    const auto& sp = splits[job.seed_index];
    Outcome& out = outcomes[k];
    out.cell.method = options.method;
    out.cell.seed = options.seeds[job.seed_index];
    out.cell.hyperparameter = job.hp;
    const auto start = Clock::now();
    try {
      engine::TrainResult r;
      const engine::EvalSets eval{&sp.validation, &sp.test};
      if (ada) {
        engine::AdaBoostConfig cfg;
        cfg.rounds = options.profile.max_iterations;
        cfg.learning_rate = job.hp;
        cfg.learner = options.learner;
        cfg.seed = out.cell.seed;
        r = engine::adaboost_train(cfg, sp.train, eval);
      } else {
        engine::TrainConfig cfg;
        cfg.params = params;
        cfg.params.c = job.hp;
        cfg.learner = options.learner;
        cfg.epsilon = options.epsilon;
        cfg.max_iterations = options.profile.max_iterations;
        cfg.time_limit_seconds = options.profile.time_limit_seconds;
        cfg.early_stopping = options.profile.early_stopping;
        cfg.seed = out.cell.seed;
        cfg.solver.exec = Exec::serial;
        r = engine::train(cfg, sp.train, eval);
      }
      finish_cell(out.cell, r.model, sp);
      if (options.keep_traces) out.trace = std::move(r.trace);
    } catch (const std::exception& e) {
      out.cell.ok = false;
      out.cell.error = e.what();
    }
    out.cell.seconds = seconds_since(start);
  });

  ExperimentReport report;
  report.kind = "sweep";
  for (const auto& o : outcomes) {
    if (!o.cell.ok)
      log::warn(options.method + " seed " + std::to_string(o.cell.seed) + " hp " +
                std::to_string(o.cell.hyperparameter) + " failed: " + o.cell.error);
    report.cells.push_back(o.cell);
  }
  collect_winners(outcomes, options.method, options.dataset, options.learner.max_depth,
                  options.keep_traces, report);
  report.summaries = summarize(report.rows, report.cells);
  return report;
}

ExperimentReport reweight_experiment(const data::BinaryDataset& data,
                                     const ReweightOptions& options) {
  check_seeds(options.seeds, "reweight");
  if (options.formulations.empty()) throw ValidationError("reweight: no formulations given");
  if (options.pool_size < 1) throw ValidationError("reweight: pool size must be >= 1");

  const tree::LearnerSpec learner{tree::LearnerKind::greedy, options.depth, options.mode};
  std::vector<data::Split> splits;
  std::vector<engine::EnsembleModel> pools(options.seeds.size());
  std::vector<Outcome> baseline(options.seeds.size());
  for (auto seed : options.seeds) {
    auto spec = options.fractions;
    spec.seed = seed;
    splits.push_back(data::split(data, spec));
  }
  run_parallel(options.seeds.size(), options.workers, [&](std::size_t s) {
    Outcome& out = baseline[s];
    out.cell.method = engine::kAdaBoost;
    out.cell.seed = options.seeds[s];
    out.cell.hyperparameter = options.adaboost_learning_rate;
    const auto start = Clock::now();
    try {
      engine::AdaBoostConfig cfg;
      cfg.rounds = options.pool_size;
      cfg.learning_rate = options.adaboost_learning_rate;
      cfg.learner = learner;
      cfg.seed = options.seeds[s];
      pools[s] = engine::adaboost_train(cfg, splits[s].train).model;
      finish_cell(out.cell, pools[s], splits[s]);
    } catch (const std::exception& e) {
      out.cell.error = e.what();
    }
    out.cell.seconds = seconds_since(start);
  });

  struct Job {
    std::size_t seed_index;
    master::Formulation formulation;
    double hp;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < splits.size(); ++s) {
    if (!baseline[s].cell.ok) continue;
    for (auto f : options.formulations)
      for (double hp : grid_values(default_grid(master::to_string(f)), splits[s].train.size()))
        jobs.push_back({s, f, hp});
  }

  std::vector<Outcome> outcomes(jobs.size());
  run_parallel(jobs.size(), options.workers, [&](std::size_t k) {
    const auto& job = jobs[k];
    const auto& sp = splits[job.seed_index];
    Outcome& out = outcomes[k];
    out.cell.method = master::to_string(job.formulation);
    out.cell.seed = options.seeds[job.seed_index];
    out.cell.hyperparameter = job.hp;
    const auto start = Clock::now();
    try {
      master::FormulationParams params;
      params.formulation = job.formulation;
      params.c = job.hp;
      params.eps_stop = options.eps_stop;
      solver::SolverOptions so;
      so.exec = Exec::serial;
      const auto model = engine::reweight(pools[job.seed_index].hypotheses, sp.train, params, so);
      finish_cell(out.cell, model, sp);
    } catch (const std::exception& e) {
      out.cell.error = e.what();
    }
    out.cell.seconds = seconds_since(start);
  });

  ExperimentReport report;
  report.kind = "reweight";
  for (const auto& o : baseline) report.cells.push_back(o.cell);
  for (const auto& o : outcomes) report.cells.push_back(o.cell);
  collect_winners(baseline, engine::kAdaBoost, options.dataset, options.depth, false, report);
  for (auto f : options.formulations)
    collect_winners(outcomes, master::to_string(f), options.dataset, options.depth, false, report);
  report.summaries = summarize(report.rows, report.cells);
  return report;
}

nlohmann::json to_json(const ExperimentReport& report, bool with_timing) {
  nlohmann::json summaries = nlohmann::json::array(), rows = nlohmann::json::array(),
                 cells = nlohmann::json::array();
  for (const auto& s : report.summaries) {
    nlohmann::json j = {{"method", s.method},         {"dataset", s.dataset},
                        {"depth", s.depth},           {"seeds", s.seeds},
                        {"complete", s.complete},     {"mean_test_acc", s.mean_test_acc},
                        {"std_test_acc", s.std_test_acc}, {"mean_nnz", s.mean_nnz},
                        {"median_nnz", s.median_nnz}, {"chosen_hps", s.chosen_hps}};
    if (with_timing) j["seconds"] = s.seconds;
    summaries.push_back(std::move(j));
  }
  for (const auto& r : report.rows) {
    nlohmann::json j = {{"method", r.method},       {"dataset", r.dataset},
                        {"depth", r.depth},         {"seed", r.seed},
                        {"chosen_hp", r.chosen_hp}, {"val_acc", r.val_acc},
                        {"test_acc", r.test_acc},   {"nnz", r.nnz}};
    if (with_timing) j["seconds"] = r.seconds;
    rows.push_back(std::move(j));
  }
  for (const auto& c : report.cells) {
    nlohmann::json j = {{"method", c.method},     {"seed", c.seed},
                        {"hp", c.hyperparameter}, {"ok", c.ok},
                        {"val_acc", c.val_acc},   {"test_acc", c.test_acc},
                        {"nnz", c.nnz},           {"iterations", c.iterations},
                        {"termination", c.termination}};
    if (!c.error.empty()) j["error"] = c.error;
    if (with_timing) j["seconds"] = c.seconds;
    cells.push_back(std::move(j));
  }
  return {{"kind", report.kind}, {"summaries", summaries}, {"rows", rows}, {"cells", cells}};
}

ExperimentReport report_from_json(const nlohmann::json& j) {
  try {
    ExperimentReport report;
    report.kind = j.value("kind", "");
    for (const auto& r : j.at("rows")) {
      SeedResult row;
      row.method = r.at("method").get<std::string>();
      row.dataset = r.at("dataset").get<std::string>();
      row.depth = r.at("depth").get<int>();
      row.seed = r.at("seed").get<std::uint64_t>();
      row.chosen_hp = r.at("chosen_hp").get<double>();
      row.val_acc = r.at("val_acc").get<double>();
      row.test_acc = r.at("test_acc").get<double>();
      row.nnz = r.at("nnz").get<std::size_t>();
      row.seconds = r.value("seconds", 0.0);
      report.rows.push_back(std::move(row));
    }
    for (const auto& c : j.value("cells", nlohmann::json::array())) {
      Cell cell;
      cell.method = c.at("method").get<std::string>();
      cell.seed = c.at("seed").get<std::uint64_t>();
      cell.hyperparameter = c.at("hp").get<double>();
      cell.ok = c.at("ok").get<bool>();
      cell.error = c.value("error", "");
      cell.val_acc = c.value("val_acc", 0.0);
      cell.test_acc = c.value("test_acc", 0.0);
      cell.nnz = c.value("nnz", std::size_t{0});
      cell.iterations = c.value("iterations", 0);
      cell.termination = c.value("termination", "");
      cell.seconds = c.value("seconds", 0.0);
      report.cells.push_back(std::move(cell));
    }
    report.summaries = summarize(report.rows, report.cells);
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("report: malformed JSON: ") + e.what());
  }
}

void write_report_csv(const ExperimentReport& report, std::ostream& out) {
  out.precision(17);
  out << kReportHeader << '\n';
  for (const auto& r : report.rows)
    out << r.method << ',' << r.dataset << ',' << r.depth << ',' << r.seed << ',' << r.chosen_hp
        << ',' << r.val_acc << ',' << r.test_acc << ',' << r.nnz << ',' << r.seconds << '\n';
}

void write_report_csv(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  write_report_csv(report, out);
}

}  // namespace tcboost::harness
