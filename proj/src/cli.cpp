#include "tcboost/cli.hpp"

#include <unistd.h>

#include <Eigen/Core>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "tcboost/dataset.hpp"
#include "tcboost/engine.hpp"
#include "tcboost/error.hpp"
#include "tcboost/harness.hpp"
#include "tcboost/log.hpp"
#include "tcboost/metrics.hpp"

namespace fs = std::filesystem;

namespace tcboost::cli {

namespace {

template <class T>
void put_optional(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <class T>
void get(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <class T>
void get(const nlohmann::json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null())
    out.reset();
  else
    out = j.at(key).get<T>();
}

struct Loaded {
  data::BinaryDataset data;
  std::string name;
  std::vector<data::BinarizeWarning> warnings;
};

data::RawDataset generate(const std::string& spec, std::uint64_t seed, std::string& name) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ValidationError("--gen expects NAME:N, e.g. twonorm:2000");
  name = spec.substr(0, colon);
  std::size_t n = 0;
  try {
    n = std::stoul(spec.substr(colon + 1));
  } catch (const std::exception&) {
    throw ValidationError("--gen: bad example count in '" + spec + "'");
  }
  if (n == 0) throw ValidationError("--gen: example count must be >= 1");
  if (name == "twonorm") return data::gen_twonorm(n, seed);
  if (name == "ringnorm") return data::gen_ringnorm(n, seed);
  throw ValidationError("unknown generator '" + name + "' (valid: twonorm, ringnorm)");
}

Loaded load_data(const CliConfig& cfg) {
  if (cfg.data.empty() == cfg.gen.empty())
    throw ValidationError("give exactly one of --data and --gen");
  if (cfg.bins < 1) throw ValidationError("--bins must be >= 1");
  Loaded out;
  data::RawDataset raw;
  if (!cfg.gen.empty()) {
    raw = generate(cfg.gen, cfg.gen_seed, out.name);
  } else {
    data::CsvSchema schema;
    schema.label = cfg.label;
    if (!cfg.positive.empty()) schema.positive_label = cfg.positive;
    for (const auto& c : cfg.categorical) schema.kinds[c] = data::ColumnKind::categorical;
    raw = data::load_csv(cfg.data, schema);
    out.name = fs::path(cfg.data).stem().string();
  }
  out.data = data::to_binary(raw, cfg.bins, &out.warnings);
  for (const auto& w : out.warnings) log::warn(w.column + ": " + w.message);
  return out;
}

harness::Profile resolve_profile(CliConfig& cfg) {
  harness::Profile p;
  if (cfg.profile == "library")
    p = harness::Profile::library();
  else if (cfg.profile == "paper")
    p = harness::Profile::paper();
  else
    throw ValidationError("unknown profile '" + cfg.profile + "' (valid: library, paper)");
  if (cfg.max_iters) p.max_iterations = *cfg.max_iters;
  if (cfg.time_limit) p.time_limit_seconds = *cfg.time_limit;
  if (cfg.early_stopping) p.early_stopping = *cfg.early_stopping;
  cfg.max_iters = p.max_iterations;
  cfg.time_limit = p.time_limit_seconds;
  cfg.early_stopping = p.early_stopping;
  if (p.max_iterations < 1) throw ValidationError("--max-iters must be >= 1");
  return p;
}

tree::LearnerSpec learner_spec(const CliConfig& cfg) {
  tree::LearnerSpec spec;
  spec.kind = tree::learner_from_string(cfg.learner);
  spec.max_depth = cfg.depth;
  spec.mode = tree::voting_mode_from_string(cfg.mode);
  return spec;
}

/// Output files are created under one directory and never overwrite inputs.
class Outputs {
public:
  Outputs(const std::string& dir, std::vector<std::string> inputs) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_) || ::access(dir_.c_str(), W_OK) != 0)
      throw ValidationError("output directory '" + dir + "' is not writable");
    for (auto& in : inputs)
      if (!in.empty() && fs::exists(in)) inputs_.push_back(fs::canonical(in));
  }

  std::string path(const std::string& name) {
    const fs::path p = dir_ / name;
    fs::create_directories(p.parent_path());
    for (const auto& in : inputs_)
      if (fs::exists(p) && fs::equivalent(p, in))
        throw ValidationError("refusing to overwrite input file " + in.string());
    written_.push_back(p.string());
    return p.string();
  }

  const std::vector<std::string>& written() const { return written_; }

private:
  fs::path dir_;
  std::vector<fs::path> inputs_;
  std::vector<std::string> written_;
};

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << '\n';
}

void write_run_json(const CliConfig& cfg, Outputs& out, const nlohmann::json& extra = {}) {
  const std::string path = out.path("run.json");
  nlohmann::json j = {{"command", cfg.command},
                      {"config", to_json(cfg)},
                      {"version", kVersion},
                      {"libraries",
                       {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                      std::to_string(EIGEN_MINOR_VERSION)},
                        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                        {"cli11", CLI11_VERSION}}},
                      {"compiler", __VERSION__},
                      {"outputs", out.written()}};
  if (!extra.is_null()) j["result"] = extra;
  write_json(j, path);
}

int cmd_gen(CliConfig& cfg) {
  if (cfg.gen.empty()) throw ValidationError("gen: give --twonorm N or --ringnorm N");
  Outputs out(cfg.output, {});
  std::string name;
  const auto raw = generate(cfg.gen, cfg.gen_seed, name);
  data::write_csv(raw, out.path(name + ".csv"));
  write_run_json(cfg, out, {{"rows", raw.rows()}, {"columns", raw.columns.size()}});
  return 0;
}

int cmd_prep(CliConfig& cfg) {
  Outputs out(cfg.output, {cfg.data});
  const auto loaded = load_data(cfg);
  data::write_csv(loaded.data, out.path(loaded.name + "_binary.csv"));
  nlohmann::json warnings = nlohmann::json::array();
  for (const auto& w : loaded.warnings) warnings.push_back({{"column", w.column}, {"message", w.message}});
  write_run_json(cfg, out,
                 {{"rows", loaded.data.size()},
                  {"features", loaded.data.features()},
                  {"warnings", warnings}});
  return 0;
}

int cmd_train(CliConfig& cfg) {
  Outputs out(cfg.output, {cfg.data});
  const auto profile = resolve_profile(cfg);
  const auto loaded = load_data(cfg);
  data::SplitSpec spec;
  spec.seed = cfg.seeds.at(0);
  const auto sp = data::split(loaded.data, spec);
  const engine::EvalSets eval{&sp.validation, &sp.test};

  engine::TrainResult result;
  if (cfg.formulation == engine::kAdaBoost) {
    engine::AdaBoostConfig ac;
    ac.rounds = profile.max_iterations;
    ac.learning_rate = cfg.c;
    ac.learner = learner_spec(cfg);
    ac.seed = spec.seed;
    result = engine::adaboost_train(ac, sp.train, eval);
  } else {
    engine::TrainConfig tc;
    tc.params.formulation = master::formulation_from_string(cfg.formulation);
    tc.params.c = cfg.c;
    tc.params.eps_stop = cfg.eps_stop;
    tc.params.edge_aggregation = master::edge_aggregation_from_string(cfg.edge_aggregation);
    tc.params.md_full_a = cfg.md_full_a;
    tc.learner = learner_spec(cfg);
    tc.epsilon = cfg.epsilon;
    tc.max_iterations = profile.max_iterations;
    tc.time_limit_seconds = profile.time_limit_seconds;
    tc.early_stopping = profile.early_stopping;
    tc.seed = spec.seed;
    result = engine::train(tc, sp.train, eval);
  }
  engine::save_model(result.model, out.path("model.json"));
  engine::write_trace_csv(result.trace, out.path("trace.csv"));
  const nlohmann::json summary = {
      {"train_acc", metrics::accuracy(result.model, sp.train)},
      {"val_acc", metrics::accuracy(result.model, sp.validation)},
      {"test_acc", metrics::accuracy(result.model, sp.test)},
      {"nnz", metrics::sparsity(result.model)},
      {"iterations", result.model.metadata.iterations},
      {"termination", engine::to_string(result.model.metadata.termination)}};
  log::info("train: " + summary.dump());
  write_run_json(cfg, out, summary);
  return 0;
}

int cmd_sweep(CliConfig& cfg) {
  Outputs out(cfg.output, {cfg.data});
  const auto profile = resolve_profile(cfg);
  if (cfg.methods.empty()) cfg.methods = {cfg.formulation};
  const auto loaded = load_data(cfg);
  harness::ExperimentReport report;
  for (const auto& method : cfg.methods) {
    harness::SweepOptions so;
    so.method = method;
    so.dataset = loaded.name;
    so.learner = learner_spec(cfg);
    if (cfg.grid_kind || cfg.grid_lower || cfg.grid_upper || cfg.grid_count) {
      auto g = harness::default_grid(method);
      if (cfg.grid_kind) g.kind = harness::range_kind_from_string(*cfg.grid_kind);
      if (cfg.grid_lower) g.lower = *cfg.grid_lower;
      if (cfg.grid_upper) g.upper = *cfg.grid_upper;
      if (cfg.grid_count) g.count = *cfg.grid_count;
      so.grid = g;
    }
    so.seeds = cfg.seeds;
    so.profile = profile;
    so.epsilon = cfg.epsilon;
    so.eps_stop = cfg.eps_stop;
    so.edge_aggregation = master::edge_aggregation_from_string(cfg.edge_aggregation);
    so.workers = cfg.workers;
    so.keep_traces = cfg.traces;
    report.merge(harness::sweep(loaded.data, so));
    log::info("sweep: finished " + method);
  }
  report.kind = "sweep";
  report.summaries = harness::summarize(report.rows, report.cells);
  write_json(harness::to_json(report), out.path("report.json"));
  harness::write_report_csv(report, out.path("report.csv"));
  if (cfg.traces)
    for (const auto& r : report.rows)
      engine::write_trace_csv(
          r.trace, out.path("traces/" + r.method + "_seed" + std::to_string(r.seed) + ".csv"));
  write_run_json(cfg, out, harness::to_json(report)["summaries"]);
  return 0;
}

int cmd_reweight(CliConfig& cfg) {
  Outputs out(cfg.output, {cfg.data});
  const auto loaded = load_data(cfg);
  harness::ReweightOptions ro;
  ro.dataset = loaded.name;
  ro.depth = cfg.depth;
  ro.formulations.clear();
  for (const auto& f : cfg.formulations) ro.formulations.push_back(master::formulation_from_string(f));
  ro.seeds = cfg.seeds;
  ro.pool_size = cfg.pool_size;
  ro.adaboost_learning_rate = cfg.adaboost_lr;
  ro.mode = tree::voting_mode_from_string(cfg.mode);
  ro.eps_stop = cfg.eps_stop;
  ro.workers = cfg.workers;
  const auto report = harness::reweight_experiment(loaded.data, ro);
  write_json(harness::to_json(report), out.path("report.json"));
  harness::write_report_csv(report, out.path("report.csv"));
  write_run_json(cfg, out, harness::to_json(report)["summaries"]);
  return 0;
}

int cmd_margins(CliConfig& cfg) {
  if (cfg.model.empty()) throw ValidationError("margins: --model is required");
  Outputs out(cfg.output, {cfg.data, cfg.model});
  const auto model = engine::load_model(cfg.model);
  const auto loaded = load_data(cfg);
  data::BinaryDataset subset;
  if (cfg.split == "all") {
    subset = loaded.data;
  } else {
    data::SplitSpec spec;
    spec.seed = cfg.seeds.at(0);
    auto sp = data::split(loaded.data, spec);
    if (cfg.split == "train")
      subset = std::move(sp.train);
    else if (cfg.split == "validation")
      subset = std::move(sp.validation);
    else if (cfg.split == "test")
      subset = std::move(sp.test);
    else
      throw ValidationError("unknown split '" + cfg.split + "' (valid: train, validation, test, all)");
  }
  const auto rho = metrics::margins(model, subset);
  metrics::write_cdf_csv(metrics::margin_cdf(rho), out.path("margins_cdf.csv"));
  write_run_json(cfg, out,
                 {{"examples", rho.size()},
                  {"min_margin", *std::min_element(rho.begin(), rho.end())},
                  {"accuracy", metrics::accuracy(model, subset)}});
  return 0;
}

int cmd_report(CliConfig& cfg) {
  if (cfg.inputs.empty()) throw ValidationError("report: give one or more --inputs");
  Outputs out(cfg.output, cfg.inputs);
  harness::ExperimentReport merged;
  for (const auto& path : cfg.inputs) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path + ": " + e.what());
    }
    merged.merge(harness::report_from_json(j));
  }
  merged.summaries = harness::summarize(merged.rows, merged.cells);
  write_json(harness::to_json(merged), out.path("report.json"));
  harness::write_report_csv(merged, out.path("report.csv"));
  {
    std::ofstream s(out.path("summary.csv"));
    s.precision(17);
    s << "method,dataset,depth,seeds,complete,mean_test_acc,std_test_acc,mean_nnz,median_nnz\n";
    for (const auto& m : merged.summaries)
      s << m.method << ',' << m.dataset << ',' << m.depth << ',' << m.seeds << ','
        << (m.complete ? 1 : 0) << ',' << m.mean_test_acc << ',' << m.std_test_acc << ','
        << m.mean_nnz << ',' << m.median_nnz << '\n';
  }
  write_run_json(cfg, out, harness::to_json(merged)["summaries"]);
  return 0;
}

/// The value following --config, if any.
std::optional<std::string> find_config(const std::vector<std::string>& args) {
  for (std::size_t k = 1; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) return args[k + 1];
    if (args[k].rfind("--config=", 0) == 0) return args[k].substr(9);
  }
  return std::nullopt;
}

void add_source(CLI::App* app, CliConfig& cfg) {
  app->add_option("--data", cfg.data, "CSV file (binary 0/1 features are used as-is)");
  app->add_option("--gen", cfg.gen, "generator spec NAME:N, e.g. twonorm:2000");
  app->add_option("--gen-seed", cfg.gen_seed, "generator seed");
  app->add_option("--label", cfg.label, "label column name");
  app->add_option("--positive", cfg.positive, "raw label mapped to +1");
  app->add_option("--categorical", cfg.categorical, "columns to treat as categorical");
  app->add_option("--bins", cfg.bins, "quantile bins per numeric column");
}

void add_learner(CLI::App* app, CliConfig& cfg) {
  app->add_option("--depth", cfg.depth, "tree depth");
  app->add_option("--mode", cfg.mode, "hard or confidence");
  app->add_option("--learner", cfg.learner, "greedy, optimal_stump or optimal_d2");
}

void add_training(CLI::App* app, CliConfig& cfg) {
  app->add_option("--C", cfg.c, "formulation hyperparameter (learning rate for adaboost)");
  app->add_option("--epsilon", cfg.epsilon, "pricing tolerance");
  app->add_option("--max-iters", cfg.max_iters, "iteration limit");
  app->add_option("--time-limit", cfg.time_limit, "wall-clock limit in seconds");
  app->add_option("--early-stopping", cfg.early_stopping, "stop on a certificate");
  app->add_option("--eps-stop", cfg.eps_stop, "ERLP/QRLP accuracy parameter");
  app->add_option("--edge-aggregation", cfg.edge_aggregation, "ERLP/QRLP edge bound: max or sum");
  app->add_option("--profile", cfg.profile, "library or paper");
}

}  // namespace

nlohmann::json to_json(const CliConfig& cfg) {
  nlohmann::json j = {{"command", cfg.command},
                      {"data", cfg.data},
                      {"gen", cfg.gen},
                      {"gen_seed", cfg.gen_seed},
                      {"label", cfg.label},
                      {"positive", cfg.positive},
                      {"categorical", cfg.categorical},
                      {"bins", cfg.bins},
                      {"formulation", cfg.formulation},
                      {"C", cfg.c},
                      {"depth", cfg.depth},
                      {"mode", cfg.mode},
                      {"learner", cfg.learner},
                      {"epsilon", cfg.epsilon},
                      {"eps_stop", cfg.eps_stop},
                      {"edge_aggregation", cfg.edge_aggregation},
                      {"md_full_a", cfg.md_full_a},
                      {"seeds", cfg.seeds},
                      {"profile", cfg.profile},
                      {"output", cfg.output},
                      {"methods", cfg.methods},
                      {"workers", cfg.workers},
                      {"traces", cfg.traces},
                      {"formulations", cfg.formulations},
                      {"pool_size", cfg.pool_size},
                      {"adaboost_lr", cfg.adaboost_lr},
                      {"model", cfg.model},
                      {"split", cfg.split},
                      {"inputs", cfg.inputs}};
  put_optional(j, "max_iters", cfg.max_iters);
  put_optional(j, "time_limit", cfg.time_limit);
  put_optional(j, "early_stopping", cfg.early_stopping);
  put_optional(j, "grid_kind", cfg.grid_kind);
  put_optional(j, "grid_lower", cfg.grid_lower);
  put_optional(j, "grid_upper", cfg.grid_upper);
  put_optional(j, "grid_count", cfg.grid_count);
  return j;
}

CliConfig config_from_json(const nlohmann::json& j, CliConfig base) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  try {
    get(j, "command", base.command);
    get(j, "data", base.data);
    get(j, "gen", base.gen);
    get(j, "gen_seed", base.gen_seed);
    get(j, "label", base.label);
    get(j, "positive", base.positive);
    get(j, "categorical", base.categorical);
    get(j, "bins", base.bins);
    get(j, "formulation", base.formulation);
    get(j, "C", base.c);
    get(j, "depth", base.depth);
    get(j, "mode", base.mode);
    get(j, "learner", base.learner);
    get(j, "epsilon", base.epsilon);
    get(j, "max_iters", base.max_iters);
    get(j, "time_limit", base.time_limit);
    get(j, "early_stopping", base.early_stopping);
    get(j, "eps_stop", base.eps_stop);
    get(j, "edge_aggregation", base.edge_aggregation);
    get(j, "md_full_a", base.md_full_a);
    get(j, "seeds", base.seeds);
    get(j, "profile", base.profile);
    get(j, "output", base.output);
    get(j, "methods", base.methods);
    get(j, "grid_kind", base.grid_kind);
    get(j, "grid_lower", base.grid_lower);
    get(j, "grid_upper", base.grid_upper);
    get(j, "grid_count", base.grid_count);
    get(j, "workers", base.workers);
    get(j, "traces", base.traces);
    get(j, "formulations", base.formulations);
    get(j, "pool_size", base.pool_size);
    get(j, "adaboost_lr", base.adaboost_lr);
    get(j, "model", base.model);
    get(j, "split", base.split);
    get(j, "inputs", base.inputs);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return base;
}

int run(const std::vector<std::string>& input) {
  std::vector<std::string> args = input.empty() ? std::vector<std::string>{"tcboost"} : input;
  CliConfig cfg;
  try {
    if (const auto path = find_config(args)) {
      std::ifstream in(*path);
      if (!in) throw ValidationError("cannot read config " + *path);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config " + *path + ": " + e.what());
      }
      // A run.json carries the resolved config under "config".
      cfg = config_from_json(j.contains("config") ? j.at("config") : j);
      if (args.size() > 1 && args[1].rfind("-", 0) == 0 && !cfg.command.empty())
        args.insert(args.begin() + 1, cfg.command);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  CLI::App app{"Totally corrective boosting with column generation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  std::string config_path;
  bool verbose = false, quiet = false;
  app.add_option("--config", config_path, "JSON config; flags override its values");
  app.add_flag("-v,--verbose", verbose, "progress messages");
  app.add_flag("-q,--quiet", quiet, "errors only");

  auto* gen = app.add_subcommand("gen", "write a synthetic dataset as CSV");
  std::size_t twonorm = 0, ringnorm = 0;
  gen->add_option("--twonorm", twonorm, "twonorm example count");
  gen->add_option("--ringnorm", ringnorm, "ringnorm example count");
  gen->add_option("--seed", cfg.gen_seed, "generator seed");
  gen->add_option("-o,--output", cfg.output, "output directory");

  auto* prep = app.add_subcommand("prep", "binarize a CSV file");
  add_source(prep, cfg);
  prep->add_option("-o,--output", cfg.output, "output directory");

  auto* train = app.add_subcommand("train", "train one model");
  add_source(train, cfg);
  add_learner(train, cfg);
  add_training(train, cfg);
  train->add_option("--formulation", cfg.formulation, "master formulation or adaboost");
  train->add_option("--md-full-a", cfg.md_full_a, "MD-Boost: exact centring matrix");
  train->add_option("--seed", cfg.seeds, "split seed")->expected(1);
  train->add_option("-o,--output", cfg.output, "output directory");

  auto* sw = app.add_subcommand("sweep", "hyperparameter sweep over seeds");
  add_source(sw, cfg);
  add_learner(sw, cfg);
  add_training(sw, cfg);
  sw->add_option("--method,--formulation", cfg.methods, "methods to sweep");
  sw->add_option("--grid-kind", cfg.grid_kind, "log10_exponent, linear or linear_scaled_by_M");
  sw->add_option("--grid-lower", cfg.grid_lower, "grid lower end");
  sw->add_option("--grid-upper", cfg.grid_upper, "grid upper end");
  sw->add_option("--grid-count", cfg.grid_count, "grid size");
  sw->add_option("--seeds,--seed", cfg.seeds, "split seeds");
  sw->add_option("--workers", cfg.workers, "concurrent grid cells");
  sw->add_flag("--traces", cfg.traces, "write the winner's trace per seed");
  sw->add_option("-o,--output", cfg.output, "output directory");

  auto* rw = app.add_subcommand("reweight", "reweight an AdaBoost pool with master formulations");
  add_source(rw, cfg);
  rw->add_option("--depth", cfg.depth, "tree depth");
  rw->add_option("--mode", cfg.mode, "hard or confidence");
  rw->add_option("--formulations", cfg.formulations, "formulations to apply");
  rw->add_option("--pool-size", cfg.pool_size, "AdaBoost rounds");
  rw->add_option("--adaboost-lr", cfg.adaboost_lr, "AdaBoost learning rate");
  rw->add_option("--eps-stop", cfg.eps_stop, "ERLP/QRLP accuracy parameter");
  rw->add_option("--seeds,--seed", cfg.seeds, "split seeds");
  rw->add_option("--workers", cfg.workers, "concurrent grid cells");
  rw->add_option("-o,--output", cfg.output, "output directory");

  auto* mg = app.add_subcommand("margins", "export the margin CDF of a model");
  add_source(mg, cfg);
  mg->add_option("--model", cfg.model, "model.json");
  mg->add_option("--split", cfg.split, "train, validation, test or all");
  mg->add_option("--seed", cfg.seeds, "split seed")->expected(1);
  mg->add_option("-o,--output", cfg.output, "output directory");

  auto* rp = app.add_subcommand("report", "merge report.json files");
  rp->add_option("--inputs", cfg.inputs, "report.json files");
  rp->add_option("-o,--output", cfg.output, "output directory");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  log::set_level(quiet ? log::Level::quiet : verbose ? log::Level::info : log::Level::warn);
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    if (cfg.command == "gen") {
      if ((twonorm > 0) && (ringnorm > 0))
        throw ValidationError("gen: give only one of --twonorm and --ringnorm");
      if (twonorm > 0) cfg.gen = "twonorm:" + std::to_string(twonorm);
      if (ringnorm > 0) cfg.gen = "ringnorm:" + std::to_string(ringnorm);
      cfg.data.clear();
      return cmd_gen(cfg);
    }
    if (cfg.command == "prep") return cmd_prep(cfg);
    if (cfg.command == "train") return cmd_train(cfg);
    if (cfg.command == "sweep") return cmd_sweep(cfg);
    if (cfg.command == "reweight") return cmd_reweight(cfg);
    if (cfg.command == "margins") return cmd_margins(cfg);
    if (cfg.command == "report") return cmd_report(cfg);
    throw ValidationError("unknown command " + cfg.command);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return 2;
  }
}

int run(int argc, const char* const* argv) {
  return run(std::vector<std::string>(argv, argv + argc));
}

}  // namespace tcboost::cli
