#include "molrel/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include "molrel/bayes/gnn_objective.hpp"
#include "molrel/bayes/marginalize.hpp"
#include "molrel/bayes/train.hpp"
#include "molrel/chem/featurize.hpp"
#include "molrel/chem/smiles.hpp"
#include "molrel/chem/split.hpp"
#include "molrel/core/csv.hpp"
#include "molrel/core/digest.hpp"
#include "molrel/core/error.hpp"
#include "molrel/metrics/metrics.hpp"
#include "CLI11.hpp"

namespace molrel::cli {
namespace {

std::atomic<bool> g_quiet{false};
std::mutex g_log_mutex;

void log_line(const std::string& line) {
  if (g_quiet) return;
  std::lock_guard lock(g_log_mutex);
  std::cerr << line << '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("error writing " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError(path.string() + " is not valid JSON");
  return j;
}

std::string digest_comment(const std::string& digest) { return "# config_digest: " + digest + "\n"; }

std::string svg_with_digest(const std::string& svg, const std::string& digest) {
  const auto close = svg.find('>');
  return svg.substr(0, close + 1) + "\n<!-- config_digest: " + digest + " -->" + svg.substr(close + 1);
}

std::string seed_dir(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

std::string member_file(std::size_t m) { return "member_" + std::to_string(m) + ".post"; }

struct LoadedData {
  chem::LabeledDataset dataset;
  chem::LoadReport report;
  std::string digest;
};

LoadedData load_data(const RunConfig& config) {
  LoadedData d;
  d.dataset = chem::load_dataset(config.dataset.path, config.dataset.spec(), &d.report);
  d.digest = config_digest(config);
  log_line("loaded " + std::to_string(d.dataset.size()) + " molecules from " + config.dataset.path.string() + " (" +
           std::to_string(d.report.dropped_unparseable) + " unparseable, " + std::to_string(d.report.dropped_unlabeled) +
           " unlabelled rows dropped)");
  return d;
}

gnn::ModelConfig model_for(const RunConfig& config, const LoadedData& data) {
  gnn::ModelConfig m = config.model;
  m.tasks = data.dataset.task_count();
  m.validate();
  return m;
}

/// Identifies what a split depends on: dataset bytes and columns plus ratios.
std::string split_digest(const RunConfig& config) {
  RunConfig key;
  key.dataset = config.dataset;
  key.split_ratios = config.split_ratios;
  return config_digest(key);
}

nlohmann::json manifest_json(const chem::ScaffoldSplit& split, const std::string& config_digest_hex,
                             const std::string& split_key) {
  nlohmann::json j = chem::split_manifest(split);
  j["config_digest"] = config_digest_hex;
  j["split_digest"] = split_key;
  return j;
}

/// Reads the seed's manifest when it matches the dataset and ratios, otherwise computes and writes it.
chem::ScaffoldSplit obtain_split(const RunConfig& config, const LoadedData& data, std::uint64_t seed) {
  const auto path = split_manifest_path(config, seed);
  const std::string key = split_digest(config);
  if (std::filesystem::exists(path)) {
    const nlohmann::json j = read_json(path);
    if (j.value("split_digest", std::string()) == key) {
      chem::ScaffoldSplit s = chem::split_from_manifest(j);
      if (s.keys.size() != data.dataset.size()) throw DataError(path.string() + ": manifest size does not match the dataset");
      return s;
    }
    log_line("split manifest " + path.string() + " is for other data or ratios; regenerating");
  }
  chem::ScaffoldSplit s = chem::scaffold_split(data.dataset, config.split_ratios, seed);
  write_json(path, manifest_json(s, data.digest, key));
  return s;
}

std::vector<std::int8_t> flat_labels(const bayes::GraphSet& set) {
  std::vector<std::int8_t> out;
  out.reserve(set.size() * set.tasks);
  for (const auto& row : set.labels) out.insert(out.end(), row.begin(), row.end());
  return out;
}

std::vector<double> probabilities(const std::vector<double>& logits) {
  std::vector<double> p(logits.size());
  std::transform(logits.begin(), logits.end(), p.begin(), bayes::sigmoid);
  return p;
}

struct SeedData {
  std::uint64_t seed = 0;
  chem::ScaffoldSplit split;
  bayes::GraphSet train, valid, test;
};

SeedData prepare_seed(const RunConfig& config, const LoadedData& data, std::uint64_t seed) {
  SeedData s;
  s.seed = seed;
  s.split = obtain_split(config, data, seed);
  s.train = bayes::make_graph_set(data.dataset, s.split.train);
  s.valid = bayes::make_graph_set(data.dataset, s.split.valid);
  s.test = bayes::make_graph_set(data.dataset, s.split.test);
  return s;
}

std::size_t member_count(const RunConfig& config, bayes::Mode mode) {
  return mode == bayes::Mode::kEnsemble ? config.schedule.ensemble_size : config.members;
}

std::string message_of(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& err) {
    return err.what();
  } catch (...) {
    return "unknown error";
  }
}

/// Rethrows `e` with `context` prefixed, keeping its exit-code class.
[[noreturn]] void rethrow_with_context(const std::exception_ptr& e, const std::string& context) {
  try {
    std::rethrow_exception(e);
  } catch (const NumericError& x) {
    throw NumericError(context + ": " + x.what());
  } catch (const ConfigError& x) {
    throw ConfigError(context + ": " + x.what());
  } catch (const DataError& x) {
    throw DataError(context + ": " + x.what());
  } catch (const Error& x) {
    throw Error(context + ": " + x.what());
  }
}

std::optional<double> json_number(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  return std::nullopt;
}

}  // namespace

void set_quiet(bool quiet) { g_quiet = quiet; }

std::vector<std::exception_ptr> run_pool(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> errors(n);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return errors;
}

std::filesystem::path split_manifest_path(const RunConfig& config, std::uint64_t seed) {
  return config.out / "split" / (seed_dir(seed) + ".json");
}

std::filesystem::path run_directory(const RunConfig& config, bayes::Mode mode, std::uint64_t seed) {
  return config.out / std::string(bayes::mode_name(mode)) / seed_dir(seed);
}

nlohmann::json cmd_split(const RunConfig& config) {
  config.validate();
  const LoadedData data = load_data(config);
  nlohmann::json seeds = nlohmann::json::array();
  const std::string key = split_digest(config);
  for (std::uint64_t seed : config.seeds) {
    const chem::ScaffoldSplit s = chem::scaffold_split(data.dataset, config.split_ratios, seed);
    write_json(split_manifest_path(config, seed), manifest_json(s, data.digest, key));
    std::map<std::string, int> groups;
    for (const auto& k : s.keys) ++groups[k];
    seeds.push_back({{"seed", seed},
                     {"train", s.train.size()},
                     {"valid", s.valid.size()},
                     {"test", s.test.size()},
                     {"quotas", s.quotas},
                     {"scaffolds", groups.size()},
                     {"warnings", s.warnings}});
    log_line("seed " + std::to_string(seed) + ": train " + std::to_string(s.train.size()) + ", valid " +
             std::to_string(s.valid.size()) + ", test " + std::to_string(s.test.size()) + " (" +
             std::to_string(groups.size()) + " scaffolds, " + std::to_string(s.warnings.size()) + " warnings)");
  }
  const nlohmann::json summary = {{"config_digest", data.digest},
                                  {"dataset", data.dataset.name},
                                  {"molecules", data.dataset.size()},
                                  {"ratios", config.split_ratios},
                                  {"seeds", seeds}};
  write_json(config.out / "split" / "summary.json", summary);
  return summary;
}

nlohmann::json cmd_train(const RunConfig& config) {
  config.validate();
  const LoadedData data = load_data(config);
  const gnn::ModelConfig model_config = model_for(config, data);
  const gnn::GnnModel model(model_config);
  nlohmann::json resolved = config_to_json(config);
  resolved["model"] = model_config;
  write_json(config.out / "config.json", {{"config", resolved}, {"config_digest", data.digest}});

  std::vector<SeedData> seeds;
  for (std::uint64_t seed : config.seeds) seeds.push_back(prepare_seed(config, data, seed));

  struct Job {
    std::size_t seed_index;
    bayes::Mode mode;
    std::size_t member;
  };
  std::vector<Job> jobs;
  for (std::size_t si = 0; si < seeds.size(); ++si)
    for (bayes::Mode mode : config.modes)
      for (std::size_t m = 0; m < member_count(config, mode); ++m) jobs.push_back({si, mode, m});

  const auto errors = run_pool(jobs.size(), config.workers, [&](std::size_t j) {
    const Job& job = jobs[j];
    const SeedData& sd = seeds[job.seed_index];
    const std::string tag = std::string(bayes::mode_name(job.mode)) + " seed " + std::to_string(sd.seed) + " member " +
                            std::to_string(job.member);
    log_line("[" + tag + "] training on " + std::to_string(sd.train.size()) + " molecules");
    const bayes::GnnObjective objective(model, sd.train);
    const bayes::GnnPredictor valid(model, sd.valid);
    const std::vector<std::int8_t> valid_labels = flat_labels(sd.valid);
    const bayes::Validator validate = [&](std::span<const double> w) {
      if (sd.valid.size() == 0) return std::numeric_limits<double>::quiet_NaN();
      const std::vector<double> logits = valid.logits(w, {});
      for (double z : logits)
        if (!std::isfinite(z)) throw NumericError("non-finite validation logits");
      const auto records = metrics::make_records(probabilities(logits), valid_labels, sd.valid.tasks);
      if (records.empty()) return std::numeric_limits<double>::quiet_NaN();
      const auto m = metrics::evaluate(records, sd.valid.tasks);
      return m.auroc.value_or(std::numeric_limits<double>::quiet_NaN());
    };
    const bayes::RunSeed run{sd.seed, job.member};
    const bayes::Mode train_mode = job.mode == bayes::Mode::kEnsemble ? bayes::Mode::kNone : job.mode;
    bayes::TrainResult result = bayes::train(train_mode, objective, config.schedule, run, validate);
    result.posterior.meta = {{"config_digest", data.digest},
                             {"seed", sd.seed},
                             {"member", job.member},
                             {"mode", bayes::mode_name(job.mode)},
                             {"model", model_config}};
    const auto dir = run_directory(config, job.mode, sd.seed);
    std::filesystem::create_directories(dir);
    bayes::save_posterior(dir / member_file(job.member), result.posterior);
    write_json(dir / ("train_log_" + std::to_string(job.member) + ".json"),
               {{"config_digest", data.digest},
                {"seed", sd.seed},
                {"mode", bayes::mode_name(job.mode)},
                {"member", job.member},
                {"valid_metric", "auroc"},
                {"log", bayes::to_json(result.logs.front())}});
    const auto& last = result.logs.front().epochs.back();
    std::ostringstream os;
    os << "[" << tag << "] done: final train loss " << std::setprecision(4) << last.train_loss;
    if (last.valid_metric && std::isfinite(*last.valid_metric)) os << ", valid AUROC " << *last.valid_metric;
    log_line(os.str());
  });

  // Indexes and failure handling, single-threaded.
  nlohmann::json runs = nlohmann::json::array();
  std::exception_ptr fatal;
  std::string fatal_context;
  std::size_t j = 0;
  for (const SeedData& sd : seeds) {
    for (bayes::Mode mode : config.modes) {
      nlohmann::json members = nlohmann::json::array();
      std::size_t ok = 0;
      std::exception_ptr first_error;
      for (std::size_t m = 0; m < member_count(config, mode); ++m, ++j) {
        if (errors[j]) {
          members.push_back({{"member", m}, {"status", "failed"}, {"error", message_of(errors[j])}});
          log_line("[" + std::string(bayes::mode_name(mode)) + " seed " + std::to_string(sd.seed) + " member " +
                   std::to_string(m) + "] failed: " + message_of(errors[j]));
          if (!first_error) first_error = errors[j];
        } else {
          members.push_back({{"member", m}, {"status", "ok"}, {"file", member_file(m)}});
          ++ok;
        }
      }
      bool failed = ok < member_count(config, mode);
      if (mode == bayes::Mode::kEnsemble && ok >= 2) failed = false;  // diverging members are excluded
      if (mode == bayes::Mode::kEnsemble && ok < 2 && !first_error) failed = true;
      const nlohmann::json index = {{"config_digest", data.digest},
                                    {"seed", sd.seed},
                                    {"mode", bayes::mode_name(mode)},
                                    {"members", members},
                                    {"usable", ok},
                                    {"status", failed ? "failed" : "ok"}};
      write_json(run_directory(config, mode, sd.seed) / "index.json", index);
      runs.push_back({{"seed", sd.seed}, {"mode", bayes::mode_name(mode)}, {"usable", ok}, {"status", index["status"]}});
      if (failed && !fatal) {
        fatal = first_error ? first_error
                            : std::make_exception_ptr(NumericError("ensemble: fewer than 2 members trained without diverging"));
        fatal_context = std::string(bayes::mode_name(mode)) + " seed " + std::to_string(sd.seed);
      }
    }
  }
  if (fatal) rethrow_with_context(fatal, fatal_context);
  return {{"config_digest", data.digest}, {"runs", runs}};
}

namespace {

struct MemberPredictions {
  std::vector<bayes::PredictiveDistribution> members;
  std::string gap;  // non-empty when the run is missing or unusable
};

/// Loads every usable member of a (mode, seed) run and marginalizes it over `inputs`.
MemberPredictions predict_run(const RunConfig& config, const std::string& digest, const gnn::GnnModel& model,
                              bayes::Mode mode, std::uint64_t seed, const bayes::GraphSet& inputs, bool first_only) {
  MemberPredictions out;
  const auto dir = run_directory(config, mode, seed);
  if (!std::filesystem::exists(dir / "index.json")) {
    out.gap = "no trained run at " + dir.string();
    return out;
  }
  const nlohmann::json index = read_json(dir / "index.json");
  if (index.value("config_digest", std::string()) != digest) {
    throw DataError(dir.string() + " was trained with config digest " + index.value("config_digest", std::string("?")) +
                    ", current config is " + digest + "; refusing to mix");
  }
  if (index.value("status", std::string()) != "ok") {
    out.gap = "run at " + dir.string() + " failed during training";
    return out;
  }
  const bayes::GnnPredictor predictor(model, inputs);
  const std::string layout = to_hex(model.layout().digest());
  for (const auto& entry : index.at("members")) {
    if (entry.value("status", std::string()) != "ok") continue;
    const auto path = dir / entry.at("file").get<std::string>();
    if (!std::filesystem::exists(path)) {
      out.gap = "missing artifact " + path.string();
      out.members.clear();
      return out;
    }
    const bayes::Posterior posterior = bayes::load_posterior(path);
    if (posterior.meta.value("config_digest", std::string()) != digest)
      throw DataError(path.string() + " has a different config digest; refusing to mix");
    if (posterior.layout_digest != layout) throw DataError(path.string() + " does not match the model layout");
    const std::size_t n = config.samples.value_or(bayes::default_sample_count(posterior.mode, config.schedule));
    out.members.push_back(bayes::marginalize(posterior, predictor, n, seed, config.schedule.swag_scale));
    if (first_only) break;
  }
  if (out.members.empty()) out.gap = "no usable members in " + dir.string();
  return out;
}

constexpr const char* kMetricNames[] = {"ece", "auroc", "accuracy", "precision", "recall", "f1"};

}  // namespace

nlohmann::json cmd_eval(const RunConfig& config) {
  config.validate();
  const LoadedData data = load_data(config);
  const gnn::ModelConfig model_config = model_for(config, data);
  const gnn::GnnModel model(model_config);

  std::vector<SeedData> seeds;
  for (std::uint64_t seed : config.seeds) seeds.push_back(prepare_seed(config, data, seed));

  struct Cell {
    nlohmann::json row;
    std::vector<metrics::PredictionRecord> single_records;
  };
  const std::size_t n_modes = config.modes.size();
  std::vector<Cell> cells(n_modes * seeds.size());
  const auto errors = run_pool(cells.size(), config.workers, [&](std::size_t c) {
    const bayes::Mode mode = config.modes[c / seeds.size()];
    const SeedData& sd = seeds[c % seeds.size()];
    Cell& cell = cells[c];
    cell.row = {{"seed", sd.seed}};
    const MemberPredictions pred = predict_run(config, data.digest, model, mode, sd.seed, sd.test, false);
    if (!pred.gap.empty()) {
      cell.row["missing"] = pred.gap;
      log_line("[" + std::string(bayes::mode_name(mode)) + " seed " + std::to_string(sd.seed) + "] gap: " + pred.gap);
      return;
    }
    const std::vector<std::int8_t> labels = flat_labels(sd.test);
    cell.single_records = metrics::make_records(pred.members.front().mean, labels, sd.test.tasks);
    cell.row["single"] = metrics::to_json(metrics::evaluate(cell.single_records, sd.test.tasks));
    cell.row["members"] = pred.members.size();
    cell.row["draws"] = pred.members.front().draws;
    if (pred.members.size() >= 2) {
      const auto avg = bayes::average_predictives(pred.members);
      cell.row["ensemble"] = metrics::to_json(metrics::evaluate(metrics::make_records(avg.mean, labels, sd.test.tasks), sd.test.tasks));
    } else {
      cell.row["ensemble"] = nullptr;
    }
    const auto hist = metrics::confusion_histogram(cell.single_records);
    write_text(config.out / "eval" / (std::string(bayes::mode_name(mode)) + "_" + seed_dir(sd.seed) + "_confusion.csv"),
               digest_comment(data.digest) + metrics::confusion_csv(hist));
  });
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  nlohmann::json modes = nlohmann::json::object();
  std::ostringstream table;
  table << digest_comment(data.digest) << "mode,column,metric,mean,std,n\n";
  for (std::size_t mi = 0; mi < n_modes; ++mi) {
    const std::string name(bayes::mode_name(config.modes[mi]));
    nlohmann::json rows = nlohmann::json::array();
    std::vector<metrics::PredictionRecord> pooled;
    for (std::size_t si = 0; si < seeds.size(); ++si) {
      const Cell& cell = cells[mi * seeds.size() + si];
      rows.push_back(cell.row);
      pooled.insert(pooled.end(), cell.single_records.begin(), cell.single_records.end());
    }
    nlohmann::json summary = nlohmann::json::object();
    for (const char* column : {"single", "ensemble"}) {
      nlohmann::json col = nlohmann::json::object();
      for (const char* metric : kMetricNames) {
        std::vector<double> values;
        for (const auto& r : rows)
          if (r.contains(column) && r[column].is_object())
            if (auto v = json_number(r[column][metric])) values.push_back(*v);
        if (values.empty()) continue;
        const metrics::Summary s = metrics::summarize(values);
        col[metric] = metrics::to_json(s);
        table << name << ',' << column << ',' << metric << ',' << std::setprecision(17) << s.mean << ',' << s.std << ','
              << s.n << '\n';
      }
      summary[column] = col.empty() ? nlohmann::json() : col;
    }
    if (!pooled.empty()) {
      const auto hist = metrics::confusion_histogram(pooled);
      write_text(config.out / "eval" / (name + "_confusion.csv"), digest_comment(data.digest) + metrics::confusion_csv(hist));
      write_text(config.out / "eval" / (name + "_confusion.svg"),
                 svg_with_digest(metrics::confusion_svg(hist, data.dataset.name + " " + name + " (test, all seeds)"), data.digest));
    }
    modes[name] = {{"seeds", rows}, {"summary", summary}};
  }
  const nlohmann::json report = {{"config_digest", data.digest}, {"dataset", data.dataset.name}, {"modes", modes}};
  write_json(config.out / "eval" / "report.json", report);
  write_text(config.out / "eval" / "report.csv", table.str());
  return report;
}

namespace {

struct Library {
  std::vector<std::string> smiles;
  bayes::GraphSet graphs;
  std::size_t dropped = 0;
};

Library load_library(const RunConfig& config, std::size_t tasks) {
  Library lib;
  const CsvTable table = read_csv(config.screen.library);
  const std::size_t col = table.column(config.screen.smiles_column);
  lib.graphs.tasks = tasks;
  for (const auto& row : table.rows) {
    try {
      lib.graphs.graphs.push_back(chem::featurize(chem::parse_smiles(row[col])));
      lib.smiles.push_back(row[col]);
    } catch (const ParseError&) {
      ++lib.dropped;
    }
  }
  return lib;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

nlohmann::json cmd_screen(const RunConfig& config) {
  config.validate();
  const LoadedData data = load_data(config);
  const gnn::ModelConfig model_config = model_for(config, data);
  const gnn::GnnModel model(model_config);
  const std::size_t tasks = model_config.tasks;

  std::optional<Library> shared;
  if (!config.screen.library.empty()) {
    if (!std::filesystem::is_regular_file(config.screen.library))
      throw ConfigError("screen library " + config.screen.library.string() + " does not exist");
    shared = load_library(config, tasks);
    if (shared->graphs.size() == 0) throw DataError("screen library has no parseable molecules");
    log_line("library: " + std::to_string(shared->graphs.size()) + " molecules (" + std::to_string(shared->dropped) +
             " unparseable dropped)");
  }

  nlohmann::json modes = nlohmann::json::object();
  for (bayes::Mode mode : config.modes) {
    const std::string name(bayes::mode_name(mode));
    nlohmann::json rows = nlohmann::json::array();
    for (std::uint64_t seed : config.seeds) {
      Library lib;
      if (shared) {
        lib = *shared;
      } else {
        const chem::ScaffoldSplit split = obtain_split(config, data, seed);
        lib.graphs = bayes::make_graph_set(data.dataset, split.test);
        for (std::size_t i : split.test) lib.smiles.push_back(data.dataset.records[i].smiles);
        if (lib.graphs.size() == 0) throw DataError("seed " + std::to_string(seed) + " has an empty test split to screen");
      }
      const MemberPredictions pred = predict_run(config, data.digest, model, mode, seed, lib.graphs, true);
      if (!pred.gap.empty()) {
        rows.push_back({{"seed", seed}, {"missing", pred.gap}});
        continue;
      }
      const bayes::PredictiveDistribution& p = pred.members.front();
      std::vector<std::size_t> order(p.rows);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return p.mean[a * tasks] > p.mean[b * tasks]; });
      std::ostringstream csv;
      csv << digest_comment(data.digest) << "rank,smiles";
      for (std::size_t t = 0; t < tasks; ++t) csv << ",probability_" << t << ",uncertainty_" << t;
      csv << '\n' << std::setprecision(17);
      for (std::size_t r = 0; r < order.size(); ++r) {
        const std::size_t i = order[r];
        csv << r + 1 << ',' << csv_field(lib.smiles[i]);
        for (std::size_t t = 0; t < tasks; ++t) csv << ',' << p.mean[i * tasks + t] << ',' << p.uncertainty[i * tasks + t];
        csv << '\n';
      }
      const std::string stem = name + "_" + seed_dir(seed);
      write_text(config.out / "screen" / (stem + "_ranking.csv"), csv.str());
      nlohmann::json per_task = nlohmann::json::array();
      for (std::size_t t = 0; t < tasks; ++t) {
        std::vector<double> probs(p.rows);
        for (std::size_t i = 0; i < p.rows; ++i) probs[i] = p.mean[i * tasks + t];
        const auto s = metrics::screening_summary(probs, config.screen.low, config.screen.high);
        per_task.push_back(metrics::to_json(s));
        if (t == 0) {
          write_text(config.out / "screen" / (stem + "_histogram.csv"), digest_comment(data.digest) + metrics::screening_csv(s));
          write_text(config.out / "screen" / (stem + "_histogram.svg"),
                     svg_with_digest(metrics::screening_svg(s, name + " seed " + std::to_string(seed)), data.digest));
        }
      }
      const nlohmann::json summary = {{"config_digest", data.digest},
                                      {"mode", name},
                                      {"seed", seed},
                                      {"library", shared ? config.screen.library.string() : std::string("test split")},
                                      {"dropped", lib.dropped},
                                      {"total", p.rows},
                                      {"draws", p.draws},
                                      {"tasks", per_task}};
      write_json(config.out / "screen" / (stem + "_summary.json"), summary);
      rows.push_back({{"seed", seed},
                      {"total", p.rows},
                      {"below_low", per_task[0]["below_low"]},
                      {"above_high", per_task[0]["above_high"]},
                      {"extreme_fraction", per_task[0]["extreme_fraction"]}});
      log_line("[" + name + " seed " + std::to_string(seed) + "] screened " + std::to_string(p.rows) + " molecules: " +
               per_task[0]["above_high"].dump() + " above " + std::to_string(config.screen.high) + ", " +
               per_task[0]["below_low"].dump() + " below " + std::to_string(config.screen.low));
    }
    modes[name] = rows;
  }
  const nlohmann::json report = {{"config_digest", data.digest}, {"modes", modes}};
  write_json(config.out / "screen" / "summary.json", report);
  return report;
}

namespace {

nlohmann::json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError(path.string() + " is not a JSON object");
  return j;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Bayesian graph neural networks for molecular property prediction"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Help for every command");

  std::string config_path, seeds, modes, arch, data, library, out;
  std::vector<std::string> overrides;
  std::optional<std::size_t> workers, samples;
  bool quiet = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", overrides, "Override a config value, e.g. schedule.epochs=50 (repeatable)");
    cmd->add_option("--seed,--seeds", seeds, "Seed list: 0-7 or 0,3,5");
    cmd->add_option("--data", data, "Dataset CSV (dataset.path)");
    cmd->add_option("--out", out, "Output directory");
    cmd->add_option("--workers", workers, "Worker threads, 0 for all cores");
    cmd->add_flag("--quiet,-q", quiet, "No progress output");
  };
  auto add_model = [&](CLI::App* cmd) {
    cmd->add_option("--mode,--modes", modes, "Comma list of none, ensemble, mcdo, bbb, sgld, swa, swag");
    cmd->add_option("--arch", arch, "gcn, gin, sage, gat or gatedgcn");
  };
  CLI::App* split = app.add_subcommand("split", "Write scaffold split manifests");
  add_common(split);
  CLI::App* train = app.add_subcommand("train", "Train posteriors");
  add_common(train);
  add_model(train);
  CLI::App* eval = app.add_subcommand("eval", "Evaluate trained posteriors on the test split");
  add_common(eval);
  add_model(eval);
  eval->add_option("--samples", samples, "Marginalization draws");
  CLI::App* screen = app.add_subcommand("screen", "Rank a library with trained posteriors");
  add_common(screen);
  add_model(screen);
  screen->add_option("--samples", samples, "Marginalization draws");
  screen->add_option("--library", library, "CSV of candidate molecules (default: test split)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  set_quiet(quiet);

  try {
    nlohmann::json doc = default_config_json();
    if (!config_path.empty()) merge_config(doc, read_config_file(config_path));
    for (const auto& o : overrides) apply_override(doc, o);
    RunConfig config = config_from_json(doc);
    if (!data.empty()) config.dataset.path = data;
    if (!seeds.empty()) config.seeds = parse_seed_list(seeds);
    if (!modes.empty()) config.modes = parse_mode_list(modes);
    if (!arch.empty()) config.model.architecture = gnn::architecture_from_name(arch);
    if (!out.empty()) config.out = out;
    if (workers) config.workers = *workers;
    if (samples) config.samples = *samples;
    if (!library.empty()) config.screen.library = library;

    nlohmann::json result;
    if (*split) result = cmd_split(config);
    else if (*train) result = cmd_train(config);
    else if (*eval) result = cmd_eval(config);
    else result = cmd_screen(config);
    if (!quiet) std::cout << result.dump(2) << '\n';
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace molrel::cli
