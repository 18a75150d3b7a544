#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "stochlat/metrics.hpp"
#include "stochlat/presets.hpp"
#include "stochlat/svgplot.hpp"
#include "stochlat/trainer.hpp"

namespace {

using namespace stochlat;

constexpr const char* kVersion = "stochlat 1.0";

std::runtime_error fail(const std::string& what) { return std::runtime_error(what); }

// --out falls back to STOCHLAT_OUT, then to the working directory.
std::filesystem::path out_or_default(const std::string& flag, const std::string& leaf) {
  if (!flag.empty()) return flag;
  std::filesystem::path base = ".";
  if (const char* env = std::getenv("STOCHLAT_OUT")) base = env;
  return base / leaf;
}

// One line per artifact directory recording how it was produced.
void write_command_file(const std::filesystem::path& dir, int argc, char** argv) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "command.txt");
  out << kVersion << "\n";
  for (int i = 0; i < argc; ++i) out << (i ? " " : "") << argv[i];
  out << "\n";
}

const ExperimentPreset& named_preset(const std::string& name) {
  const ExperimentPreset* p = find_preset(name);
  if (!p) throw fail("unknown preset '" + name + "' (see `stochlat presets`)");
  return *p;
}

struct CsvTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;

  bool has(const std::string& name) const {
    for (const std::string& n : names)
      if (n == name) return true;
    return false;
  }
  const std::vector<double>& col(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return cols[i];
    throw fail("column '" + name + "' missing");
  }
};

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw fail("cannot read " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw fail(path.string() + " is empty");
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.names.push_back(cell);
  table.cols.resize(table.names.size());
  size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream cells(line);
    size_t i = 0;
    while (std::getline(cells, cell, ',')) {
      if (i >= table.names.size()) throw fail("too many cells in " + path.string());
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw fail("bad number in " + path.string());
      table.cols[i++].push_back(v);
    }
    if (i != table.names.size())
      throw fail("short row " + std::to_string(row) + " in " + path.string());
  }
  return table;
}

// ---- gen-data ----------------------------------------------------------

struct GenOpts {
  std::string preset = "forward";
  std::string config;
  std::string out;
  uint64_t seed = 0;
  int count = 0;           // 0 keeps the preset's N
  int pool = 0;            // 0 keeps the default snapshot pool floor
  int reference_grid = 0;  // >0 re-targets the layout to a uniform test grid
};

void run_gen(const GenOpts& o, int argc, char** argv) {
  ExperimentPreset preset = named_preset(o.preset);
  if (!o.config.empty()) preset = resolve_config_file(o.config, preset);
  if (o.count > 0) preset.train_count = o.count;

  if (o.reference_grid > 0) {
    // Reference sets live on the evaluation grid: the process itself for
    // process runs, K and U side by side for equation runs (a mixed layout
    // is the one carrier that admits both; its lone f sensor is inert).
    std::vector<double> grid = uniform_sensors(o.reference_grid);
    if (preset.problem.mode == ProblemMode::Process) {
      preset.problem.layout = {{}, {}, grid, {}};
    } else {
      preset.problem.mode = ProblemMode::Mixed;
      preset.problem.layout = {grid, grid, {0.0}, {}};
    }
    if (o.count == 0) preset.train_count = 1000;
  }

  int pool = o.pool > 0 ? o.pool : (o.reference_grid > 0 ? preset.train_count : 1000);
  SnapshotSet set =
      build_dataset(preset.problem, preset.k_hat, preset.f, preset.train_count, o.seed, pool);

  std::filesystem::path out = out_or_default(o.out, "dataset.csv");
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  save_dataset_file(out.string(), set);
  (void)argc;
  (void)argv;
  std::cout << "wrote " << set.count() << " snapshots (" << set.layout.total()
            << " readings each) to " << out.string() << "\n";
}

// ---- train -------------------------------------------------------------

struct TrainOpts {
  std::string data;
  std::string preset;
  std::string config;
  std::string out;
  std::vector<uint64_t> seeds;
  int64_t epochs = 0;
  int batch = 0;
  int jobs = 1;
  bool quiet = false;
};

ExperimentPreset dataset_base(const SnapshotSet& data) {
  ExperimentPreset base;
  base.name = "dataset";
  base.summary = "settings inferred from the dataset file";
  base.problem.mode = data.provenance.mode;
  base.problem.layout = data.layout;
  base.problem.noise_dim = base.config.noise_dim;
  base.k_hat = data.provenance.k_spec;
  base.f = data.provenance.f_spec;
  base.train_count = data.provenance.train_count;
  return base;
}

void train_one(const SnapshotSet& data, const ProblemSpec& problem, TrainConfig config,
               uint64_t seed, const std::filesystem::path& dir, bool progress) {
  config.seed = seed;
  StepObserver observer;
  int64_t report_every = std::max<int64_t>(1, config.epochs / 20);
  if (progress) {
    observer = [&config, report_every](int64_t epoch, int64_t batch, StepPhase phase,
                                       const TrainedNets&) {
      if (phase == StepPhase::GeneratorUpdated && batch == 0 &&
          (epoch % report_every == 0 || epoch == config.epochs))
        std::cerr << "epoch " << epoch << "/" << config.epochs << "\n";
    };
  }
  TrainResult result = problem.mode == ProblemMode::Process
                           ? train_process(data, config, observer)
                           : train_sde(data, problem, config, observer);
  save_run(dir, result);
}

void run_train(const TrainOpts& o, int argc, char** argv) {
  if (o.data.empty()) throw fail("train needs --data");
  SnapshotSet data = load_dataset_file(o.data);

  ExperimentPreset preset;
  if (!o.preset.empty()) {
    preset = named_preset(o.preset);
    if (preset.problem.mode != data.provenance.mode)
      throw fail("dataset mode does not match preset '" + o.preset + "'");
    if (!(preset.problem.layout == data.layout))
      throw fail("dataset layout does not match preset '" + o.preset + "'");
  } else {
    preset = dataset_base(data);
  }
  if (!o.config.empty()) preset = resolve_config_file(o.config, preset);

  TrainConfig config = preset.config;
  if (o.epochs > 0) config.epochs = o.epochs;
  if (o.batch > 0) config.batch_size = o.batch;

  ProblemSpec problem{data.provenance.mode, data.layout, config.noise_dim};

  std::vector<uint64_t> seeds = o.seeds.empty() ? std::vector<uint64_t>{config.seed} : o.seeds;
  std::filesystem::path out = out_or_default(o.out, "run");
  write_command_file(out, argc, argv);

  if (seeds.size() == 1) {
    train_one(data, problem, config, seeds[0], out, !o.quiet);
    std::cout << "run written to " << out.string() << "\n";
    return;
  }

  // Independent seeds are the only parallel axis; each run stays
  // single-threaded and bit-reproducible.
  size_t jobs = std::max(1, o.jobs);
  std::vector<std::string> errors(seeds.size());
  for (size_t start = 0; start < seeds.size(); start += jobs) {
    std::vector<std::thread> wave;
    for (size_t i = start; i < std::min(seeds.size(), start + jobs); ++i) {
      wave.emplace_back([&, i] {
        try {
          train_one(data, problem, config, seeds[i],
                    out / ("seed-" + std::to_string(seeds[i])), false);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      });
    }
    for (std::thread& t : wave) t.join();
  }
  std::string all_errors;
  for (size_t i = 0; i < seeds.size(); ++i)
    if (!errors[i].empty())
      all_errors += "seed " + std::to_string(seeds[i]) + ": " + errors[i] + "\n";
  if (!all_errors.empty()) throw fail("some runs failed:\n" + all_errors);
  std::cout << seeds.size() << " runs written under " << out.string() << "\n";
}

// ---- eval --------------------------------------------------------------

struct EvalOpts {
  std::string run;
  std::string reference;
  std::string out;
  uint64_t seed = 0;
  int points = 101;
  int samples = 1000;
  int count = 30;
  int64_t window = 3000;
};

void run_eval(const EvalOpts& o, int argc, char** argv) {
  if (o.run.empty()) throw fail("eval needs --run");
  if (o.reference.empty()) throw fail("eval needs --reference");
  TrainResult run = load_run(o.run);
  SnapshotSet reference = load_dataset_file(o.reference);

  EvalConfig eval;
  eval.test_points = o.points;
  eval.test_samples = o.samples;
  eval.reference_samples = int(reference.count());
  eval.checkpoint_count = o.count;
  eval.checkpoint_window = o.window;
  eval.seed = o.seed;

  MetricsReport report = evaluate_generator(run.store, eval, reference);
  std::filesystem::path out = out_or_default(o.out, "metrics");
  save_metrics(out, report);
  write_command_file(out, argc, argv);

  std::ifstream summary(out / "summary.txt");
  std::cout << summary.rdbuf();
  std::cout << "metrics written to " << out.string() << "\n";
}

// ---- report ------------------------------------------------------------

struct ReportOpts {
  std::string metrics;
  std::string run;  // optional, adds the loss plot
  std::string out;
};

void run_report(const ReportOpts& o, int argc, char** argv) {
  if (o.metrics.empty()) throw fail("report needs --metrics");
  std::filesystem::path in = o.metrics;
  std::filesystem::path out = out_or_default(o.out, "plots");
  std::filesystem::create_directories(out);
  write_command_file(out, argc, argv);

  {
    CsvTable t = read_csv(in / "wasserstein.csv");
    PlotSpec spec;
    spec.title = "transport distance to the reference set";
    spec.x_label = "epoch";
    spec.y_label = "field W1";
    spec.series.push_back({"W1", t.col("epoch"), t.col("w1"), {}, "", true, false});
    write_svg_plot(out / "wasserstein.svg", spec);
  }
  {
    CsvTable t = read_csv(in / "curves.csv");
    auto moments = [&](const std::string& suffix, const std::string& file,
                       const std::string& title) {
      PlotSpec spec;
      spec.title = title;
      spec.x_label = "x";
      spec.y_label = "value";
      spec.series.push_back(
          {"mean (generated)", t.col("x"), t.col("mean_" + suffix), {}, "#1f77b4", true, false});
      spec.series.push_back({"mean (reference)",
                             t.col("x"),
                             t.col("ref_mean_" + suffix),
                             {},
                             "#9ecae1",
                             true,
                             true});
      spec.series.push_back(
          {"std (generated)", t.col("x"), t.col("std_" + suffix), {}, "#d62728", true, false});
      spec.series.push_back({"std (reference)",
                             t.col("x"),
                             t.col("ref_std_" + suffix),
                             {},
                             "#fcae91",
                             true,
                             true});
      write_svg_plot(out / file, spec);
    };
    moments("u", "moments_u.svg", "moment curves, primary field");
    if (t.has("mean_k")) moments("k", "moments_k.svg", "moment curves, diffusion field");
  }
  {
    CsvTable t = read_csv(in / "eigenvalues.csv");
    PlotSpec spec;
    spec.title = "sample covariance spectra";
    spec.x_label = "component";
    spec.y_label = "eigenvalue";
    spec.log_y = true;
    spec.series.push_back(
        {"generated", t.col("component"), t.col("generated"), {}, "", false, true});
    spec.series.push_back(
        {"reference", t.col("component"), t.col("reference"), {}, "", false, true});
    write_svg_plot(out / "eigenvalues.svg", spec);
  }
  {
    CsvTable t = read_csv(in / "checkpoint_errors.csv");
    PlotSpec spec;
    spec.title = "relative errors over the selected checkpoints";
    spec.x_label = "epoch";
    spec.y_label = "relative L2 error";
    for (const std::string& name : t.names) {
      if (name == "epoch") continue;
      spec.series.push_back({name, t.col("epoch"), t.col(name), {}, "", true, true});
    }
    write_svg_plot(out / "errors.svg", spec);
  }
  if (!o.run.empty()) {
    CsvTable t = read_csv(std::filesystem::path(o.run) / "losses.csv");
    PlotSpec spec;
    spec.title = "training objectives (first batch of each epoch)";
    spec.x_label = "epoch";
    spec.y_label = "objective";
    std::vector<double> epoch, enc, gen;
    const std::vector<double>& batches = t.col("batch");
    for (size_t i = 0; i < batches.size(); ++i) {
      if (batches[i] != 0) continue;
      epoch.push_back(t.col("epoch")[i]);
      enc.push_back(t.col("encoder_objective")[i]);
      gen.push_back(t.col("generator_objective")[i]);
    }
    spec.series.push_back({"encoder", epoch, enc, {}, "", true, false});
    spec.series.push_back({"generator", epoch, gen, {}, "", true, false});
    write_svg_plot(out / "loss.svg", spec);
  }
  std::cout << "plots written to " << out.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"physics-informed adversarial solver for a stochastic elliptic equation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GenOpts gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-data", "generate a snapshot dataset");
  gen_cmd->add_option("--preset", gen.preset, "experiment preset name")
      ->default_str("forward");
  gen_cmd->add_option("--config", gen.config, "config file applied on top of the preset");
  gen_cmd->add_option("--seed", gen.seed, "dataset seed");
  gen_cmd->add_option("--count", gen.count, "snapshots drawn per epoch (N)");
  gen_cmd->add_option("--pool", gen.pool, "stored snapshot pool size");
  gen_cmd->add_option("--reference-grid", gen.reference_grid,
                      "emit an evaluation reference on a uniform grid of this many points");
  gen_cmd->add_option("--out", gen.out, "output dataset file");

  TrainOpts train;
  CLI::App* train_cmd = app.add_subcommand("train", "train on a dataset");
  train_cmd->add_option("--data", train.data, "dataset file")->required();
  train_cmd->add_option("--preset", train.preset, "experiment preset name");
  train_cmd->add_option("--config", train.config, "config file applied on top of the preset");
  train_cmd->add_option("--seeds", train.seeds, "training seeds")->delimiter(',');
  train_cmd->add_option("--epochs", train.epochs, "override the epoch count");
  train_cmd->add_option("--batch", train.batch, "override the batch size");
  train_cmd->add_option("--jobs", train.jobs, "parallel runs across seeds");
  train_cmd->add_flag("--quiet", train.quiet, "suppress progress lines");
  train_cmd->add_option("--out", train.out, "run output directory");

  EvalOpts eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a run against a reference set");
  eval_cmd->add_option("--run", eval.run, "run directory")->required();
  eval_cmd->add_option("--reference", eval.reference, "reference dataset on the test grid")
      ->required();
  eval_cmd->add_option("--seed", eval.seed, "evaluation seed");
  eval_cmd->add_option("--points", eval.points, "test grid size");
  eval_cmd->add_option("--samples", eval.samples, "generated samples per checkpoint");
  eval_cmd->add_option("--count", eval.count, "checkpoints in the error protocol");
  eval_cmd->add_option("--window", eval.window, "trailing epoch window for selection");
  eval_cmd->add_option("--out", eval.out, "metrics output directory");

  ReportOpts report;
  CLI::App* report_cmd = app.add_subcommand("report", "render metric tables into SVG plots");
  report_cmd->add_option("--metrics", report.metrics, "metrics directory")->required();
  report_cmd->add_option("--run", report.run, "run directory (adds the loss plot)");
  report_cmd->add_option("--out", report.out, "plot output directory");

  CLI::App* presets_cmd = app.add_subcommand("presets", "list built-in experiment presets");

  try {
    app.parse(argc, argv);
    if (gen_cmd->parsed()) run_gen(gen, argc, argv);
    if (train_cmd->parsed()) run_train(train, argc, argv);
    if (eval_cmd->parsed()) run_eval(eval, argc, argv);
    if (report_cmd->parsed()) run_report(report, argc, argv);
    if (presets_cmd->parsed()) {
      for (const ExperimentPreset& p : experiment_presets())
        std::printf("%-14s %s\n", p.name.c_str(), p.summary.c_str());
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
