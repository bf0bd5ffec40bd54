// Copyright 2026 The sanode Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sanode/cli.hpp"

#include "io_util.hpp"
#include "sanode/checkpoint.hpp"
#include "sanode/dataset.hpp"
#include "sanode/expr.hpp"
#include "sanode/hash.hpp"
#include "sanode/report.hpp"
#include "sanode/systems.hpp"
#include "sanode/train.hpp"
#include "sanode/transport.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>

namespace sanode::cli {

namespace fs = std::filesystem;

std::map<std::string, std::string> parse_config(std::string const &text)
{
  std::map<std::string, std::string> out;
  std::string section;
  auto trim = [](std::string_view s) {
    auto const b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) {
      return std::string();
    }
    auto const e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
  };
  auto const rows = io::lines(text);
  for (std::size_t n = 0; n < rows.size(); ++n) {
    std::string const line = trim(rows[n]);
    std::string const where = "config line " + std::to_string(n + 1);
    if (line.empty() || line[0] == '#') {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw UsageError(where + ": malformed section header '" + line + "'");
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    auto const eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(where + ": expected 'section.key = value'");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string const value = trim(std::string_view(line).substr(eq + 1));
    if (!section.empty()) {
      key = section + "." + key;
    }
    if (key.find('.') == std::string::npos || key.front() == '.' || key.back() == '.') {
      throw UsageError(where + ": key '" + key + "' needs a section (section.key)");
    }
    if (!out.emplace(key, value).second) {
      throw UsageError(where + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

namespace {

std::string show(std::string const &v)
{
  return v;
}
std::string show(double v)
{
  return io::format_double(v);
}
std::string show(Index v)
{
  return std::to_string(v);
}
std::string show(std::uint64_t v)
{
  return std::to_string(v);
}
std::string show(bool v)
{
  return v ? "true" : "false";
}
std::string show(std::vector<std::string> const &v)
{
  std::string out;
  for (auto const &s : v) {
    out += (out.empty() ? "" : " ") + s;
  }
  return out;
}

// Options of one subcommand, in registration order, with config-file fallback.
class Options
{
public:
  Options(CLI::App *app, std::string section)
    : app_(app)
    , section_(std::move(section))
  {
  }

  template <typename T> CLI::Option *option(std::string const &key, T &var, std::string const &help)
  {
    CLI::Option *o = app_->add_option("--" + key, var, help)->capture_default_str();
    entries_.push_back({key.substr(0, key.find(',')), o, [&var] { return show(var); }, false, false});
    return o;
  }

  CLI::Option *flag(std::string const &key, bool &var, std::string const &help)
  {
    CLI::Option *o = app_->add_flag("--" + key, var, help);
    entries_.push_back({key, o, [&var] { return show(var); }, false, false});
    return o;
  }

  template <typename T> CLI::Option *positional(std::string const &key, T &var, std::string const &help)
  {
    CLI::Option *o = app_->add_option(key, var, help);
    entries_.push_back({key, o, [&var] { return show(var); }, std::is_same_v<T, std::vector<std::string>>, false});
    return o;
  }

  /// Fills options absent from the command line from `config`.
  void merge(std::map<std::string, std::string> const &config)
  {
    std::string const prefix = section_ + ".";
    for (auto const &[key, value] : config) {
      if (key.compare(0, prefix.size(), prefix) != 0) {
        continue;
      }
      std::string const name = key.substr(prefix.size());
      auto it = std::find_if(entries_.begin(), entries_.end(), [&](Entry const &e) { return e.key == name; });
      if (it == entries_.end()) {
        throw UsageError("unknown config key '" + key + "'");
      }
      if (it->opt->count() > 0) {
        continue;
      }
      it->opt->clear();
      if (it->multi) {
        std::istringstream words(value);
        for (std::string w; words >> w;) {
          it->opt->add_result(w);
        }
      } else {
        it->opt->add_result(value);
      }
      try {
        it->opt->run_callback();
      } catch (CLI::Error const &e) {
        throw UsageError("config key '" + key + "': " + e.what());
      }
      it->from_config = true;
    }
  }

  bool given(std::string const &key) const
  {
    for (auto const &e : entries_) {
      if (e.key == key) {
        return e.opt->count() > 0 || e.from_config;
      }
    }
    return false;
  }

  /// `section.key = value` for every option; feeding it back via --config
  /// reproduces the run.
  std::string resolved() const
  {
    std::string out = "# resolved configuration of 'sanode " + section_ + "'\n";
    for (auto const &e : entries_) {
      out += section_ + "." + e.key + " = " + e.value() + "\n";
    }
    return out;
  }

private:
  struct Entry
  {
    std::string key;
    CLI::Option *opt;
    std::function<std::string()> value;
    bool multi;
    bool from_config;
  };

  CLI::App *app_;
  std::string section_;
  std::vector<Entry> entries_;
};

TrajectoryDataset load_dataset(std::string const &path)
{
  fs::path const p(path);
  if (fs::is_directory(p) && !fs::exists(p / "manifest.csv") && fs::exists(p / "dataset.bin")) {
    return read_dataset_binary(p / "dataset.bin");
  }
  if (!fs::exists(p)) {
    throw IoError("dataset '" + path + "' does not exist");
  }
  return read_dataset(p);
}

void require(bool condition, std::string const &message)
{
  if (!condition) {
    throw UsageError(message);
  }
}

std::vector<double> parse_times(std::string const &list)
{
  std::vector<double> out;
  for (auto piece : io::split(list, ',')) {
    std::string const s(piece);
    char *end = nullptr;
    double const v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !(v >= 0)) {
      throw UsageError("invalid time '" + s + "' in list '" + list + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::string stamp(double t)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

std::string describe(TrajectoryDataset const &ds)
{
  return std::to_string(ds.size()) + " trajectories, d = " + std::to_string(ds.dim()) +
         ", M = " + std::to_string(ds.grid.steps()) + " steps on [" + stamp(ds.grid.t0()) + ", " +
         stamp(ds.grid.t1()) + "], train " + std::to_string(ds.train.size()) + ", test " +
         std::to_string(ds.test.size());
}

struct TrainFlags
{
  std::string model = "sa";
  Index neurons = 100;
  std::string activation = "relu";
  double lr = 1e-3;
  Index epochs = 3000;
  double lambda = 1e-5;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::string grad_mode = "discrete";
  Index log_every = 100;
  bool autonomous = false;
  bool paper_scale = false;

  void add(Options &o, bool with_model)
  {
    if (with_model) {
      o.option("model", model, "model kind: sa or vanilla");
    }
    o.option("P", neurons, "hidden neurons");
    o.option("activation", activation, "relu or sigmoid");
    o.option("lr", lr, "Adam learning rate");
    o.option("epochs", epochs, "full-batch epochs");
    o.option("lambda", lambda, "regularization weight");
    o.option("seed", seed, "initialization seed");
    o.option("beta1", beta1, "Adam first-moment decay");
    o.option("beta2", beta2, "Adam second-moment decay");
    o.option("eps", eps, "Adam epsilon");
    o.option("grad-mode", grad_mode, "discrete (backprop through RK4) or adjoint");
    o.option("log-every", log_every, "epochs between progress lines");
    if (with_model) {
      o.flag("autonomous", autonomous, "fix the time weights A2 at zero");
    }
    o.flag("paper-scale", paper_scale, "P = 1000, lr = 1e-4, 5000 epochs unless given explicitly");
  }

  void apply_paper_scale(Options const &o)
  {
    if (!paper_scale) {
      return;
    }
    TrainConfig const ps = sanode::paper_scale(TrainConfig{});
    if (!o.given("P")) {
      neurons = ps.neurons;
    }
    if (!o.given("lr")) {
      lr = ps.lr;
    }
    if (!o.given("epochs")) {
      epochs = ps.epochs;
    }
  }

  TrainConfig config() const
  {
    TrainConfig c;
    try {
      c.model = parse_model_kind(model);
      c.activation = parse_activation(activation);
      c.grad_mode = parse_grad_mode(grad_mode);
    } catch (DomainError const &e) {
      throw UsageError(e.what());
    }
    c.neurons = neurons;
    c.lr = lr;
    c.epochs = epochs;
    c.lambda = lambda;
    c.seed = seed;
    c.beta1 = beta1;
    c.beta2 = beta2;
    c.eps = eps;
    c.log_every = log_every;
    c.autonomous = autonomous;
    try {
      c.validate();
    } catch (DomainError const &e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

Checkpoint train_with_progress(TrajectoryDataset const &ds, TrainConfig const &config, std::ostream &out)
{
  return fit(ds, config, [&out](Index epoch, LossReport const &r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "epoch %6ld  loss %.6e  data %.6e  reg %.6e\n", static_cast<long>(epoch), r.total,
                  r.data_term, r.reg_term);
    out << buf << std::flush;
  });
}

void print_dof(Model const &m, Index steps, std::ostream &out)
{
  ModelKind const kind = model_kind(m);
  Index const P = std::visit([](auto const &p) { return p.neurons(); }, m);
  DofReport const dof = dof_report(kind, P, model_dim(m), steps);
  out << "model " << to_string(kind) << ", P = " << P << ", d = " << model_dim(m) << ": dof_paper = " << dof.paper_formula
      << ", dof_literal = " << dof.literal_count << "\n";
}

// ---------------------------------------------------------------------------

struct GenerateCmd
{
  std::string system;
  std::string field;
  double lo = -2.0;
  double hi = 2.0;
  double spacing = 0.5;
  double t0 = 0.0;
  double t1 = 5.0;
  double dt = 0.05;
  std::uint64_t seed = 0;
  std::string format = "csv";
  std::string out;

  void add(Options &o)
  {
    o.option("system", system, "built-in system: dissipative, pendulum, linear-nonaut, duffing, transport-sin, doswell");
    o.option("field", field, "field definition file (alternative to --system)");
    o.option("lo", lo, "lattice lower bound in every coordinate");
    o.option("hi", hi, "lattice upper bound in every coordinate");
    o.option("spacing", spacing, "lattice spacing");
    o.option("t0", t0, "initial time");
    o.option("t1", t1, "final time");
    o.option("dt", dt, "time step");
    o.option("seed", seed, "train/test split seed");
    o.option("format", format, "csv (bundle directory) or binary (dataset.bin)");
    o.option("out,-o", out, "output directory");
  }

  int run(Options const &o, std::ostream &os)
  {
    require(system.empty() != field.empty(), "generate needs exactly one of --system and --field");
    require(!out.empty(), "generate needs an output directory (-o)");
    require(format == "csv" || format == "binary", "--format must be csv or binary");
    require(spacing > 0 && hi >= lo, "invalid lattice bounds or spacing");
    require(dt > 0 && t1 > t0, "invalid time interval or step");
    TimeGrid grid(0.0, 1.0, 1);
    try {
      grid = TimeGrid::with_step(t0, t1, dt);
    } catch (DomainError const &e) {
      throw UsageError(e.what());
    }
    std::optional<FieldHandle> f;
    std::string name;
    if (!system.empty()) {
      SystemId id;
      try {
        id = parse_system_id(system);
      } catch (DomainError const &e) {
        throw UsageError(e.what());
      }
      BenchmarkSystem const sys = make_system(id);
      f = sys.rhs;
      name = to_string(id);
    } else {
      f = to_analytic_field(load_field_file(field), fs::path(field).filename().string());
      name = "file:" + fs::path(field).filename().string();
    }
    TrajectoryDataset const ds = generate_dataset(*f, name, lattice_points(field_dim(*f), lo, hi, spacing), grid, seed);
    fs::path const dir(out);
    if (format == "csv") {
      write_dataset_csv(ds, dir);
    } else {
      write_dataset_binary(ds, dir / "dataset.bin");
    }
    io::write_file(dir / "resolved_config.txt", o.resolved());
    os << "generated " << describe(ds) << "\n";
    os << "dataset fingerprint " << hex64(dataset_fingerprint(ds)) << "\n";
    return ok;
  }
};

struct TrainCmd
{
  std::string dataset;
  TrainFlags flags;
  std::string format = "binary";
  std::string out;

  void add(Options &o)
  {
    o.positional("dataset", dataset, "dataset directory or binary file");
    flags.add(o, true);
    o.option("format", format, "checkpoint encoding: binary or text");
    o.option("out,-o", out, "output directory");
  }

  int run(Options &o, std::ostream &os, std::ostream &es)
  {
    require(!dataset.empty(), "train needs a dataset");
    require(!out.empty(), "train needs an output directory (-o)");
    require(format == "binary" || format == "text", "--format must be binary or text");
    flags.apply_paper_scale(o);
    TrainConfig const config = flags.config();
    TrajectoryDataset const ds = load_dataset(dataset);
    os << "dataset: " << describe(ds) << "\n";
    CheckpointEncoding const enc = format == "binary" ? CheckpointEncoding::Binary : CheckpointEncoding::Text;
    fs::path const dir(out);
    std::optional<Checkpoint> result;
    try {
      print_dof(init_model(config, ds), ds.grid.steps(), os);
      result = train_with_progress(ds, config, os);
    } catch (TrainingDiverged const &e) {
      save_checkpoint(e.last_good(), dir / "checkpoint.sanode", enc);
      io::write_file(dir / "resolved_config.txt", o.resolved());
      es << "error: " << e.what() << "; last good checkpoint (epoch " << e.last_good().epoch << ") written to "
         << (dir / "checkpoint.sanode").string() << "\n";
      return numeric;
    }
    Checkpoint const &ck = *result;
    LossReport const final_loss = loss(ck.model, ds, config.lambda);
    ArtifactSet arts;
    arts.push_back({"checkpoint.sanode", checkpoint_to_string(ck, enc)});
    arts.push_back(loss_history_csv(ck.history));
    arts.push_back(loss_history_plot());
    arts.push_back({"resolved_config.txt", o.resolved()});
    emit(arts, dir);
    char buf[160];
    std::snprintf(buf, sizeof buf, "final training loss %.6e (data %.6e, reg %.6e)\n", final_loss.total,
                  final_loss.data_term, final_loss.reg_term);
    os << buf << "checkpoint written to " << (dir / "checkpoint.sanode").string() << "\n";
    return ok;
  }
};

struct EvalCmd
{
  std::string checkpoint;
  std::string dataset;
  std::string out;

  void add(Options &o)
  {
    o.positional("checkpoint", checkpoint, "checkpoint file");
    o.positional("dataset", dataset, "dataset directory or binary file");
    o.option("out,-o", out, "output directory");
  }

  int run(Options const &o, std::ostream &os, std::ostream &es)
  {
    require(!checkpoint.empty() && !dataset.empty(), "eval needs a checkpoint and a dataset");
    require(!out.empty(), "eval needs an output directory (-o)");
    Checkpoint const ck = load_checkpoint(checkpoint);
    TrajectoryDataset const ds = load_dataset(dataset);
    if (auto w = fingerprint_warning(ck, ds)) {
      es << "warning: " << *w << "\n";
    }
    ErrorReport const r = error_stats(as_field(ck.model), ds);
    ArtifactSet arts;
    arts.push_back(error_curves_csv(r));
    arts.push_back(trajectory_errors_csv(r));
    arts.push_back(trajectories_csv(r, ds));
    arts.push_back(error_curves_plot());
    if (ds.dim() == 2) {
      arts.push_back(trajectories_plot());
    }
    arts.push_back({"resolved_config.txt", o.resolved()});
    emit(arts, out);
    char buf[128];
    std::snprintf(buf, sizeof buf, "e_max = %.6e\ne_T = %.6e\n", r.summary.e_max, r.summary.e_T);
    os << buf;
    return ok;
  }
};

struct CompareCmd
{
  std::string dataset;
  std::vector<std::string> checkpoints;
  std::string out;

  void add(Options &o)
  {
    o.positional("dataset", dataset, "dataset directory or binary file");
    o.positional("checkpoints", checkpoints, "checkpoint files");
    o.option("out,-o", out, "output directory");
  }

  int run(Options const &o, std::ostream &os, std::ostream &es)
  {
    require(!dataset.empty() && !checkpoints.empty(), "compare needs a dataset and at least one checkpoint");
    require(!out.empty(), "compare needs an output directory (-o)");
    TrajectoryDataset const ds = load_dataset(dataset);
    std::vector<Model> models;
    for (auto const &path : checkpoints) {
      Checkpoint ck = load_checkpoint(path);
      if (auto w = fingerprint_warning(ck, ds)) {
        es << "warning: " << path << ": " << *w << "\n";
      }
      models.push_back(std::move(ck.model));
    }
    auto const rows = build_comparison(models, ds);
    Artifact const table = comparison_csv(rows);
    emit({table, {"resolved_config.txt", o.resolved()}}, out);
    os << table.content;
    return ok;
  }
};

struct TransportCmd
{
  std::string system = "transport-sin";
  std::string checkpoint;
  TrainFlags flags;
  double train_lo = -4.0;
  double train_hi = 4.0;
  double train_spacing = 0.2;
  double t1 = 0.0;
  double dt = 0.05;
  double grid_lo = -4.0;
  double grid_hi = 4.0;
  Index grid_n = 81;
  double curve_dt = 0.25;
  std::string snapshots = "0,1,2,3,4,5";
  Index w1 = 0;
  std::string out;

  void add(Options &o)
  {
    o.option("system", system, "transport-sin or doswell");
    o.option("checkpoint", checkpoint, "use this SA checkpoint instead of training");
    flags.add(o, false);
    o.option("train-lo", train_lo, "lower bound of the initial-point lattice");
    o.option("train-hi", train_hi, "upper bound of the initial-point lattice");
    o.option("train-spacing", train_spacing, "spacing of the initial-point lattice");
    o.option("t1", t1, "final time (0 selects the system's horizon)");
    o.option("dt", dt, "time step of the training data and of the characteristics");
    o.option("grid-lo", grid_lo, "lower bound of the density grid");
    o.option("grid-hi", grid_hi, "upper bound of the density grid");
    o.option("grid-n", grid_n, "density grid cells per axis");
    o.option("curve-dt", curve_dt, "spacing of the error-curve times");
    o.option("snapshots", snapshots, "comma-separated times of the emitted density grids");
    o.option("w1", w1, "points per cloud for the empirical W1 series (0 = off)");
    o.option("out,-o", out, "output directory");
  }

  int run(Options &o, std::ostream &os, std::ostream &es)
  {
    require(!out.empty(), "transport needs an output directory (-o)");
    SystemId id;
    try {
      id = parse_system_id(system);
    } catch (DomainError const &e) {
      throw UsageError(e.what());
    }
    require(id == SystemId::TransportSinField || id == SystemId::Doswell,
            "transport supports the transport-sin and doswell systems");
    BenchmarkSystem const sys = make_system(id);
    if (t1 == 0.0) {
      t1 = sys.horizon;
    }
    if (!o.given("activation")) {
      flags.activation = id == SystemId::Doswell ? "sigmoid" : "relu";
    }
    flags.apply_paper_scale(o);
    require(t1 > 0 && dt > 0 && curve_dt > 0, "times and steps must be positive");
    require(grid_n >= 1 && grid_hi > grid_lo, "invalid density grid");
    require(train_spacing > 0 && train_hi >= train_lo, "invalid training lattice");
    require(w1 >= 0 && w1 <= w1_max_points, "--w1 must lie in [0, " + std::to_string(w1_max_points) + "]");
    require(w1 == 0 || id == SystemId::TransportSinField,
            "the W1 series needs a non-negative initial density (transport-sin only)");
    TimeGrid grid(0.0, 1.0, 1);
    try {
      grid = TimeGrid::with_step(0.0, t1, dt);
    } catch (DomainError const &e) {
      throw UsageError(e.what());
    }
    std::vector<double> const snaps = parse_times(snapshots);
    TrainConfig config = flags.config();
    config.model = ModelKind::SemiAutonomous;

    TrajectoryDataset ds =
      generate_dataset(sys.rhs, to_string(id), lattice_points(2, train_lo, train_hi, train_spacing), grid, flags.seed);
    ds.train.clear();
    ds.test.clear();
    for (Index k = 0; k < ds.size(); ++k) {
      ds.train.push_back(k);
    }
    os << "characteristic data: " << describe(ds) << "\n";

    fs::path const dir(out);
    ArtifactSet arts;
    std::optional<Checkpoint> loaded;
    if (!checkpoint.empty()) {
      loaded = load_checkpoint(checkpoint);
      if (!std::holds_alternative<SaField>(loaded->model)) {
        throw UnsupportedField("transport needs a semi-autonomous model; the checkpoint holds a vanilla model");
      }
      if (auto w = fingerprint_warning(*loaded, ds)) {
        es << "warning: " << *w << "\n";
      }
    } else {
      try {
        loaded = train_with_progress(ds, config, os);
      } catch (TrainingDiverged const &e) {
        save_checkpoint(e.last_good(), dir / "checkpoint.sanode");
        es << "error: " << e.what() << "\n";
        return numeric;
      }
      arts.push_back({"checkpoint.sanode", checkpoint_to_string(*loaded)});
      arts.push_back(loss_history_csv(loaded->history));
    }
    FieldHandle const learned = as_field(loaded->model);

    Density2D rho_train = id == SystemId::Doswell ? Density2D(densities::tanh_y) : Density2D(densities::gaussian_narrow);
    Density2D rho_test = id == SystemId::Doswell ? Density2D(densities::tanh_10y) : Density2D(densities::gaussian_wide);
    GridSpec const gs{grid_lo, grid_hi, grid_lo, grid_hi, grid_n, grid_n};
    double const norm_train = l1_norm(sample_density(rho_train, gs));
    double const norm_test = l1_norm(sample_density(rho_test, gs));

    auto const curve_steps = static_cast<Index>(std::floor(t1 / curve_dt + 1e-9));
    Vector times(curve_steps + 1);
    for (Index i = 0; i <= curve_steps; ++i) {
      times[i] = std::min(t1, static_cast<double>(i) * curve_dt);
    }
    Vector e_train(times.size()), e_test(times.size());
    for (Index i = 0; i < times.size(); ++i) {
      CharacteristicMap const map = characteristic_map(learned, gs, times[i], dt);
      e_train[i] = l1_error(apply_density(map, rho_train), exact_density_grid(sys, rho_train, gs, times[i]), norm_train);
      e_test[i] = l1_error(apply_density(map, rho_test), exact_density_grid(sys, rho_test, gs, times[i]), norm_test);
      char buf[128];
      std::snprintf(buf, sizeof buf, "t = %-6g L1 error train %.4e test %.4e\n", times[i], e_train[i], e_test[i]);
      os << buf;
    }
    arts.push_back(time_series_csv(times, {"train_error", "test_error"}, {e_train, e_test}, "l1_errors.csv"));
    arts.push_back(time_series_plot("l1_errors.csv", {"train_error", "test_error"}, "normalized L1 error",
                                    "l1_errors.gp"));

    for (double t : snaps) {
      require(t <= t1 + 1e-12, "snapshot time " + stamp(t) + " exceeds the final time");
      std::string const tag = "t" + stamp(t);
      GridDensity const approx = reconstruct_density(learned, rho_test, gs, t, dt);
      GridDensity const exact = exact_density_grid(sys, rho_test, gs, t);
      arts.push_back(density_artifact(approx, "density_learned_" + tag + ".csv"));
      arts.push_back(density_plot(approx, "density_learned_" + tag + ".csv", "density_learned_" + tag + ".gp"));
      arts.push_back(density_artifact(exact, "density_exact_" + tag + ".csv"));
      arts.push_back(density_plot(exact, "density_exact_" + tag + ".csv", "density_exact_" + tag + ".gp"));
    }

    if (w1 > 0) {
      RejectionSampler const sampler{rho_train, grid_lo, grid_hi, grid_lo, grid_hi, 1.0};
      PointCloud const start = sampler.sample(w1, flags.seed);
      Vector w(times.size());
      for (Index i = 0; i < times.size(); ++i) {
        PointCloud const model_cloud = push_forward(learned, start, times[i], dt);
        PointCloud exact_cloud{Matrix(start.size(), 2)};
        for (Index k = 0; k < start.size(); ++k) {
          exact_cloud.points.row(k) = exact_flow(sys, start.points.row(k).transpose(), times[i]).transpose();
        }
        w[i] = w1_empirical(model_cloud, exact_cloud);
      }
      arts.push_back(time_series_csv(times, {"w1"}, {w}, "w1.csv"));
      arts.push_back(time_series_plot("w1.csv", {"w1"}, "empirical W1", "w1.gp"));
      os << "sup_t W1 = " << io::format_double(w.maxCoeff()) << "\n";
    }
    arts.push_back({"resolved_config.txt", o.resolved()});
    emit(arts, dir);
    char buf[128];
    std::snprintf(buf, sizeof buf, "max L1 error train %.4e test %.4e\n", e_train.maxCoeff(), e_test.maxCoeff());
    os << buf;
    return ok;
  }
};

int dispatch(std::vector<std::string> const &args, std::ostream &os, std::ostream &es)
{
  CLI::App app{"Semi-autonomous neural ODEs: data generation, training, evaluation and transport", "sanode"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "configuration file with 'section.key = value' lines");

  CLI::App *gen = app.add_subcommand("generate", "integrate a system from a lattice of initial points");
  CLI::App *train = app.add_subcommand("train", "fit a model to a dataset");
  CLI::App *eval = app.add_subcommand("eval", "error statistics of a checkpoint on a dataset");
  CLI::App *compare = app.add_subcommand("compare", "comparison table of several checkpoints");
  CLI::App *transport = app.add_subcommand("transport", "learn a transport flow and reconstruct densities");

  Options gen_opts(gen, "generate"), train_opts(train, "train"), eval_opts(eval, "eval"),
    compare_opts(compare, "compare"), transport_opts(transport, "transport");
  GenerateCmd gen_cmd;
  TrainCmd train_cmd;
  EvalCmd eval_cmd;
  CompareCmd compare_cmd;
  TransportCmd transport_cmd;
  gen_cmd.add(gen_opts);
  train_cmd.add(train_opts);
  eval_cmd.add(eval_opts);
  compare_cmd.add(compare_opts);
  transport_cmd.add(transport_opts);

  std::vector<char const *> argv;
  for (auto const &a : args) {
    argv.push_back(a.c_str());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (CLI::ParseError const &e) {
    int const code = app.exit(e, os, es);
    return code == 0 ? ok : usage;
  }

  std::map<std::string, std::string> config;
  if (!config_path.empty()) {
    config = parse_config(io::read_file(config_path));
  }
  if (gen->parsed()) {
    gen_opts.merge(config);
    return gen_cmd.run(gen_opts, os);
  }
  if (train->parsed()) {
    train_opts.merge(config);
    return train_cmd.run(train_opts, os, es);
  }
  if (eval->parsed()) {
    eval_opts.merge(config);
    return eval_cmd.run(eval_opts, os, es);
  }
  if (compare->parsed()) {
    compare_opts.merge(config);
    return compare_cmd.run(compare_opts, os, es);
  }
  transport_opts.merge(config);
  return transport_cmd.run(transport_opts, os, es);
}

} // namespace

int run(std::vector<std::string> const &args, std::ostream &out, std::ostream &err)
{
  try {
    return dispatch(args, out, err);
  } catch (UsageError const &e) {
    err << "usage error: " << e.what() << "\n";
    return usage;
  } catch (ParseError const &e) {
    err << "parse error: " << e.what() << "\n";
    return usage;
  } catch (ShapeError const &e) {
    err << "error: " << e.what() << "\n";
    return usage;
  } catch (UnsupportedField const &e) {
    err << "error: " << e.what() << "\n";
    return usage;
  } catch (IoError const &e) {
    err << "I/O error: " << e.what() << "\n";
    return io;
  } catch (std::filesystem::filesystem_error const &e) {
    err << "I/O error: " << e.what() << "\n";
    return io;
  } catch (TrainingDiverged const &e) {
    err << "error: " << e.what() << "\n";
    return numeric;
  } catch (IntegrationBlowup const &e) {
    err << "numeric failure: " << e.what() << "\n";
    return numeric;
  } catch (DomainError const &e) {
    err << "numeric failure: " << e.what() << "\n";
    return numeric;
  } catch (Error const &e) {
    err << "error: " << e.what() << "\n";
    return numeric;
  }
}

} // namespace sanode::cli
