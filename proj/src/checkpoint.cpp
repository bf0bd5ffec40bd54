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

#include "sanode/checkpoint.hpp"

#include "io_util.hpp"
#include "sanode/hash.hpp"

#include <map>

namespace sanode {

namespace {

constexpr std::string_view magic = "sanode-checkpoint";

std::string header(Checkpoint const &c, CheckpointEncoding encoding)
{
  TrainConfig const &cfg = c.config;
  Vector const &theta = model_theta(c.model);
  std::string h = std::string(magic) + " " + std::to_string(Checkpoint::format_version) + "\n";
  auto kv = [&h](std::string const &k, std::string const &v) { h += k + "=" + v + "\n"; };
  kv("encoding", encoding == CheckpointEncoding::Binary ? "binary" : "text");
  kv("model", to_string(model_kind(c.model)));
  kv("neurons", std::to_string(cfg.neurons));
  kv("dim", std::to_string(model_dim(c.model)));
  kv("activation", to_string(cfg.activation));
  if (auto const *v = std::get_if<VanillaField>(&c.model)) {
    kv("steps", std::to_string(v->steps()));
    kv("t0", io::format_double(v->t0()));
    kv("t1", io::format_double(v->t1()));
  }
  kv("lr", io::format_double(cfg.lr));
  kv("epochs", std::to_string(cfg.epochs));
  kv("lambda", io::format_double(cfg.lambda));
  kv("seed", std::to_string(cfg.seed));
  kv("beta1", io::format_double(cfg.beta1));
  kv("beta2", io::format_double(cfg.beta2));
  kv("eps", io::format_double(cfg.eps));
  kv("grad_mode", to_string(cfg.grad_mode));
  kv("log_every", std::to_string(cfg.log_every));
  kv("autonomous", cfg.autonomous ? "1" : "0");
  kv("dataset_fingerprint", hex64(c.dataset_fingerprint));
  kv("epoch", std::to_string(c.epoch));
  kv("parameters", std::to_string(theta.size()));
  kv("history", std::to_string(c.history.size()));
  h += "end\n";
  return h;
}

Vector canonical(Model const &m)
{
  return std::visit([](auto const &p) { return p.to_canonical(); }, m);
}

} // namespace

std::string checkpoint_to_string(Checkpoint const &c, CheckpointEncoding encoding)
{
  std::string out = header(c, encoding);
  Vector const flat = canonical(c.model);
  if (encoding == CheckpointEncoding::Binary) {
    for (double v : flat) {
      io::put<double>(out, v);
    }
    for (double v : c.history) {
      io::put<double>(out, v);
    }
  } else {
    out += "# parameters\n";
    for (double v : flat) {
      out += io::format_double(v) + "\n";
    }
    out += "# history\n";
    for (double v : c.history) {
      out += io::format_double(v) + "\n";
    }
  }
  return out;
}

Checkpoint checkpoint_from_string(std::string const &bytes)
{
  std::string const ctx = "checkpoint";
  std::size_t pos = bytes.find('\n');
  if (pos == std::string::npos) {
    throw CorruptFile("checkpoint: missing header");
  }
  std::string_view const first(bytes.data(), pos);
  if (first.substr(0, magic.size()) != magic || first.size() <= magic.size() + 1 || first[magic.size()] != ' ') {
    throw CorruptFile("checkpoint: bad magic line");
  }
  long long const version = io::parse_int(first.substr(magic.size() + 1), ctx);
  if (version != Checkpoint::format_version) {
    throw VersionMismatch("checkpoint: format version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(Checkpoint::format_version) + ")");
  }
  std::map<std::string, std::string, std::less<>> kv;
  ++pos;
  bool ended = false;
  while (pos < bytes.size()) {
    std::size_t const nl = bytes.find('\n', pos);
    if (nl == std::string::npos) {
      break;
    }
    std::string_view const line(bytes.data() + pos, nl - pos);
    pos = nl + 1;
    if (line == "end") {
      ended = true;
      break;
    }
    std::size_t const eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw CorruptFile("checkpoint: malformed header line '" + std::string(line) + "'");
    }
    kv.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
  }
  if (!ended) {
    throw CorruptFile("checkpoint: truncated header");
  }
  auto get = [&](std::string const &key) -> std::string const & {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw CorruptFile("checkpoint: missing header field '" + key + "'");
    }
    return it->second;
  };
  auto get_int = [&](std::string const &key) { return io::parse_int(get(key), ctx); };
  auto get_double = [&](std::string const &key) { return io::parse_double(get(key), ctx); };

  Checkpoint c{TrainConfig{}, SaField(1, 1, Activation::ReLU), 0, 0, {}};
  TrainConfig &cfg = c.config;
  std::string const encoding = get("encoding");
  if (encoding != "binary" && encoding != "text") {
    throw CorruptFile("checkpoint: unknown encoding '" + encoding + "'");
  }
  Index dim = 0;
  try {
    cfg.model = parse_model_kind(get("model"));
    cfg.neurons = get_int("neurons");
    dim = get_int("dim");
    cfg.activation = parse_activation(get("activation"));
    cfg.lr = get_double("lr");
    cfg.epochs = get_int("epochs");
    cfg.lambda = get_double("lambda");
    cfg.seed = std::stoull(get("seed"));
    cfg.beta1 = get_double("beta1");
    cfg.beta2 = get_double("beta2");
    cfg.eps = get_double("eps");
    cfg.grad_mode = parse_grad_mode(get("grad_mode"));
    cfg.log_every = get_int("log_every");
    cfg.autonomous = get("autonomous") == "1";
    cfg.validate();
  } catch (DomainError const &e) {
    throw CorruptFile(std::string("checkpoint: invalid configuration: ") + e.what());
  } catch (std::logic_error const &) {
    throw CorruptFile("checkpoint: invalid configuration value");
  }
  if (dim < 1) {
    throw CorruptFile("checkpoint: invalid dimension");
  }
  std::string const &fp = get("dataset_fingerprint");
  if (fp.size() != 16 || fp.find_first_not_of("0123456789abcdef") != std::string::npos) {
    throw CorruptFile("checkpoint: malformed dataset fingerprint");
  }
  c.dataset_fingerprint = std::stoull(fp, nullptr, 16);
  c.epoch = get_int("epoch");
  long long const n_params = get_int("parameters");
  long long const n_history = get_int("history");
  if (n_params < 0 || n_history < 0 || c.epoch < 0) {
    throw CorruptFile("checkpoint: negative counts");
  }

  Vector flat(n_params);
  std::vector<double> history(n_history);
  if (encoding == "binary") {
    io::ByteReader in(std::string_view(bytes).substr(pos), ctx);
    for (auto &v : flat) {
      v = in.get<double>();
    }
    for (auto &v : history) {
      v = in.get<double>();
    }
    in.expect_end();
  } else {
    if (bytes.empty() || bytes.back() != '\n') {
      throw CorruptFile("checkpoint: text payload is truncated");
    }
    auto const rows = io::lines(std::string_view(bytes).substr(pos));
    if (static_cast<long long>(rows.size()) != n_params + n_history + 2 || rows[0] != "# parameters" ||
        rows[n_params + 1] != "# history") {
      throw CorruptFile("checkpoint: text payload does not match the declared counts");
    }
    for (long long i = 0; i < n_params; ++i) {
      flat[i] = io::parse_double(rows[1 + i], ctx);
    }
    for (long long i = 0; i < n_history; ++i) {
      history[i] = io::parse_double(rows[n_params + 2 + i], ctx);
    }
  }

  try {
    if (cfg.model == ModelKind::SemiAutonomous) {
      c.model = SaField::from_canonical(cfg.neurons, dim, cfg.activation, flat);
    } else {
      Index const steps = get_int("steps");
      if (steps < 1) {
        throw CorruptFile("checkpoint: invalid step count");
      }
      c.model = VanillaField::from_canonical(cfg.neurons, dim, steps, get_double("t0"), get_double("t1"),
                                             cfg.activation, flat);
    }
  } catch (ShapeError const &e) {
    throw CorruptFile(std::string("checkpoint: ") + e.what());
  }
  c.history = std::move(history);
  return c;
}

void save_checkpoint(Checkpoint const &c, std::filesystem::path const &path, CheckpointEncoding encoding)
{
  io::write_file(path, checkpoint_to_string(c, encoding));
}

Checkpoint load_checkpoint(std::filesystem::path const &path)
{
  std::string const bytes = io::read_file(path);
  try {
    return checkpoint_from_string(bytes);
  } catch (CorruptFile const &e) {
    throw CorruptFile(path.string() + ": " + e.what());
  } catch (VersionMismatch const &e) {
    throw VersionMismatch(path.string() + ": " + e.what());
  }
}

std::optional<std::string> fingerprint_warning(Checkpoint const &c, TrajectoryDataset const &ds)
{
  std::uint64_t const fp = dataset_fingerprint(ds);
  if (fp == c.dataset_fingerprint) {
    return std::nullopt;
  }
  return "checkpoint was trained on dataset " + hex64(c.dataset_fingerprint) + " but is evaluated on " + hex64(fp);
}

} // namespace sanode
