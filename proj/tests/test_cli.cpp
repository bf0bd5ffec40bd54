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
#include "sanode/cli.hpp"
#include "sanode/transport.hpp"
#include "support.hpp"

#include "../src/io_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace sanode {
namespace {

using testing::TempDir;

struct Result
{
  int code;
  std::string out;
  std::string err;
};

Result sanode(std::vector<std::string> args)
{
  args.insert(args.begin(), "sanode");
  std::ostringstream out, err;
  int const code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

bool contains(std::string const &s, std::string const &part)
{
  return s.find(part) != std::string::npos;
}

class Cli : public ::testing::Test
{
protected:
  static void SetUpTestSuite()
  {
    dir_ = new TempDir("cli");
    Result const r = sanode({"generate", "--system", "dissipative", "--seed", "0", "-o", data()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite()
  {
    delete dir_;
    dir_ = nullptr;
  }
  static std::string data() { return (*dir_ / "data").string(); }
  static std::string path(std::string const &name) { return (*dir_ / name).string(); }

  static TempDir *dir_;
};

TempDir *Cli::dir_ = nullptr;

TEST(ParseConfig, SectionsAndKeys)
{
  auto const c = cli::parse_config("# comment\ntrain.P = 20\n\n[generate]\nseed=3\n  spacing = 0.25  \n");
  EXPECT_EQ(c.at("train.P"), "20");
  EXPECT_EQ(c.at("generate.seed"), "3");
  EXPECT_EQ(c.at("generate.spacing"), "0.25");
  EXPECT_THROW(cli::parse_config("P = 20\n"), cli::UsageError);
  EXPECT_THROW(cli::parse_config("train.P\n"), cli::UsageError);
  EXPECT_THROW(cli::parse_config("train.P = 1\ntrain.P = 2\n"), cli::UsageError);
  EXPECT_THROW(cli::parse_config("[train\n"), cli::UsageError);
}

TEST_F(Cli, GenerateDefaultDataset)
{
  Result const r = sanode({"generate", "--system", "dissipative", "--seed", "0", "-o", path("gen"), "--format", "binary"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "81 trajectories")) << r.out;
  EXPECT_TRUE(contains(r.out, "train 40, test 41")) << r.out;
  TrajectoryDataset const a = read_dataset(path("gen") + "/dataset.bin");
  TrajectoryDataset const b = read_dataset(data());
  EXPECT_EQ(dataset_fingerprint(a), dataset_fingerprint(b));
}

TEST_F(Cli, GenerateFromFieldFile)
{
  io::write_file(path("ex5.f"), "d=2\nsin(x1)/(1+t^2)\nsin(x2)/(1+t^2)\n");
  Result const r = sanode({"generate", "--field", path("ex5.f"), "--t1", "5", "--dt", "0.05", "-o", path("ex5")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_dataset(path("ex5")).grid.steps(), 100);

  io::write_file(path("bad.f"), "d=2\nsin(x1)\ncos(x3)\n");
  Result const bad = sanode({"generate", "--field", path("bad.f"), "-o", path("bad")});
  EXPECT_EQ(bad.code, cli::usage);
  EXPECT_TRUE(contains(bad.err, "line 3")) << bad.err;
}

TEST_F(Cli, UsageErrors)
{
  EXPECT_EQ(sanode({}).code, cli::usage);
  EXPECT_EQ(sanode({"frobnicate"}).code, cli::usage);
  EXPECT_EQ(sanode({"generate", "-o", path("x")}).code, cli::usage);
  EXPECT_EQ(sanode({"generate", "--system", "lorenz", "-o", path("x")}).code, cli::usage);
  EXPECT_EQ(sanode({"train", data(), "--P", "many", "-o", path("x")}).code, cli::usage);
  EXPECT_EQ(sanode({"train", data(), "--lr", "-1", "-o", path("x")}).code, cli::usage);
  EXPECT_EQ(sanode({"train", data(), "--activation", "tanh", "-o", path("x")}).code, cli::usage);
  EXPECT_EQ(sanode({"--help"}).code, cli::ok);
}

TEST_F(Cli, IoErrors)
{
  EXPECT_EQ(sanode({"train", path("missing"), "-o", path("x")}).code, cli::io);
  EXPECT_EQ(sanode({"eval", path("missing.sanode"), data(), "-o", path("x")}).code, cli::io);
  EXPECT_EQ(sanode({"--config", path("missing.cfg"), "train", data(), "-o", path("x")}).code, cli::io);
}

TEST_F(Cli, TrainZeroEpochsIsInitialization)
{
  Result const r = sanode({"train", data(), "--P", "10", "--epochs", "0", "--seed", "4", "-o", path("init")});
  ASSERT_EQ(r.code, 0) << r.err;
  Checkpoint const ck = load_checkpoint(path("init") + "/checkpoint.sanode");
  TrainConfig c;
  c.neurons = 10;
  c.seed = 4;
  EXPECT_EQ(model_theta(ck.model), model_theta(init_model(c, read_dataset(data()))));
  EXPECT_TRUE(contains(io::read_file(path("init") + "/manifest.csv"), "checkpoint.sanode"));
}

TEST_F(Cli, VanillaDofEchoed)
{
  Result const r = sanode({"train", data(), "--model", "vanilla", "--P", "100", "--epochs", "0", "-o", path("van")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "dof_paper = 50000")) << r.out;
  Result const sa = sanode({"train", data(), "--P", "100", "--epochs", "0", "-o", path("sa0")});
  EXPECT_TRUE(contains(sa.out, "dof_paper = 1200")) << sa.out;
}

TEST_F(Cli, TrainEvalCompare)
{
  Result const t = sanode({"train", data(), "--P", "12", "--epochs", "20", "--lr", "1e-2", "--format", "text", "-o",
                           path("run")});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_TRUE(contains(io::read_file(path("run") + "/checkpoint.sanode"), "encoding=text"));
  Result const e = sanode({"eval", path("run") + "/checkpoint.sanode", data(), "-o", path("eval")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_TRUE(contains(e.out, "e_max = ")) << e.out;
  EXPECT_TRUE(contains(e.out, "e_T = ")) << e.out;
  EXPECT_TRUE(e.err.empty()) << e.err;
  EXPECT_FALSE(io::read_file(path("eval") + "/error_curves.csv").empty());

  Result const gen = sanode({"generate", "--system", "pendulum", "--t1", "2", "-o", path("pend")});
  ASSERT_EQ(gen.code, 0) << gen.err;
  Result const other = sanode({"eval", path("run") + "/checkpoint.sanode", path("pend"), "-o", path("eval2")});
  EXPECT_EQ(other.code, 0) << other.err;
  EXPECT_TRUE(contains(other.err, "warning")) << other.err;

  Result const v = sanode({"train", data(), "--model", "vanilla", "--P", "100", "--epochs", "0", "-o", path("van")});
  ASSERT_EQ(v.code, 0) << v.err;
  Result const c = sanode({"compare", data(), path("run") + "/checkpoint.sanode", path("van") + "/checkpoint.sanode",
                           "-o", path("cmp")});
  ASSERT_EQ(c.code, 0) << c.err;
  std::string const table = io::read_file(path("cmp") + "/comparison.csv");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 3);
  EXPECT_TRUE(contains(table, "100,vanilla,"));
  EXPECT_TRUE(contains(table, ",50000,50000"));
}

TEST_F(Cli, ResolvedConfigReproducesRun)
{
  Result const a = sanode({"train", data(), "--P", "8", "--epochs", "15", "--seed", "2", "-o", path("rep1")});
  ASSERT_EQ(a.code, 0) << a.err;
  std::string cfg = io::read_file(path("rep1") + "/resolved_config.txt");
  auto const at = cfg.find("train.out = ");
  ASSERT_NE(at, std::string::npos);
  cfg = cfg.substr(0, at) + "train.out = " + path("rep2") + "\n" + cfg.substr(cfg.find('\n', at) + 1);
  io::write_file(path("rep.cfg"), cfg);
  Result const b = sanode({"--config", path("rep.cfg"), "train"});
  ASSERT_EQ(b.code, 0) << b.err;
  for (char const *f : {"checkpoint.sanode", "loss_history.csv", "loss_history.gp"}) {
    EXPECT_EQ(io::read_file(path("rep1") + "/" + f), io::read_file(path("rep2") + "/" + f)) << f;
  }
}

TEST_F(Cli, ConfigFileFillsMissingFlags)
{
  io::write_file(path("c.cfg"), "[train]\nP = 6\nepochs = 3\nautonomous = true\n");
  Result const r = sanode({"--config", path("c.cfg"), "train", data(), "--epochs", "2", "-o", path("cfg")});
  ASSERT_EQ(r.code, 0) << r.err;
  Checkpoint const ck = load_checkpoint(path("cfg") + "/checkpoint.sanode");
  EXPECT_EQ(ck.config.neurons, 6);
  EXPECT_EQ(ck.epoch, 2);
  EXPECT_TRUE(ck.config.autonomous);
  io::write_file(path("typo.cfg"), "train.neurons = 6\n");
  EXPECT_EQ(sanode({"--config", path("typo.cfg"), "train", data(), "-o", path("cfg")}).code, cli::usage);
}

TEST_F(Cli, DivergenceExitsNumeric)
{
  Result const r = sanode({"train", data(), "--P", "10", "--epochs", "20", "--lr", "1e4", "-o", path("div")});
  EXPECT_EQ(r.code, cli::numeric);
  EXPECT_TRUE(contains(r.err, "epoch")) << r.err;
  EXPECT_NO_THROW(load_checkpoint(path("div") + "/checkpoint.sanode"));
}

TEST_F(Cli, TransportEmitsCurves)
{
  Result const r = sanode({"transport", "--system", "transport-sin", "--P", "10", "--epochs", "5", "--train-spacing",
                           "1", "--grid-n", "9", "--curve-dt", "1", "--snapshots", "0,2", "--w1", "8", "-o",
                           path("tr")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::string const curves = io::read_file(path("tr") + "/l1_errors.csv");
  EXPECT_EQ(curves.substr(0, curves.find('\n')), "t,train_error,test_error");
  EXPECT_EQ(std::count(curves.begin(), curves.end(), '\n'), 7);
  EXPECT_FALSE(io::read_file(path("tr") + "/w1.csv").empty());
  EXPECT_NO_THROW(read_density_csv(path("tr") + "/density_learned_t2.csv"));

  Result const again = sanode({"transport", "--checkpoint", path("tr") + "/checkpoint.sanode", "--train-spacing", "1",
                               "--grid-n", "9", "--curve-dt", "1", "--snapshots", "2", "-o", path("tr2")});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(io::read_file(path("tr2") + "/l1_errors.csv"), curves);
}

TEST_F(Cli, TransportDoswellDefaultsToSigmoid)
{
  Result const r = sanode({"transport", "--system", "doswell", "--P", "6", "--epochs", "2", "--train-spacing", "2",
                           "--grid-n", "5", "--curve-dt", "2", "--snapshots", "4", "-o", path("dos")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(io::read_file(path("dos") + "/resolved_config.txt"), "transport.activation = sigmoid"));
  EXPECT_EQ(load_checkpoint(path("dos") + "/checkpoint.sanode").config.activation, Activation::Sigmoid);
}

TEST_F(Cli, TransportRejectsVanilla)
{
  Result const v = sanode({"train", data(), "--model", "vanilla", "--P", "4", "--epochs", "0", "-o", path("van4")});
  ASSERT_EQ(v.code, 0) << v.err;
  Result const r =
    sanode({"transport", "--checkpoint", path("van4") + "/checkpoint.sanode", "--grid-n", "5", "-o", path("trv")});
  EXPECT_EQ(r.code, cli::usage);
  EXPECT_TRUE(contains(r.err, "vanilla")) << r.err;
  EXPECT_EQ(sanode({"transport", "--system", "pendulum", "-o", path("trp")}).code, cli::usage);
}

} // namespace
} // namespace sanode
