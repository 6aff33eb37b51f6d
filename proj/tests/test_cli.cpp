// End-to-end tests of the evidx binary: every subcommand, the documented
// exit codes, and the reproduce contract.
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <string>

#include "evidx/io.hpp"
#include "evidx/phantom.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace evidx;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(EVIDX_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

struct CliFixture {
  fs::path root, data, labels, run_dir;

  CliFixture() {
    root = support::fresh_temp_dir("cli");
    data = root / "data";
    labels = root / "labels.json";
    run_dir = root / "run0";

    PhantomSpec spec = support::small_phantom_spec(2025);
    spec.n_nc = 24;
    spec.n_mci = 10;
    spec.n_ad = 20;
    write_phantom_spec(root / "spec.json", spec);
  }
  ~CliFixture() { fs::remove_all(root); }
};

}  // namespace

TEST_CASE("cli: full workflow wires every subcommand together") {
  CliFixture fx;

  CHECK(run("phantom --spec " + (fx.root / "spec.json").string() + " --out " +
            fx.data.string()) == 0);
  CHECK(fs::exists(fx.data / "manifest.jsonl"));
  CHECK(fs::exists(fx.data / "atlas.json"));

  CHECK(run("label --data " + fx.data.string() + " --out " + fx.labels.string() +
            " --min-group-size 3 --pool all") == 0);
  CHECK(fs::exists(fx.labels));
  CHECK(fs::exists(fx.root / "labels.thresholds.csv"));

  const std::string train_common = " --data " + fx.data.string() + " --labels " +
                                   fx.labels.string() +
                                   " --epochs 1 --epochs-pretrain 1 --batch-size 8"
                                   " --lr 1e-3 --seed 0";
  CHECK(run("train --strategy eat" + train_common + " --out " + fx.run_dir.string()) == 0);
  CHECK(fs::exists(fx.run_dir / "manifest.json"));
  CHECK(fs::exists(fx.run_dir / "metrics.json"));
  CHECK(fs::exists(fx.run_dir / "checkpoint.bin"));

  CHECK(run("eval --checkpoint " + (fx.run_dir / "checkpoint.bin").string() + " --data " +
            fx.data.string() + " --split test --seed 0 --out " +
            (fx.root / "eval.json").string()) == 0);
  CHECK(fs::exists(fx.root / "eval.json"));

  CHECK(run("counterfactual --checkpoint " + (fx.run_dir / "checkpoint.bin").string() +
            " --data " + fx.data.string() + " --labels " + fx.labels.string() +
            " --seed 0 --out " + (fx.root / "cf").string()) == 0);
  CHECK(fs::exists(fx.root / "cf" / "pairs.csv"));
  CHECK(fs::exists(fx.root / "cf" / "histogram.csv"));

  CHECK(run("sweep --data " + fx.data.string() + " --labels " + fx.labels.string() +
            " --strategies random,eat --fractions 0.5,1.0 --seeds 0" +
            " --config " + (fx.root / "sweep_config.json").string() + " --out " +
            (fx.root / "sweep").string()) == 1);  // config file does not exist yet
  io::write_text_file(fx.root / "sweep_config.json",
                      R"({"epochs":1,"epochs_pretrain":1,"batch_size":8,"learning_rate":1e-3})");
  CHECK(run("sweep --data " + fx.data.string() + " --labels " + fx.labels.string() +
            " --strategies random,eat --fractions 0.5,1.0 --seeds 0" +
            " --config " + (fx.root / "sweep_config.json").string() + " --out " +
            (fx.root / "sweep").string()) == 0);
  CHECK(fs::exists(fx.root / "sweep" / "results.csv"));
  CHECK(fs::exists(fx.root / "sweep" / "plotdata.json"));

  io::write_text_file(fx.root / "reports.csv",
                      "method,variant,accuracy,auroc,is_baseline\n"
                      "random,a,80.0,0.88,1\nours,a,85.0,0.91,0\n");
  CHECK(run("summarize --reports " + (fx.root / "reports.csv").string() + " --out " +
            (fx.root / "summary.csv").string()) == 0);
  CHECK(io::read_text_file(fx.root / "summary.csv").find("ours,85.0") !=
        std::string::npos);

  CHECK(run("plot --sweep " + (fx.root / "sweep" / "results.csv").string() + " --out " +
            (fx.root / "sweep.svg").string()) == 0);
  CHECK(run("plot --histogram " + (fx.root / "cf" / "histogram.csv").string() +
            " --out " + (fx.root / "hist.svg").string()) == 0);
  CHECK(io::read_text_file(fx.root / "sweep.svg").find("<svg") != std::string::npos);

  CHECK(run("reproduce " + fx.run_dir.string()) == 0);
}

TEST_CASE("cli: exit codes separate usage errors from domain errors") {
  CliFixture fx;
  CHECK(run("train --strategy nonsense --data d --out o") == 2);  // bad enum value
  CHECK(run("definitely-not-a-subcommand") == 2);
  CHECK(run("train --data " + fx.data.string() + " --out " + fx.run_dir.string()) ==
        1);  // data directory never created: domain error
  CHECK(run("--version") == 0);
  CHECK(run("--help") == 0);
  CHECK(run("label --help") == 0);
}

TEST_CASE("cli: config file validation reports every failing field") {
  CliFixture fx;
  CHECK(run("phantom --spec " + (fx.root / "spec.json").string() + " --out " +
            fx.data.string()) == 0);
  io::write_text_file(fx.root / "bad.json",
                      R"({"strategy":"eat","lambda_mc":-1.0,"batch_size":0})");
  const std::string cmd = std::string(EVIDX_BIN) + " train --config " +
                          (fx.root / "bad.json").string() + " --data " + fx.data.string() +
                          " --out " + fx.run_dir.string() + " 2> " +
                          (fx.root / "err.txt").string();
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 1);
  const std::string err = io::read_text_file(fx.root / "err.txt");
  CHECK(err.find("lambda_mc") != std::string::npos);
  CHECK(err.find("batch_size") != std::string::npos);
}
