#include <sstream>

#include "doctest.h"
#include "hotspot/cli.hpp"
#include "hotspot/dataset.hpp"
#include "support/fixtures.hpp"

using namespace hotspot;
using namespace hotspot::testing;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("synth writes bundles and a catalog") {
  TempDir dir("cli-synth");
  const auto r = run({"synth", "--out", dir.path().string(), "--events", "3", "--seed", "7"});
  CHECK(r.code == 0);
  const auto events = read_event_catalog(dir / "events.json");
  REQUIRE(events.size() == 3);
  for (const auto& e : events) CHECK_NOTHROW(read_crop_bundle(dir / e.event_id));
}

TEST_CASE("unknown subcommand and bad options fail") {
  CHECK(run({"frobnicate"}).code != 0);
  CHECK(run({}).code != 0);
  CHECK(run({"synth"}).code != 0);  // --out is required
  TempDir dir("cli-bad");
  const auto r = run({"synth", "--out", dir.path().string(), "--grid", "8by8"});
  CHECK(r.code != 0);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("runtime errors are reported, not thrown") {
  TempDir dir("cli-missing");
  const auto r = run({"evaluate", "--checkpoint", (dir / "nope").string(), "--dataset", (dir / "nope").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("pipeline: synth, build, train, evaluate, experiment") {
  TempDir dir("cli-pipeline");
  const std::string crops = (dir / "crops").string(), ds = (dir / "ds").string();
  REQUIRE(run({"synth", "--out", crops, "--events", "3", "--grid", "6x6", "--steps", "96", "--seed", "3"}).code == 0);
  REQUIRE(run({"build-dataset", "--events", crops + "/events.json", "--crops", crops, "--out", ds, "--ratios",
               "0.34,0.33,0.33", "--seed", "3"})
              .code == 0);
  const Dataset d = load_dataset(ds);
  CHECK_FALSE(d.train.empty());

  spit(dir / "model.json", R"({"d_model": 8, "encoder_layers": 1, "decoder_layers": 1, "attention_heads": 2})");
  const std::string model = (dir / "model.json").string();
  const auto train = run({"train", "--dataset", ds, "--out", (dir / "ck").string(), "--model-config", model,
                          "--epochs", "2", "--seed", "1"});
  REQUIRE(train.code == 0);
  for (const char* f : {"header.json", "weights.bin", "history.csv", "run_config.json"}) {
    CHECK_MESSAGE(std::filesystem::exists(dir / "ck" / f), f);
  }
  const std::string history = slurp(dir / "ck/history.csv");
  CHECK(std::count(history.begin(), history.end(), '\n') == 3);

  const auto eval = run({"evaluate", "--checkpoint", (dir / "ck").string(), "--dataset", ds, "--split", "test"});
  CHECK(eval.code == 0);
  CHECK(eval.out.find("split=test") != std::string::npos);
  CHECK(eval.out.find("f1=") != std::string::npos);

  const auto exp = run({"experiment", "--dataset", ds, "--out", (dir / "table.txt").string(), "--schedulers",
                        "step,cosine", "--seeds", "1,2", "--epochs", "1", "--model-config", model});
  CHECK(exp.code == 0);
  const std::string table = slurp(dir / "table.txt");
  CHECK(table.find("Step LR") != std::string::npos);
  CHECK(table.find("Cosine") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "table.csv"));
}
