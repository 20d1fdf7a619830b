#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "vxgan/png_io.hpp"
#include "vxgan/volume_io.hpp"

using namespace vxgan;
namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "vxgan_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(VXGAN_CLI_PATH) + " " + args + " > " + (kDir / "stdout.txt").string() +
                          " 2> " + (kDir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string path(const std::string& name) { return (kDir / name).string(); }

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::remove_all(kDir);
    fs::create_directories(kDir);
  }
};

}  // namespace

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("gen-phantom --out x.vxv --bogus"), 1);
  EXPECT_FALSE(slurp(kDir / "stderr.txt").empty());
  EXPECT_EQ(run("train --in a.vxv --out o --task denoise"), 1);
}

TEST_F(Cli, DataErrorsExitTwo) {
  EXPECT_EQ(run("eval --pred " + path("missing.vxv") + " --truth " + path("missing.vxv")), 2);
}

TEST_F(Cli, PhantomIsSeedReproducible) {
  ASSERT_EQ(run("gen-phantom --dims 16 32 32 --jitter 2 --noise 0.1 --seed 4 --out " + path("a.vxv") +
                " --sidecar " + path("a.txt")),
            0);
  ASSERT_EQ(run("gen-phantom --dims 16 32 32 --jitter 2 --noise 0.1 --seed 4 --out " + path("b.vxv") +
                " --sidecar " + path("b.txt")),
            0);
  EXPECT_EQ(slurp(kDir / "a.vxv"), slurp(kDir / "b.vxv"));
  EXPECT_EQ(slurp(kDir / "a.txt"), slurp(kDir / "b.txt"));
  EXPECT_TRUE(read_vxv(kDir / "a.vxv").dims() == (Dims{16, 32, 32}));
}

TEST_F(Cli, RawImportExportRoundTrip) {
  std::string bytes;
  for (int i = 0; i < 2 * 3 * 5; ++i) bytes.push_back(static_cast<char>(i * 8));
  std::ofstream(kDir / "in.raw", std::ios::binary) << bytes;
  ASSERT_EQ(run("import-raw --in " + path("in.raw") + " --dims 2 3 5 --voxel-size 30 6 6 --out " + path("r.vxv")), 0);
  ASSERT_EQ(run("export-raw --in " + path("r.vxv") + " --out " + path("out.raw")), 0);
  EXPECT_EQ(slurp(kDir / "out.raw"), bytes);
  EXPECT_EQ(read_vxv(kDir / "r.vxv").voxel_size()->z, 30.0);
}

TEST_F(Cli, EvalPrintsReportAndResliceWritesPng) {
  ASSERT_EQ(run("gen-phantom --dims 8 20 24 --seed 1 --out " + path("p.vxv")), 0);
  ASSERT_EQ(run("eval --pred " + path("p.vxv") + " --truth " + path("p.vxv")), 0);
  const std::string report = slurp(kDir / "stdout.txt");
  EXPECT_NE(report.find("mae\t0"), std::string::npos);
  EXPECT_NE(report.find("psnr_db\t999"), std::string::npos);

  ASSERT_EQ(run("reslice --in " + path("p.vxv") + " --plane yz --index 5 --out " + path("yz.png")), 0);
  const Gray8 img = read_png(kDir / "yz.png");
  EXPECT_EQ(img.height, 8);
  EXPECT_EQ(img.width, 20);
  EXPECT_EQ(run("reslice --in " + path("p.vxv") + " --plane yz --index 24 --out " + path("bad.png")), 2);
  ASSERT_EQ(run("export-png --in " + path("p.vxv") + " --index 3 --out " + path("xy.png")), 0);
  EXPECT_EQ(read_png(kDir / "xy.png").width, 24);
}

TEST_F(Cli, TrainInferEvalPipeline) {
  ASSERT_EQ(run("gen-phantom --dims 8 64 64 --jitter 1 --seed 2 --out " + path("t.vxv")), 0);
  const std::string common = " --in " + path("t.vxv") + " --steps 2 --batch 1 --width 2 --patch 58 --seed 3 --quiet";
  ASSERT_EQ(run("train --task interp --adversarial --pixel-loss --out " + path("run1") + common), 0);
  ASSERT_EQ(run("train --task interp --adversarial --pixel-loss --out " + path("run2") + common), 0);
  EXPECT_EQ(slurp(kDir / "run1" / "steps.tsv"), slurp(kDir / "run2" / "steps.tsv"));
  EXPECT_EQ(slurp(kDir / "run1" / "gen_step2.vxck"), slurp(kDir / "run2" / "gen_step2.vxck"));

  ASSERT_EQ(run("infer --task interp --ckpt " + path("run1") + " --in " + path("t.vxv") + " --out " + path("i.vxv")), 0);
  EXPECT_TRUE(read_vxv(kDir / "i.vxv").dims() == (Dims{6, 42, 42}));
  ASSERT_EQ(run("eval --task interp --ckpt " + path("run1") + " --in " + path("t.vxv") + " --k 3"), 0);
  EXPECT_NE(slurp(kDir / "stdout.txt").find("mae"), std::string::npos);
}

TEST_F(Cli, ConfigFileIsOverriddenByFlags) {
  ASSERT_EQ(run("gen-phantom --dims 6 40 40 --seed 2 --out " + path("c.vxv")), 0);
  std::ofstream(kDir / "base.cfg") << "baseline=true\nsteps=1\nwidth=2\nbatch=1\npatch=30\nlr=0.5\n";
  ASSERT_EQ(run("train --config " + path("base.cfg") + " --lr 0.001 --steps 2 --quiet --in " + path("c.vxv") +
                " --out " + path("cfgrun")),
            0);
  const std::string cfg = slurp(kDir / "cfgrun" / "run.cfg");
  EXPECT_NE(cfg.find("lr=0.001\n"), std::string::npos);
  EXPECT_NE(cfg.find("steps=2\n"), std::string::npos);
  EXPECT_NE(cfg.find("width=2\n"), std::string::npos);
  EXPECT_NE(cfg.find("baseline=true\n"), std::string::npos);
}

TEST_F(Cli, NonFiniteLossExitsThree) {
  ASSERT_EQ(run("gen-phantom --dims 6 40 40 --seed 2 --out " + path("n.vxv")), 0);
  // An absurd learning rate drives the pixel-only run to overflow.
  EXPECT_EQ(run("train --baseline --lr 1e300 --steps 50 --width 2 --batch 1 --patch 30 --quiet --in " + path("n.vxv") +
                " --out " + path("nan")),
            3);
}

TEST_F(Cli, GradCheckPasses) {
  EXPECT_EQ(run("grad-check --net disc --seed 2 --coords 3"), 0);
  EXPECT_NE(slurp(kDir / "stdout.txt").find("PASS"), std::string::npos);
}
