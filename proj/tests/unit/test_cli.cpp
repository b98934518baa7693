#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nsurf/io/dataset.hpp"
#include "nsurf/io/image_io.hpp"
#include "nsurf/io/map_io.hpp"
#include "nsurf/nn/checkpoint.hpp"

namespace nsurf {
namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd = std::string(NSURF_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("nsurf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    nn::save_checkpoint(nn::NetworkBundle::create({}, 1), dir / "ck.bin");
  }
  std::string p(const std::string& name) const { return (dir / name).string(); }
  fs::path dir;
};

TEST_F(Cli, RenderEmptyMapGivesBackground) {
  io::save_map(dir / "empty.smap", SurfelMap());
  std::ofstream(dir / "pose.txt") << "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n";
  std::ofstream(dir / "intr.txt") << "12 12 8 6 16 12\n";
  std::ofstream(dir / "cfg.ini") << "[render]\nbackground = 0.2, 0.4, 0.6\n";
  ASSERT_EQ(run("render --map " + p("empty.smap") + " --checkpoint " + p("ck.bin") + " --pose-file " + p("pose.txt") +
                " --intrinsics " + p("intr.txt") + " --out " + p("out.png") + " --config " + p("cfg.ini")),
            0);
  const ImageF img = io::read_png_rgb(dir / "out.png");
  ASSERT_EQ(img.width, 16);
  ASSERT_EQ(img.height, 12);
  for (int y = 0; y < 12; ++y) {
    for (int x = 0; x < 16; ++x) {
      EXPECT_NEAR(img.at(x, y, 0), 51 / 255.0f, 1e-6f);
      EXPECT_NEAR(img.at(x, y, 1), 102 / 255.0f, 1e-6f);
      EXPECT_NEAR(img.at(x, y, 2), 153 / 255.0f, 1e-6f);
    }
  }
  ASSERT_EQ(run("render --map " + p("empty.smap") + " --checkpoint " + p("ck.bin") + " --pose-file " + p("pose.txt") +
                " --intrinsics " + p("intr.txt") + " --out " + p("dense.png") + " --baseline dense --step 0.05"),
            0);
}

TEST_F(Cli, EvalOnPerfectRenderReportsCap) {
  ASSERT_EQ(run("synth --out " + p("data") + " --preset wall --frames 4 --width 16 --height 12"), 0);
  io::save_map(dir / "empty.smap", SurfelMap());
  // Overwrite every color with the render of the empty map so that render and
  // ground truth are identical.
  io::Dataset d(dir / "data");
  for (std::size_t i = 0; i < d.size(); ++i) {
    io::write_png_rgb(io::frame_stem(dir / "data", i).string() + ".color.png", ImageF(16, 12, 3, 0.0f));
  }
  ASSERT_EQ(run("eval --map " + p("empty.smap") + " --checkpoint " + p("ck.bin") + " --dataset " + p("data") +
                " --split all --metrics " + p("m.csv")),
            0);
  std::ifstream in(dir / "m.csv");
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header, "frame_index,psnr,ssim");
  int rows = 0;
  while (std::getline(in, row)) {
    std::stringstream ss(row);
    std::string idx, psnr;
    std::getline(ss, idx, ',');
    std::getline(ss, psnr, ',');
    EXPECT_DOUBLE_EQ(std::stod(psnr), 99.0);
    ++rows;
  }
  EXPECT_EQ(rows, 4);
}

TEST_F(Cli, PipelineProducesMapReportAndPlot) {
  ASSERT_EQ(run("synth --out " + p("data") + " --preset room --frames 8 --width 24 --height 18 --seed 3"), 0);
  std::ofstream(dir / "cfg.ini") << "[train]\nkeyframe_fraction = 0.5\n";
  ASSERT_EQ(run("reconstruct --dataset " + p("data") + " --checkpoint " + p("ck.bin") + " --out " + p("map.smap") +
                " --report " + p("r.csv") + " --config " + p("cfg.ini")),
            0);
  EXPECT_GT(io::load_map(dir / "map.smap").size(), 0u);
  ASSERT_EQ(run("stats --report " + p("r.csv") + " --plot " + p("g.png")), 0);
  EXPECT_EQ(io::read_png_rgb(dir / "g.png").width, 640);
  ASSERT_EQ(run("reconstruct --dataset " + p("data") + " --checkpoint " + p("ck.bin") + " --out " + p("map2.smap") +
                " --config " + p("cfg.ini")),
            0);
  std::ifstream a(dir / "map.smap", std::ios::binary), b(dir / "map2.smap", std::ios::binary);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("render --map x"), 1);
  EXPECT_EQ(run("synth --out " + p("d") + " --bogus"), 1);
  EXPECT_EQ(run("reconstruct --dataset " + p("missing") + " --checkpoint " + p("ck.bin") + " --out " + p("m.smap")), 2);
  std::ofstream(dir / "junk.bin") << "junk";
  io::save_map(dir / "empty.smap", SurfelMap());
  std::ofstream(dir / "pose.txt") << "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n";
  std::ofstream(dir / "intr.txt") << "12 12 8 6 16 12\n";
  EXPECT_EQ(run("render --map " + p("empty.smap") + " --checkpoint " + p("junk.bin") + " --pose-file " + p("pose.txt") +
                " --intrinsics " + p("intr.txt") + " --out " + p("o.png")),
            2);
  std::ofstream(dir / "bad.ini") << "[train]\nnot_a_key = 1\n";
  EXPECT_EQ(run("synth --out " + p("d") + " --config " + p("bad.ini")), 2);
}

}  // namespace
}  // namespace nsurf
