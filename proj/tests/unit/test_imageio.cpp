#include <gtest/gtest.h>

#include <random>
#include <string>

#include "testkit.hpp"
#include "wavefuse/error.hpp"
#include "wavefuse/imageio.hpp"

namespace io = wavefuse::imageio;
using io::GrayImage;

namespace {

std::vector<unsigned char> pgm(std::size_t w, std::size_t h, const std::vector<unsigned char>& px) {
  const std::string header = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  std::vector<unsigned char> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), px.begin(), px.end());
  return bytes;
}

}  // namespace

TEST(LoadPgm, FullScaleWhiteAndBlack) {
  testkit::TempDir dir("io");
  testkit::write_bytes(dir / "w.pgm", pgm(3, 2, std::vector<unsigned char>(6, 255)));
  testkit::write_bytes(dir / "k.pgm", pgm(3, 2, std::vector<unsigned char>(6, 0)));
  EXPECT_EQ(io::load_grayscale(dir / "w.pgm"), GrayImage(3, 2, 1.0));
  EXPECT_EQ(io::load_grayscale(dir / "k.pgm"), GrayImage(3, 2, 0.0));
}

TEST(LoadPgm, ByteLevelValues) {
  testkit::TempDir dir("io");
  testkit::write_bytes(dir / "a.pgm", pgm(2, 2, {0, 128, 255, 64}));
  const GrayImage img = io::load_grayscale(dir / "a.pgm");
  ASSERT_EQ(img.width, 2u);
  ASSERT_EQ(img.height, 2u);
  EXPECT_EQ(img.pixels, (std::vector<double>{0.0, 128.0 / 255.0, 1.0, 64.0 / 255.0}));
}

TEST(LoadPgm, HeaderCommentsAreSkipped) {
  testkit::TempDir dir("io");
  const std::string header = "P5\n# made by hand\n2 1\n255\n";
  std::vector<unsigned char> bytes(header.begin(), header.end());
  bytes.push_back(10);
  bytes.push_back(20);
  testkit::write_bytes(dir / "c.pgm", bytes);
  EXPECT_EQ(io::load_grayscale(dir / "c.pgm").pixels, (std::vector<double>{10 / 255.0, 20 / 255.0}));
}

TEST(LoadGrayscale, Errors) {
  testkit::TempDir dir("io");
  EXPECT_THROW(io::load_grayscale(dir / "missing.pgm"), wavefuse::IoError);
  testkit::write_bytes(dir / "junk.pgm", {'h', 'e', 'l', 'l', 'o'});
  EXPECT_THROW(io::load_grayscale(dir / "junk.pgm"), wavefuse::FormatError);
  auto truncated = pgm(4, 4, std::vector<unsigned char>(10, 7));
  testkit::write_bytes(dir / "short.pgm", truncated);
  EXPECT_THROW(io::load_grayscale(dir / "short.pgm"), wavefuse::FormatError);
  const std::string deep = "P5\n1 1\n65535\n";
  testkit::write_bytes(dir / "deep.pgm", {deep.begin(), deep.end()});
  EXPECT_THROW(io::load_grayscale(dir / "deep.pgm"), wavefuse::FormatError);
}

TEST(SaveGrayscale, WhiteWritesFullBytes) {
  testkit::TempDir dir("io");
  io::save_grayscale(GrayImage(3, 2, 1.0), dir / "w.pgm");
  EXPECT_EQ(testkit::read_bytes(dir / "w.pgm"), pgm(3, 2, std::vector<unsigned char>(6, 255)));
}

TEST(SaveGrayscale, RoundsHalfUp) {
  EXPECT_EQ(io::quantize(0.5), 128);
  EXPECT_EQ(io::quantize(-0.2), 0);
  EXPECT_EQ(io::quantize(1.7), 255);
  testkit::TempDir dir("io");
  io::save_grayscale(GrayImage(1, 1, 0.5), dir / "h.pgm");
  EXPECT_EQ(testkit::read_bytes(dir / "h.pgm").back(), 128);
}

TEST(SaveGrayscale, RoundTripWithinHalfStep) {
  std::mt19937_64 rng(11);
  testkit::TempDir dir("io");
  for (const char* name : {"r.pgm", "r.png"}) {
    const GrayImage img = testkit::random_image(rng, 13, 7);
    io::save_grayscale(img, dir / name);
    const GrayImage back = io::load_grayscale(dir / name);
    ASSERT_TRUE(back.same_dims(img));
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
      EXPECT_LE(std::abs(back.pixels[i] - img.pixels[i]), 1.0 / 510.0 + 1e-15);
    }
  }
}

TEST(SaveGrayscale, PngAndPgmDecodeToSamePixels) {
  std::mt19937_64 rng(12);
  testkit::TempDir dir("io");
  const GrayImage img = testkit::random_image(rng, 9, 4);
  io::save_grayscale(img, dir / "x.png");
  io::save_grayscale(img, dir / "x.pgm");
  EXPECT_EQ(io::load_grayscale(dir / "x.png"), io::load_grayscale(dir / "x.pgm"));
}

TEST(Resize, IdenticalSizeIsIdentity) {
  std::mt19937_64 rng(13);
  const GrayImage img = testkit::random_image(rng, 6, 5);
  EXPECT_EQ(io::resize_bilinear(img, 6, 5), img);
}

TEST(Resize, ConstantStaysConstant) {
  const GrayImage out = io::resize_bilinear(GrayImage(5, 3, 0.37), 11, 8);
  for (double p : out.pixels) EXPECT_NEAR(p, 0.37, 1e-15);
}

TEST(Resize, TwoByTwoToFourByFour) {
  // Half-pixel centers: output pixel i maps to source (i + 0.5) / 2 - 0.5, clamped.
  const GrayImage src(2, 2, {0.0, 1.0, 0.2, 0.6});
  const GrayImage out = io::resize_bilinear(src, 4, 4);
  const double pos[4] = {0.0, 0.25, 0.75, 1.0};
  for (std::size_t y = 0; y < 4; ++y) {
    for (std::size_t x = 0; x < 4; ++x) {
      const double fx = pos[x], fy = pos[y];
      const double top = (1 - fx) * 0.0 + fx * 1.0;
      const double bottom = (1 - fx) * 0.2 + fx * 0.6;
      EXPECT_NEAR(out.at(x, y), (1 - fy) * top + fy * bottom, 1e-15) << x << "," << y;
    }
  }
}

TEST(Resize, RejectsZeroTarget) {
  EXPECT_THROW(io::resize_bilinear(GrayImage(2, 2), 0, 3), wavefuse::ArgumentError);
}

TEST(Resize, OutputStaysInUnitRange) {
  std::mt19937_64 rng(14);
  const GrayImage out = io::resize_bilinear(testkit::random_image(rng, 17, 9), 5, 23);
  for (double p : out.pixels) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(TensorBridge, RoundTripAndClamp) {
  std::mt19937_64 rng(15);
  const GrayImage img = testkit::random_image(rng, 4, 3);
  const auto t = io::to_tensor(img);
  EXPECT_EQ(t.shape(), (wavefuse::Shape{1, 3, 4}));
  EXPECT_EQ(io::from_tensor(t), img);
  const GrayImage clamped = io::from_tensor(wavefuse::Tensor({1, 1, 2}, {-0.5, 1.5}));
  EXPECT_EQ(clamped.pixels, (std::vector<double>{0.0, 1.0}));
}
