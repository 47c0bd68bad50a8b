#include <doctest.h>

#include <fstream>

#include "percloud/io.hpp"
#include "percloud/synthetic.hpp"
#include "support/test_support.hpp"

using namespace percloud;
using pctest::TempDir;

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("point cloud invariants enforced at construction") {
  Matrix good(2, 3);
  good << 0, 0, 0, 1, 1, 1;
  CHECK_NOTHROW(PointCloud{good});

  Matrix nan = good;
  nan(1, 2) = std::nan("");
  CHECK_THROWS_AS(PointCloud{nan}, ValidationError);

  CHECK_THROWS_AS(PointCloud(Matrix(0, 3)), ValidationError);

  Matrix ragged_feats(3, 2);
  ragged_feats.setZero();
  CHECK_THROWS_AS(PointCloud(good, ragged_feats), ValidationError);
}

TEST_CASE("xyz-text parses the three-line example") {
  TempDir dir("xyz");
  write_file(dir.file("c.xyz"), "0 0 0\n1 0 0\n0 1 0\n");
  const PointCloud cloud = read_cloud(dir.file("c.xyz"), CloudFormat::kXyzText);
  CHECK(cloud.size() == 3);
  CHECK(cloud.feature_dim() == 0);
  CHECK(cloud.coords()(1, 0) == 1.0);
}

TEST_CASE("xyz-text rejects NaN and ragged rows") {
  TempDir dir("xyzbad");
  write_file(dir.file("nan.xyz"), "nan 0 0\n");
  CHECK_THROWS_AS(read_cloud(dir.file("nan.xyz"), CloudFormat::kXyzText),
                  ValidationError);

  write_file(dir.file("ragged.xyz"), "0 0 0 1\n0 0 0\n");
  CHECK_THROWS_AS(read_cloud(dir.file("ragged.xyz"), CloudFormat::kXyzText),
                  ValidationError);

  write_file(dir.file("junk.xyz"), "0 0 zebra\n");
  CHECK_THROWS_AS(read_cloud(dir.file("junk.xyz"), CloudFormat::kXyzText),
                  ParseError);
}

TEST_CASE("ply-ascii vertex element with color properties") {
  TempDir dir("ply");
  write_file(dir.file("c.ply"),
             "ply\n"
             "format ascii 1.0\n"
             "element vertex 2\n"
             "property float x\n"
             "property float y\n"
             "property float z\n"
             "property uchar red\n"
             "property uchar green\n"
             "property uchar blue\n"
             "end_header\n"
             "0 0 0 255 0 0\n"
             "1 2 3 0 255 0\n");
  const PointCloud cloud = read_cloud(dir.file("c.ply"), CloudFormat::kPlyAscii);
  CHECK(cloud.size() == 2);
  CHECK(cloud.feature_dim() == 3);
  CHECK(cloud.coords()(1, 2) == 3.0);
  CHECK(cloud.features()(0, 0) == 255.0);
}

TEST_CASE("ply-ascii ignores non-vertex elements and rejects bad headers") {
  TempDir dir("ply2");
  write_file(dir.file("face.ply"),
             "ply\nformat ascii 1.0\n"
             "element vertex 1\n"
             "property float x\nproperty float y\nproperty float z\n"
             "element face 1\n"
             "property list uchar int vertex_indices\n"
             "end_header\n"
             "1 2 3\n"
             "3 0 0 0\n");
  const PointCloud cloud =
      read_cloud(dir.file("face.ply"), CloudFormat::kPlyAscii);
  CHECK(cloud.size() == 1);

  write_file(dir.file("noxyz.ply"),
             "ply\nformat ascii 1.0\nelement vertex 1\nproperty float a\n"
             "end_header\n0\n");
  CHECK_THROWS_AS(read_cloud(dir.file("noxyz.ply"), CloudFormat::kPlyAscii),
                  ParseError);

  write_file(dir.file("binary.ply"),
             "ply\nformat binary_little_endian 1.0\nend_header\n");
  CHECK_THROWS_AS(read_cloud(dir.file("binary.ply"), CloudFormat::kPlyAscii),
                  ParseError);
}

TEST_CASE("packed-binary round trip is bit exact") {
  pctest::Rng rng(11);
  Matrix coords = pctest::random_coords(rng, 37, 5.0);
  Matrix feats = pctest::random_gaussian(rng, 37, 4);
  const PointCloud cloud(coords, feats);

  TempDir dir("bin");
  write_cloud(cloud, dir.file("c.bin"), CloudFormat::kPackedBinary);
  const PointCloud back = read_cloud(dir.file("c.bin"), CloudFormat::kPackedBinary);
  CHECK(back.coords() == cloud.coords());
  CHECK(back.features() == cloud.features());
}

TEST_CASE("text round trips stay within the stated precision") {
  Matrix coords(1, 3);
  coords << 0.1234567, -2.25, 1e-9;
  const PointCloud cloud(coords);
  TempDir dir("txt");

  for (const CloudFormat f : {CloudFormat::kXyzText, CloudFormat::kPlyAscii}) {
    const std::string path = dir.file("c" + format_name(f));
    write_cloud(cloud, path, f);
    const PointCloud back = read_cloud(path, f);
    CHECK((back.coords() - cloud.coords()).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("write to an unwritable path raises IoError") {
  const PointCloud cloud(Matrix::Zero(1, 3));
  CHECK_THROWS_AS(
      write_cloud(cloud, "/nonexistent-dir-zz/c.bin", CloudFormat::kPackedBinary),
      IoError);
  CHECK_THROWS_AS(read_cloud("/nonexistent-dir-zz/c.bin", CloudFormat::kPackedBinary),
                  IoError);
}

TEST_CASE("synthetic generation is deterministic per seed") {
  const LabeledCloud a = generate_synthetic(SyntheticKind::kUniformCube, 8, 7);
  const LabeledCloud b = generate_synthetic(SyntheticKind::kUniformCube, 8, 7);
  CHECK(a.cloud().coords() == b.cloud().coords());
  CHECK(a.labels() == b.labels());

  const LabeledCloud c = generate_synthetic(SyntheticKind::kUniformCube, 8, 8);
  CHECK(a.cloud().coords() != c.cloud().coords());
}

TEST_CASE("gaussian clusters assign block labels and honor separation") {
  SyntheticParams params;
  params.clusters = 4;
  params.stddev = 0.01;
  params.separation = 10.0;
  const LabeledCloud cloud =
      generate_synthetic(SyntheticKind::kGaussianClusters, 100, 3, params);

  std::vector<int> counts(4, 0);
  for (const auto l : cloud.labels()) {
    REQUIRE(l < 4);
    ++counts[l];
  }
  for (const int c : counts) CHECK(c == 25);
}

TEST_CASE("synthetic parameter validation") {
  SyntheticParams params;
  params.clusters = 0;
  CHECK_THROWS_AS(
      generate_synthetic(SyntheticKind::kGaussianClusters, 10, 0, params),
      BadParams);

  params.clusters = 2;
  params.stddev = -1.0;
  CHECK_THROWS_AS(
      generate_synthetic(SyntheticKind::kGaussianClusters, 10, 0, params),
      BadParams);

  CHECK_THROWS_AS(generate_synthetic(SyntheticKind::kUniformCube, 0, 0),
                  BadParams);
}

TEST_CASE("room-grid labels every box") {
  SyntheticParams params;
  params.boxes_x = 2;
  params.boxes_y = 2;
  params.boxes_z = 1;
  const LabeledCloud cloud =
      generate_synthetic(SyntheticKind::kRoomGrid, 40, 5, params);
  std::vector<int> seen(4, 0);
  for (const auto l : cloud.labels()) {
    REQUIRE(l < 4);
    ++seen[l];
  }
  for (const int c : seen) CHECK(c == 10);
}

TEST_CASE("subsample is deterministic and size-correct") {
  const LabeledCloud cloud =
      generate_synthetic(SyntheticKind::kGaussianClusters, 200, 9);
  const LabeledCloud a = subsample(cloud, 50, 13);
  const LabeledCloud b = subsample(cloud, 50, 13);
  CHECK(a.size() == 50);
  CHECK(a.cloud().coords() == b.cloud().coords());
  CHECK(a.labels() == b.labels());
  CHECK_THROWS_AS(subsample(cloud, 0, 1), BadParams);
  CHECK_THROWS_AS(subsample(cloud, 201, 1), BadParams);
}

TEST_CASE("label sidecar round trip and validation") {
  TempDir dir("labels");
  const std::vector<std::uint32_t> labels{0, 3, 65535, 2};
  write_labels(labels, dir.file("l.txt"));
  CHECK(read_labels(dir.file("l.txt")) == labels);

  std::ofstream(dir.file("bad.txt")) << "7\nfrog\n";
  CHECK_THROWS_AS(read_labels(dir.file("bad.txt")), ParseError);

  std::ofstream(dir.file("big.txt")) << "70000\n";
  CHECK_THROWS_AS(read_labels(dir.file("big.txt")), ValidationError);
}
