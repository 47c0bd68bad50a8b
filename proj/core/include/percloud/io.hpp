#ifndef PERCLOUD_IO_HPP
#define PERCLOUD_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "percloud/point_cloud.hpp"

namespace percloud {

enum class CloudFormat { kXyzText, kPlyAscii, kPackedBinary };

CloudFormat parse_format(const std::string& name);
std::string format_name(CloudFormat format);

// Guesses from the extension: .xyz/.txt, .ply, anything else packed-binary.
CloudFormat format_from_path(const std::string& path);

// xyz-text: one point per line, "x y z f0 f1 ...", uniform column count.
// ply-ascii: `element vertex` with x,y,z properties; remaining scalar vertex
//   properties become feature columns in declaration order; other elements
//   are skipped with a warning on stderr.
// packed-binary: little-endian {magic "PCLD", u32 N, u32 d0} followed by
//   N*3 float64 coords then N*d0 float64 features, row-major. Round-trips
//   bit-exactly.
PointCloud read_cloud(const std::string& path, CloudFormat format);
void write_cloud(const PointCloud& cloud, const std::string& path,
                 CloudFormat format);

// Label sidecar: text, one non-negative integer per line.
std::vector<std::uint32_t> read_labels(const std::string& path);
void write_labels(const std::vector<std::uint32_t>& labels,
                  const std::string& path);

// Uniform subsampling without replacement, deterministic per seed. The m = N
// case returns the cloud unchanged (original order).
LabeledCloud subsample(const LabeledCloud& input, std::uint32_t m,
                       std::uint64_t seed);

}  // namespace percloud

#endif
