#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "corrstruct/core.hpp"

namespace corrstruct {

struct GrayImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * width + c]; }
};

/// Overlapping patch layout; defaults give the 28x28 -> 8x8 grid of 6x6
/// patches with stride 3.
struct PatchGrid {
  int image_height = 28;
  int image_width = 28;
  int patch = 6;
  int stride = 3;

  int rows() const;
  int cols() const;
  void validate() const;  // throws FormatError on a non-integral grid
};

/// pixel >= threshold -> 1, else 0.
GrayImage binarize(const GrayImage& image, int threshold = 40);

/// Flattened row-major binary patch vectors, patch (r, c) covering rows
/// r*stride .. r*stride+patch-1; row-major patch order.
std::vector<std::vector<std::uint8_t>> patchify(const GrayImage& binary, const PatchGrid& grid);

int hamming_distance(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b);

struct QuantizeResult {
  std::vector<std::vector<std::uint8_t>> representatives;  // creation order
  std::vector<int> indices;                                // per input vector
};

/// Single pass in input order: a vector joins the first representative within
/// Hamming distance <= radius (creation-order scan) or becomes a new one.
QuantizeResult quantize_alphabet(const std::vector<std::vector<std::uint8_t>>& vectors,
                                 int radius = 3);

struct FrozenEncodeResult {
  std::vector<int> indices;
  int beyond_radius = 0;  // inputs mapped farther than radius from every representative
};

/// Encodes against a frozen representative set: nearest representative by
/// Hamming distance, ties to the lowest ID.
FrozenEncodeResult encode_frozen(const std::vector<std::vector<std::uint8_t>>& representatives,
                                 const std::vector<std::vector<std::uint8_t>>& vectors,
                                 int radius = 3);

struct PatchDataset {
  DiscreteDataset dataset;
  // per patch, representative bit patterns in creation order (symbol i of the
  // alphabet is the decimal ID i, mapping to representatives[patch][i])
  std::vector<std::vector<std::vector<std::uint8_t>>> representatives;
};

PatchDataset build_patch_dataset(const std::vector<GrayImage>& images, const PatchGrid& grid = {},
                                 int threshold = 40, int radius = 3);

GrayImage load_pgm(const std::string& path);
/// Raw container: magic "CSR1", u32 height, u32 width, u32 count
/// (little-endian), then count*height*width bytes.
std::vector<GrayImage> load_raw_images(const std::string& path);
void write_raw_images(const std::vector<GrayImage>& images, const std::string& path);

}  // namespace corrstruct
