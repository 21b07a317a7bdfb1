#include "corrstruct/preprocess.hpp"

#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace corrstruct {

int PatchGrid::rows() const { return (image_height - patch) / stride + 1; }
int PatchGrid::cols() const { return (image_width - patch) / stride + 1; }

void PatchGrid::validate() const {
  if (patch < 1 || stride < 1) throw FormatError("patch and stride must be positive");
  if (image_height < patch || image_width < patch)
    throw FormatError("image smaller than patch size");
  // the grid may leave at most one uncovered pixel line per axis (the 28-pixel
  // canonical layout covers 27 and drops the border line)
  if ((image_height - patch) % stride > 1 || (image_width - patch) % stride > 1)
    throw FormatError("patches do not tile the image: (" + std::to_string(image_height) + "x" +
                      std::to_string(image_width) + ") with patch " + std::to_string(patch) +
                      ", stride " + std::to_string(stride));
}

GrayImage binarize(const GrayImage& image, int threshold) {
  GrayImage out = image;
  for (auto& p : out.pixels) p = (p >= threshold) ? 1 : 0;
  return out;
}

std::vector<std::vector<std::uint8_t>> patchify(const GrayImage& binary, const PatchGrid& grid) {
  grid.validate();
  if (binary.height != grid.image_height || binary.width != grid.image_width)
    throw FormatError("image size does not match the patch grid");
  std::vector<std::vector<std::uint8_t>> patches;
  patches.reserve(static_cast<std::size_t>(grid.rows()) * grid.cols());
  for (int pr = 0; pr < grid.rows(); ++pr)
    for (int pc = 0; pc < grid.cols(); ++pc) {
      std::vector<std::uint8_t> v;
      v.reserve(static_cast<std::size_t>(grid.patch) * grid.patch);
      for (int r = 0; r < grid.patch; ++r)
        for (int c = 0; c < grid.patch; ++c)
          v.push_back(binary.at(pr * grid.stride + r, pc * grid.stride + c));
      patches.push_back(std::move(v));
    }
  return patches;
}

int hamming_distance(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  if (a.size() != b.size()) throw DomainError("hamming distance needs equal lengths");
  int dist = 0;
  for (std::size_t i = 0; i < a.size(); ++i) dist += (a[i] != b[i]) ? 1 : 0;
  return dist;
}

QuantizeResult quantize_alphabet(const std::vector<std::vector<std::uint8_t>>& vectors,
                                 int radius) {
  QuantizeResult res;
  res.indices.reserve(vectors.size());
  for (const auto& v : vectors) {
    int match = -1;
    for (std::size_t r = 0; r < res.representatives.size(); ++r)
      if (hamming_distance(res.representatives[r], v) <= radius) {
        match = static_cast<int>(r);
        break;
      }
    if (match < 0) {
      match = static_cast<int>(res.representatives.size());
      res.representatives.push_back(v);
    }
    res.indices.push_back(match);
  }
  return res;
}

FrozenEncodeResult encode_frozen(const std::vector<std::vector<std::uint8_t>>& representatives,
                                 const std::vector<std::vector<std::uint8_t>>& vectors,
                                 int radius) {
  if (representatives.empty()) throw DomainError("frozen alphabet is empty");
  FrozenEncodeResult res;
  res.indices.reserve(vectors.size());
  for (const auto& v : vectors) {
    int best = 0;
    int best_dist = std::numeric_limits<int>::max();
    for (std::size_t r = 0; r < representatives.size(); ++r) {
      const int dist = hamming_distance(representatives[r], v);
      if (dist < best_dist) {
        best_dist = dist;
        best = static_cast<int>(r);
      }
    }
    if (best_dist > radius) ++res.beyond_radius;
    res.indices.push_back(best);
  }
  return res;
}

PatchDataset build_patch_dataset(const std::vector<GrayImage>& images, const PatchGrid& grid,
                                 int threshold, int radius) {
  if (images.empty()) throw FormatError("empty image list");
  grid.validate();
  const int n = static_cast<int>(images.size());
  const int d = grid.rows() * grid.cols();

  // per-patch vector sequences across all images
  std::vector<std::vector<std::vector<std::uint8_t>>> per_patch(d);
  for (auto& seq : per_patch) seq.reserve(n);
  for (const auto& img : images) {
    if (img.height != grid.image_height || img.width != grid.image_width)
      throw FormatError("images must share the grid's size");
    auto patches = patchify(binarize(img, threshold), grid);
    for (int i = 0; i < d; ++i) per_patch[i].push_back(std::move(patches[i]));
  }

  std::vector<Alphabet> alphabets;
  std::vector<std::string> names;
  std::vector<std::vector<std::vector<std::uint8_t>>> reps(d);
  std::vector<int> samples(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < d; ++i) {
    QuantizeResult q = quantize_alphabet(per_patch[i], radius);
    std::vector<std::string> symbols(q.representatives.size());
    for (std::size_t s = 0; s < symbols.size(); ++s) symbols[s] = std::to_string(s);
    alphabets.emplace_back(std::move(symbols));
    reps[i] = std::move(q.representatives);
    names.push_back("patch_" + std::to_string(i / grid.cols()) + "_" +
                    std::to_string(i % grid.cols()));
    for (int r = 0; r < n; ++r) samples[static_cast<std::size_t>(r) * d + i] = q.indices[r];
  }
  return PatchDataset{DiscreteDataset(std::move(alphabets), std::move(names), std::move(samples)),
                      std::move(reps)};
}

namespace {

int next_pnm_int(std::istream& in) {
  // skips whitespace and '#' comments
  while (true) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value;
  if (!(in >> value)) throw FormatError("malformed PGM header");
  return value;
}

}  // namespace

GrayImage load_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file: " + path);
  std::string magic;
  f >> magic;
  if (magic != "P5" && magic != "P2") throw FormatError(path + ": not a P2/P5 PGM file");
  const int width = next_pnm_int(f);
  const int height = next_pnm_int(f);
  const int maxval = next_pnm_int(f);
  if (width < 1 || height < 1 || maxval < 1 || maxval > 255)
    throw FormatError(path + ": unsupported PGM geometry or maxval");

  GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<std::size_t>(width) * height);
  if (magic == "P5") {
    f.get();  // single whitespace after maxval
    f.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (f.gcount() != static_cast<std::streamsize>(img.pixels.size()))
      throw FormatError(path + ": truncated pixel data");
  } else {
    for (auto& p : img.pixels) {
      int v;
      if (!(f >> v)) throw FormatError(path + ": truncated pixel data");
      if (v < 0 || v > maxval) throw FormatError(path + ": pixel out of range");
      p = static_cast<std::uint8_t>(v);
    }
  }
  return img;
}

static constexpr char kRawMagic[4] = {'C', 'S', 'R', '1'};

std::vector<GrayImage> load_raw_images(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file: " + path);
  char magic[4];
  std::uint32_t h = 0, w = 0, n = 0;
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(&h), 4);
  f.read(reinterpret_cast<char*>(&w), 4);
  f.read(reinterpret_cast<char*>(&n), 4);
  if (!f || std::memcmp(magic, kRawMagic, 4) != 0)
    throw FormatError(path + ": bad raw image header");
  std::vector<GrayImage> images(n);
  for (auto& img : images) {
    img.height = static_cast<int>(h);
    img.width = static_cast<int>(w);
    img.pixels.resize(static_cast<std::size_t>(h) * w);
    f.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (f.gcount() != static_cast<std::streamsize>(img.pixels.size()))
      throw FormatError(path + ": truncated raw image data");
  }
  return images;
}

void write_raw_images(const std::vector<GrayImage>& images, const std::string& path) {
  if (images.empty()) throw DomainError("no images to write");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file for writing: " + path);
  const std::uint32_t h = images[0].height, w = images[0].width,
                      n = static_cast<std::uint32_t>(images.size());
  f.write(kRawMagic, 4);
  f.write(reinterpret_cast<const char*>(&h), 4);
  f.write(reinterpret_cast<const char*>(&w), 4);
  f.write(reinterpret_cast<const char*>(&n), 4);
  for (const auto& img : images)
    f.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
}

}  // namespace corrstruct
