// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#include "stitch/io.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include "stitch/error.hpp"

namespace stitch::io {
namespace {

static_assert(std::endian::native == std::endian::little, "tensor I/O assumes a little-endian host");

void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

std::uint32_t get_u32(std::string_view bytes, std::size_t offset) {
  std::uint32_t v;
  std::memcpy(&v, bytes.data() + offset, 4);
  return v;
}

}  // namespace

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::string encode_tensor(const Tensor& tensor) {
  if (tensor.element_count() != tensor.data.size()) {
    throw Error(ErrorCode::kShapeMismatch, "tensor dims do not match payload size");
  }
  std::string out(kTensorMagic);
  put_u32(out, static_cast<std::uint32_t>(tensor.dims.size()));
  for (auto d : tensor.dims) put_u32(out, d);
  const auto* raw = reinterpret_cast<const char*>(tensor.data.data());
  out.append(raw, tensor.data.size() * sizeof(float));
  return out;
}

Tensor decode_tensor(std::string_view bytes) {
  const std::size_t header = kTensorMagic.size() + 4;
  if (bytes.size() < header || bytes.substr(0, kTensorMagic.size()) != kTensorMagic) {
    throw Error(ErrorCode::kFormat, "missing STCHTNSR magic");
  }
  Tensor t;
  const std::uint32_t rank = get_u32(bytes, kTensorMagic.size());
  if (bytes.size() < header + 4ULL * rank) throw Error(ErrorCode::kFormat, "truncated tensor header");
  for (std::uint32_t i = 0; i < rank; ++i) t.dims.push_back(get_u32(bytes, header + 4 * i));
  const std::size_t offset = header + 4ULL * rank;
  const std::size_t count = t.element_count();
  if (bytes.size() != offset + count * sizeof(float)) {
    throw Error(ErrorCode::kFormat, "tensor payload size does not match dims");
  }
  t.data.resize(count);
  std::memcpy(t.data.data(), bytes.data() + offset, count * sizeof(float));
  return t;
}

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  write_file_atomic(path, encode_tensor(tensor));
}

Tensor read_tensor(const std::filesystem::path& path) { return decode_tensor(read_file(path)); }

std::string encode_pgm(const GrayImage& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw Error(ErrorCode::kShapeMismatch, "graymap dimensions do not match pixel count");
  }
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  return out;
}

GrayImage decode_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&] {
    skip_space_and_comments();
    int value = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      value = value * 10 + (bytes[pos++] - '0');
      any = true;
    }
    if (!any) throw Error(ErrorCode::kFormat, "malformed graymap header");
    return value;
  };
  if (bytes.size() < 2 || bytes.substr(0, 2) != "P5") throw Error(ErrorCode::kFormat, "not a binary graymap (P5)");
  pos = 2;
  GrayImage img;
  img.width = read_int();
  img.height = read_int();
  const int maxval = read_int();
  if (maxval <= 0 || maxval > 255) throw Error(ErrorCode::kFormat, "graymap maxval must be in 1..255");
  ++pos;  // single whitespace before raster
  const std::size_t count = static_cast<std::size_t>(img.width) * img.height;
  if (bytes.size() < pos + count) throw Error(ErrorCode::kFormat, "truncated graymap raster");
  img.pixels.assign(bytes.begin() + pos, bytes.begin() + pos + count);
  if (maxval != 255) {
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(p * 255 / maxval);
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  write_file_atomic(path, encode_pgm(image));
}

GrayImage read_pgm(const std::filesystem::path& path) { return decode_pgm(read_file(path)); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()) % 100000) + "." +
         std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw Error(ErrorCode::kIo, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

}  // namespace stitch::io
