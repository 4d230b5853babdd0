/*
 * Copyright (C) 2026 The Fleetbed Project
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "fleetbed/ota/ota.hpp"

#include <cstring>
#include <unordered_map>

#include "fleetbed/error.hpp"

namespace fleetbed::ota {

Image Image::make(std::uint64_t version, std::vector<std::uint8_t> bytes) {
  Image img;
  img.version.version = version;
  img.version.fingerprint = sha256_hex(std::span<const std::uint8_t>(bytes));
  img.bytes = std::move(bytes);
  return img;
}

std::uint64_t UpdatePackage::insert_bytes() const {
  std::uint64_t n = 0;
  for (const auto& op : ops) {
    if (const auto* ins = std::get_if<InsertOp>(&op)) n += ins->bytes.size();
  }
  return n;
}

std::uint64_t UpdatePackage::output_bytes() const {
  std::uint64_t n = 0;
  for (const auto& op : ops) {
    if (const auto* ins = std::get_if<InsertOp>(&op)) {
      n += ins->bytes.size();
    } else {
      n += std::get<CopyOp>(op).length;
    }
  }
  return n;
}

static std::uint64_t chunk_hash(const std::uint8_t* p, std::size_t n) {
  // FNV-1a; collisions are resolved by byte comparison at the call site.
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

class OpBuilder {
 public:
  void copy(std::uint64_t offset, std::uint64_t length) {
    if (!ops_.empty()) {
      if (auto* prev = std::get_if<CopyOp>(&ops_.back());
          prev && prev->base_offset + prev->length == offset) {
        prev->length += length;
        return;
      }
    }
    ops_.push_back(CopyOp{offset, length});
  }

  void insert(const std::uint8_t* data, std::size_t n) {
    if (!ops_.empty()) {
      if (auto* prev = std::get_if<InsertOp>(&ops_.back())) {
        prev->bytes.insert(prev->bytes.end(), data, data + n);
        return;
      }
    }
    ops_.push_back(InsertOp{std::vector<std::uint8_t>(data, data + n)});
  }

  std::vector<PackageOp> take() { return std::move(ops_); }

 private:
  std::vector<PackageOp> ops_;
};

}  // namespace

UpdatePackage generate(const Image& base, const Image& target) {
  if (base.version.version >= target.version.version) {
    raise(Errc::InvalidArgument,
          "base version " + std::to_string(base.version.version) +
              " must be below target version " +
              std::to_string(target.version.version));
  }

  UpdatePackage pkg;
  pkg.base_version = base.version.version;
  pkg.target_version = target.version.version;
  pkg.base_digest = sha256(std::span<const std::uint8_t>(base.bytes));
  pkg.target_digest = sha256(std::span<const std::uint8_t>(target.bytes));

  const std::uint8_t* b = base.bytes.data();
  const std::uint8_t* t = target.bytes.data();
  const std::size_t bn = base.bytes.size();
  const std::size_t tn = target.bytes.size();

  if (bn == tn && std::memcmp(b, t, bn) == 0) {
    pkg.ops.push_back(CopyOp{0, bn});
    return pkg;
  }

  // First occurrence of every aligned full chunk in the base.
  std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> index;
  for (std::size_t off = 0; off + kChunkBytes <= bn; off += kChunkBytes) {
    index[chunk_hash(b + off, kChunkBytes)].push_back(off);
  }

  OpBuilder ops;
  std::size_t expected = SIZE_MAX;  // base offset that would extend the last Copy
  std::size_t i = 0;
  while (i < tn) {
    const std::size_t n = std::min(kChunkBytes, tn - i);
    if (expected != SIZE_MAX && expected + n <= bn &&
        std::memcmp(b + expected, t + i, n) == 0) {
      ops.copy(expected, n);
      expected += n;
    } else if (n == kChunkBytes) {
      std::size_t found = SIZE_MAX;
      auto it = index.find(chunk_hash(t + i, n));
      if (it != index.end()) {
        for (std::uint64_t off : it->second) {
          if (std::memcmp(b + off, t + i, n) == 0) {
            found = off;
            break;
          }
        }
      }
      if (found != SIZE_MAX) {
        ops.copy(found, n);
        expected = found + n;
      } else {
        ops.insert(t + i, n);
        expected = SIZE_MAX;
      }
    } else {
      ops.insert(t + i, n);
      expected = SIZE_MAX;
    }
    i += n;
  }

  pkg.ops = ops.take();
  return pkg;
}

UpdatePackage full_package(const Image& target) {
  UpdatePackage pkg;
  pkg.base_version = 0;
  pkg.target_version = target.version.version;
  pkg.base_digest = Digest{};  // no base requirement
  pkg.target_digest = sha256(std::span<const std::uint8_t>(target.bytes));
  pkg.ops.push_back(InsertOp{target.bytes});
  return pkg;
}

std::vector<UpdatePackage> generate_chain(std::span<const Image> history,
                                          const Image& target) {
  std::uint64_t prev = 0;
  for (const Image& img : history) {
    if (img.version.version <= prev) {
      raise(Errc::InvalidArgument, "history versions must strictly increase");
    }
    if (img.version.version >= target.version.version) {
      raise(Errc::InvalidArgument, "history versions must precede the target");
    }
    prev = img.version.version;
  }
  std::vector<UpdatePackage> out;
  out.reserve(history.size());
  for (const Image& img : history) {
    out.push_back(generate(img, target));
  }
  return out;
}

Image apply(const UpdatePackage& pkg, const Image& base) {
  if (!pkg.is_full()) {
    if (sha256(std::span<const std::uint8_t>(base.bytes)) != pkg.base_digest) {
      raise(Errc::WrongBase,
            "base image digest does not match package base digest");
    }
  }

  std::vector<std::uint8_t> out;
  out.reserve(pkg.output_bytes());
  for (const auto& op : pkg.ops) {
    if (const auto* copy = std::get_if<CopyOp>(&op)) {
      if (copy->length == 0 ||
          copy->base_offset + copy->length < copy->base_offset ||
          copy->base_offset + copy->length > base.bytes.size()) {
        raise(Errc::CorruptPackage, "copy op outside base image range");
      }
      out.insert(out.end(), base.bytes.begin() + copy->base_offset,
                 base.bytes.begin() + copy->base_offset + copy->length);
    } else {
      const auto& ins = std::get<InsertOp>(op);
      if (ins.bytes.empty()) {
        raise(Errc::CorruptPackage, "empty insert op");
      }
      out.insert(out.end(), ins.bytes.begin(), ins.bytes.end());
    }
  }

  Digest got = sha256(std::span<const std::uint8_t>(out));
  if (got != pkg.target_digest) {
    raise(Errc::CorruptPackage, "rebuilt image digest mismatch");
  }

  Image result;
  result.version = ImageVersion{pkg.target_version, to_hex(got)};
  result.bytes = std::move(out);
  return result;
}

bool verify(const UpdatePackage& pkg, const Digest& base_digest) {
  if (!pkg.is_full() && pkg.base_digest != base_digest) return false;
  if (pkg.ops.empty()) return false;
  for (const auto& op : pkg.ops) {
    if (const auto* copy = std::get_if<CopyOp>(&op)) {
      if (copy->length == 0) return false;
      if (copy->base_offset + copy->length < copy->base_offset) return false;
    } else if (std::get<InsertOp>(op).bytes.empty()) {
      return false;
    }
  }
  return true;
}

static void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(v & 0xff));
    v >>= 8;
  }
}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
      v = (v << 8) | static_cast<std::uint8_t>(bytes_[pos_ + i]);
    }
    pos_ += 8;
    return v;
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) {
    if (bytes_.size() - pos_ < n) {
      raise(Errc::ParseError, "package: truncated");
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

static constexpr char kMagic[4] = {'O', 'T', 'A', '1'};

std::string encode_package(const UpdatePackage& pkg) {
  std::string out;
  out.append(kMagic, 4);
  put_u64(out, pkg.base_version);
  put_u64(out, pkg.target_version);
  out.append(reinterpret_cast<const char*>(pkg.base_digest.data()), 32);
  out.append(reinterpret_cast<const char*>(pkg.target_digest.data()), 32);
  put_u64(out, pkg.ops.size());
  for (const auto& op : pkg.ops) {
    if (const auto* copy = std::get_if<CopyOp>(&op)) {
      out.push_back('\x01');
      put_u64(out, copy->base_offset);
      put_u64(out, copy->length);
    } else {
      const auto& ins = std::get<InsertOp>(op);
      out.push_back('\x02');
      put_u64(out, ins.bytes.size());
      out.append(reinterpret_cast<const char*>(ins.bytes.data()),
                 ins.bytes.size());
    }
  }
  return out;
}

UpdatePackage decode_package(std::string_view bytes) {
  Reader r(bytes);
  auto magic = r.take(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    raise(Errc::ParseError, "package: bad magic");
  }
  UpdatePackage pkg;
  pkg.base_version = r.u64();
  pkg.target_version = r.u64();
  auto bd = r.take(32);
  auto td = r.take(32);
  std::memcpy(pkg.base_digest.data(), bd.data(), 32);
  std::memcpy(pkg.target_digest.data(), td.data(), 32);
  std::uint64_t count = r.u64();
  pkg.ops.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    char tag = r.take(1)[0];
    if (tag == '\x01') {
      std::uint64_t off = r.u64();
      std::uint64_t len = r.u64();
      pkg.ops.push_back(CopyOp{off, len});
    } else if (tag == '\x02') {
      std::uint64_t len = r.u64();
      auto data = r.take(len);
      pkg.ops.push_back(InsertOp{std::vector<std::uint8_t>(
          reinterpret_cast<const std::uint8_t*>(data.data()),
          reinterpret_cast<const std::uint8_t*>(data.data()) + data.size())});
    } else {
      raise(Errc::ParseError, "package: unknown op tag");
    }
  }
  if (!r.done()) raise(Errc::ParseError, "package: trailing bytes");
  return pkg;
}

}  // namespace fleetbed::ota
