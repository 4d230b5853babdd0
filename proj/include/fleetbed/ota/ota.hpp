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
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fleetbed/core/hash.hpp"
#include "fleetbed/core/types.hpp"

namespace fleetbed::ota {

/// A platform image: version identity plus the raw bytes.
struct Image {
  ImageVersion version;
  std::vector<std::uint8_t> bytes;

  /// Builds an image and computes its fingerprint from the content.
  static Image make(std::uint64_t version, std::vector<std::uint8_t> bytes);
};

struct CopyOp {
  std::uint64_t base_offset = 0;
  std::uint64_t length = 0;

  bool operator==(const CopyOp&) const = default;
};

struct InsertOp {
  std::vector<std::uint8_t> bytes;

  bool operator==(const InsertOp&) const = default;
};

using PackageOp = std::variant<CopyOp, InsertOp>;

/// Incremental update between two image versions. The ops rebuild the
/// target from the base left to right; both endpoints are pinned by SHA-256
/// digests. A package with base_version 0 is a full image (single Insert)
/// and applies on any base.
struct UpdatePackage {
  std::uint64_t base_version = 0;
  std::uint64_t target_version = 0;
  Digest base_digest{};
  Digest target_digest{};
  std::vector<PackageOp> ops;

  bool is_full() const { return base_version == 0; }
  std::uint64_t insert_bytes() const;
  std::uint64_t output_bytes() const;
};

/// Diff granularity. Matching is whole-chunk against the base with raw
/// Insert fallback; adjacent ops coalesce.
constexpr std::size_t kChunkBytes = 4096;

/// Builds the incremental package base -> target.
/// Requires base.version < target.version. Deterministic for fixed inputs.
UpdatePackage generate(const Image& base, const Image& target);

/// Full-image package (no base requirement).
UpdatePackage full_package(const Image& target);

/// One package per history entry, each targeting `target`. History versions
/// must be strictly increasing and below the target's.
std::vector<UpdatePackage> generate_chain(std::span<const Image> history,
                                          const Image& target);

/// Rebuilds the target from `base`. Throws wrong-base when the base digest
/// does not match and corrupt-package when ops are out of range or the
/// result digest disagrees. The base is never modified.
Image apply(const UpdatePackage& pkg, const Image& base);

/// Structural check only: base digest match plus op sanity. A package that
/// verifies can still fail apply's result-digest check; apply is
/// authoritative.
bool verify(const UpdatePackage& pkg, const Digest& base_digest);

// Package file format: magic "OTA1", then little-endian u64 base_version,
// u64 target_version, 32 raw digest bytes for base and target, u64 op
// count, then per op a tag byte 0x01 Copy{u64 offset, u64 len} or
// 0x02 Insert{u64 len, bytes}.
std::string encode_package(const UpdatePackage& pkg);
UpdatePackage decode_package(std::string_view bytes);

}  // namespace fleetbed::ota
