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
#include "fleetbed/core/hash.hpp"

#include <openssl/evp.h>

namespace fleetbed {

Digest sha256(std::span<const std::uint8_t> bytes) {
  Digest out{};
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr);
  return out;
}

Digest sha256(std::string_view bytes) {
  return sha256(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

std::string to_hex(const Digest& d) {
  static const char* kHex = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (std::uint8_t b : d) {
    s.push_back(kHex[b >> 4]);
    s.push_back(kHex[b & 0xf]);
  }
  return s;
}

static int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

Digest digest_from_hex(std::string_view hex) {
  if (hex.size() != 64) raise(Errc::ParseError, "digest: expected 64 hex chars");
  Digest d{};
  for (size_t i = 0; i < 32; ++i) {
    int hi = hex_nibble(hex[2 * i]);
    int lo = hex_nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) raise(Errc::ParseError, "digest: non-hex character");
    d[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return d;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  return to_hex(sha256(bytes));
}

std::string sha256_hex(std::string_view bytes) { return to_hex(sha256(bytes)); }

DeviceId hash_device_id(std::string_view meid) {
  if (meid.empty()) raise(Errc::InvalidArgument, "meid must be non-empty");
  return DeviceId{sha256_hex(meid)};
}

}  // namespace fleetbed
