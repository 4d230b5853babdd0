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

#include <stdexcept>
#include <string>

namespace fleetbed {

/// Domain error categories. The CLI maps all of these to exit code 1;
/// usage problems (bad flags) exit with 2.
enum class Errc {
  InvalidArgument,
  ParseError,
  WrongBase,
  CorruptPackage,
  StateError,
  StagingError,
  UnknownDevice,
  NotFound,
  IoError,
};

constexpr const char* to_string(Errc c) {
  switch (c) {
    case Errc::InvalidArgument: return "invalid-argument";
    case Errc::ParseError: return "parse-error";
    case Errc::WrongBase: return "wrong-base";
    case Errc::CorruptPackage: return "corrupt-package";
    case Errc::StateError: return "state-error";
    case Errc::StagingError: return "staging-error";
    case Errc::UnknownDevice: return "unknown-device";
    case Errc::NotFound: return "not-found";
    case Errc::IoError: return "io-error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& detail) {
  throw Error(code, detail);
}

}  // namespace fleetbed
