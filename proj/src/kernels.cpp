// Copyright 2026 The PLC-Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "plc/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace plc::kernels {
namespace {

const Backend& select() {
  const char* forced = std::getenv("PLC_KERNELS");
#if defined(__x86_64__) || defined(_M_X64)
  if (forced != nullptr) {
    if (std::strcmp(forced, "avx2") == 0 && avx2_supported()) {
      return avx2_backend();
    }
    return scalar_backend();
  }
  if (avx2_supported()) return avx2_backend();
#else
  (void)forced;
#endif
  return scalar_backend();
}

}  // namespace

const Backend& active() {
  static const Backend& chosen = select();
  return chosen;
}

}  // namespace plc::kernels
