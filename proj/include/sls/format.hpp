// Copyright 2026 The slsdet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SLS_FORMAT_HPP
#define SLS_FORMAT_HPP

#include <optional>
#include <string>
#include <string_view>

namespace sls {

/// Shortest-safe text for a binary64: 17 significant digits, "%.17g".
std::string format_real(double value);

/// Fixed-point with `decimals` digits after the point.
std::string format_fixed(double value, int decimals);

/// Parses a full decimal token (no surrounding garbage) as binary64.
std::optional<double> parse_real(std::string_view token);

/// Parses a full decimal token as an unsigned 64-bit integer.
std::optional<unsigned long long> parse_uint(std::string_view token);

}  // namespace sls

#endif  // SLS_FORMAT_HPP
