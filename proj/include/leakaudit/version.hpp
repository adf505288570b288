// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 leakaudit contributors

#pragma once

namespace leakaudit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace leakaudit
