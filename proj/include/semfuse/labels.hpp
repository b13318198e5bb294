// Copyright 2026 The semfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace semfuse {

/// Class ids are 1-based; 0 marks an unlabeled point or voxel.
using ClassId = std::uint16_t;
inline constexpr ClassId kUnlabeled = 0;

}  // namespace semfuse
