// Copyright 2026 The sgeval Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sgeval/core.hpp"
#include "sgeval/geometry.hpp"
#include "sgeval/io/dataset.hpp"
#include "sgeval/io/png.hpp"
#include "sgeval/io/report.hpp"
#include "sgeval/io/tiff.hpp"
#include "sgeval/io/triplet_file.hpp"
#include "sgeval/mask.hpp"
#include "sgeval/metrics.hpp"
