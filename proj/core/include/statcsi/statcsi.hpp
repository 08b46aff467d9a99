// SPDX-License-Identifier: Apache-2.0
//
// statcsi: statistical CSI acquisition for multi-band planar arrays
// Copyright (C) 2026 The statcsi authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef STATCSI_HPP
#define STATCSI_HPP

#include "statcsi/array_geometry.hpp"
#include "statcsi/channel_synthesis.hpp"
#include "statcsi/covariance_extrapolation.hpp"
#include "statcsi/errors.hpp"
#include "statcsi/grid_fft.hpp"
#include "statcsi/io.hpp"
#include "statcsi/me_aps.hpp"
#include "statcsi/transmission_eval.hpp"
#include "statcsi/version.hpp"

#endif
