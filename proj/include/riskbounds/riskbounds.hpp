#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 riskbounds contributors
//
// Umbrella header for the whole library.

#include "riskbounds/complexity.hpp"
#include "riskbounds/dataset.hpp"
#include "riskbounds/experiment.hpp"
#include "riskbounds/fitdiag.hpp"
#include "riskbounds/io.hpp"
#include "riskbounds/linalg.hpp"
#include "riskbounds/model.hpp"
#include "riskbounds/parallel.hpp"
#include "riskbounds/prob.hpp"
#include "riskbounds/risk.hpp"
#include "riskbounds/rng.hpp"
#include "riskbounds/verify.hpp"
