// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "riszf/types.hpp"
#include "riszf/random.hpp"
#include "riszf/parallel.hpp"
#include "riszf/scenario.hpp"
#include "riszf/channels.hpp"
#include "riszf/detection.hpp"
#include "riszf/analysis.hpp"
#include "riszf/optimizer.hpp"
#include "riszf/experiments.hpp"
#include "riszf/selfcheck.hpp"
