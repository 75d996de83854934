#pragma once

#include "dirv/core.hpp"
#include "dirv/clickmodel.hpp"
#include "dirv/estimator.hpp"
#include "dirv/objective.hpp"
#include "dirv/interleave.hpp"
#include "dirv/sim.hpp"
#include "dirv/replay.hpp"
#include "dirv/config.hpp"
#include "dirv/harness.hpp"
