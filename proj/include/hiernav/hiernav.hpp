#pragma once

// Umbrella header for the three-level navigation stack.

#include "hiernav/behavior.hpp"
#include "hiernav/config.hpp"
#include "hiernav/dynmodel.hpp"
#include "hiernav/env.hpp"
#include "hiernav/errors.hpp"
#include "hiernav/export.hpp"
#include "hiernav/graph.hpp"
#include "hiernav/maze.hpp"
#include "hiernav/mlp.hpp"
#include "hiernav/mpc.hpp"
#include "hiernav/optim.hpp"
#include "hiernav/orchestrator.hpp"
#include "hiernav/replay.hpp"
#include "hiernav/rng.hpp"
#include "hiernav/space.hpp"
#include "hiernav/storage.hpp"
#include "hiernav/td3.hpp"
