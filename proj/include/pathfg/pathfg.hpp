#pragma once

#include "pathfg/error.hpp"
#include "pathfg/geometry.hpp"
#include "pathfg/governor.hpp"
#include "pathfg/model.hpp"
#include "pathfg/mpc.hpp"
#include "pathfg/numkit.hpp"
#include "pathfg/planner.hpp"
#include "pathfg/sim.hpp"
#include "pathfg/terminal.hpp"
