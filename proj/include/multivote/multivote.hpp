#pragma once

// Umbrella header for the whole library.

#include "constructions.hpp"
#include "core.hpp"
#include "freeride.hpp"
#include "io.hpp"
#include "scoring.hpp"
#include "sim.hpp"
#include "solvers.hpp"
