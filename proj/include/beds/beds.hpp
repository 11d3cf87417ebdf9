#pragma once

// Umbrella header for the numerical core (no JSON dependency). The scenario
// runner lives in beds/scenario.hpp.

#include "beds/bessel.hpp"
#include "beds/config.hpp"
#include "beds/csv.hpp"
#include "beds/dynamics.hpp"
#include "beds/error.hpp"
#include "beds/geometry.hpp"
#include "beds/gnc.hpp"
#include "beds/hierarchy.hpp"
#include "beds/network.hpp"
#include "beds/optimizer.hpp"
#include "beds/regularizers.hpp"
#include "beds/rng.hpp"
#include "beds/state.hpp"
#include "beds/taxonomy.hpp"
#include "beds/thermo.hpp"
#include "beds/vonmises_path.hpp"
