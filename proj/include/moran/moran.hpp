#pragma once

// Core library (no third-party dependencies). Configuration I/O and the
// command layer live in moran/io.hpp and moran/cli.hpp.

#include "moran/attainability.hpp"
#include "moran/ensemble.hpp"
#include "moran/error.hpp"
#include "moran/estimator.hpp"
#include "moran/numeric.hpp"
#include "moran/phi.hpp"
#include "moran/realization.hpp"
#include "moran/rng.hpp"
#include "moran/sections.hpp"
#include "moran/theory.hpp"
#include "moran/tree_oracle.hpp"
