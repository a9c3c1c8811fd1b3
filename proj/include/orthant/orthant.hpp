#pragma once

// Exit-time decay rates for orthant-constrained random walks: exact reduction
// of the problem to a convex minimization over a cone, numerical survival
// engines, and exact polyhedron minimal-point algorithms.

#include "orthant/errors.hpp"
#include "orthant/rational.hpp"
#include "orthant/distribution.hpp"
#include "orthant/laplace.hpp"
#include "orthant/lp.hpp"
#include "orthant/reduction.hpp"
#include "orthant/optimizer.hpp"
#include "orthant/polyhedron.hpp"
#include "orthant/rng.hpp"
#include "orthant/rates.hpp"
#include "orthant/io.hpp"
