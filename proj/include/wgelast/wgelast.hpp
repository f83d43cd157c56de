#pragma once

// Umbrella header for the weak Galerkin elasticity interface solver.

#include "mesh.hpp"
#include "quadrature.hpp"
#include "basis.hpp"
#include "space.hpp"
#include "projection.hpp"
#include "weakops.hpp"
#include "problems.hpp"
#include "system.hpp"
#include "studio.hpp"
