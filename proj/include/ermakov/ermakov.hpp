#pragma once

// Umbrella header for the whole library.

#include "ermakov/errors.hpp"
#include "ermakov/quadrature.hpp"
#include "ermakov/finite_diff.hpp"
#include "ermakov/expr.hpp"
#include "ermakov/model.hpp"
#include "ermakov/dynamics.hpp"
#include "ermakov/integrate.hpp"
#include "ermakov/conditions.hpp"
#include "ermakov/invariants.hpp"
#include "ermakov/noether.hpp"
#include "ermakov/reduce.hpp"
#include "ermakov/analytic.hpp"
#include "ermakov/scenario.hpp"
