// spinbath.hpp — Umbrella header

#pragma once

#include "spinbath/config.hpp"
#include "spinbath/control.hpp"
#include "spinbath/csv.hpp"
#include "spinbath/grid.hpp"
#include "spinbath/kernels.hpp"
#include "spinbath/oracle.hpp"
#include "spinbath/propagator.hpp"
#include "spinbath/rng.hpp"
#include "spinbath/scenario.hpp"
#include "spinbath/tcl.hpp"
