#pragma once

#include "app.hpp"
#include "checkpoint.hpp"
#include "config.hpp"
#include "experiments.hpp"
#include "grid_spectral.hpp"
#include "integrator.hpp"
#include "noise.hpp"
#include "observables.hpp"
#include "output.hpp"
#include "parallel.hpp"
#include "svg.hpp"
#include "verify.hpp"
