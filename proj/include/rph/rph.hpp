#pragma once

// Umbrella header.

#include "rph/asymptotics.hpp"
#include "rph/constants.hpp"
#include "rph/counter_rng.hpp"
#include "rph/errors.hpp"
#include "rph/experiments.hpp"
#include "rph/geometry.hpp"
#include "rph/hash.hpp"
#include "rph/io.hpp"
#include "rph/numint.hpp"
#include "rph/quadrature.hpp"
#include "rph/special.hpp"
#include "rph/spherical.hpp"
