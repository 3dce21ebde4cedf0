#pragma once

#include "amari/errors.hpp"
#include "amari/kernel.hpp"
#include "amari/grid.hpp"
#include "amari/csv.hpp"
#include "amari/operator.hpp"
#include "amari/gain.hpp"
#include "amari/energy.hpp"
#include "amari/rng.hpp"
#include "amari/noise.hpp"
#include "amari/sde.hpp"
#include "amari/ergodic.hpp"
#include "amari/config.hpp"
#include "amari/cli.hpp"
