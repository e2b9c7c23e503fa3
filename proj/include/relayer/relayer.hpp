#pragma once

#include "relayer/binomial.hpp"
#include "relayer/dynamics.hpp"
#include "relayer/equilibrium.hpp"
#include "relayer/game.hpp"
#include "relayer/io.hpp"
#include "relayer/montecarlo.hpp"
#include "relayer/rng.hpp"
#include "relayer/robustness.hpp"
#include "relayer/sweep.hpp"
