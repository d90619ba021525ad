#pragma once

#include "parisian/delay_kernel.hpp"
#include "parisian/errors.hpp"
#include "parisian/marginal.hpp"
#include "parisian/model.hpp"
#include "parisian/quadrature.hpp"
#include "parisian/ruin.hpp"
#include "parisian/rng.hpp"
#include "parisian/scale.hpp"
#include "parisian/simulate.hpp"
#include "parisian/taylor_jet.hpp"
#include "parisian/version.hpp"
