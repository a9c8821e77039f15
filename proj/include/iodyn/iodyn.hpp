#pragma once

#include "error.hpp"
#include "network.hpp"
#include "params.hpp"
#include "equilibrium.hpp"
#include "newton.hpp"
#include "simulator.hpp"
#include "stability.hpp"
#include "reduced.hpp"
#include "analytics.hpp"
#include "config.hpp"
