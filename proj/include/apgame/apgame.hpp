#pragma once

// Convenience umbrella: the whole pricing-game toolkit in one include.

#include "apgame/errors.hpp"
#include "apgame/market.hpp"
#include "apgame/lcp.hpp"
#include "apgame/wardrop.hpp"
#include "apgame/equilibria.hpp"
#include "apgame/metrics.hpp"
#include "apgame/samplers.hpp"
#include "apgame/verify.hpp"
#include "apgame/csv.hpp"
#include "apgame/config.hpp"
#include "apgame/experiments.hpp"
