#pragma once

#include "cacheopt/error.hpp"
#include "cacheopt/combinatorics.hpp"
#include "cacheopt/model.hpp"
#include "cacheopt/delivery.hpp"
#include "cacheopt/closedform.hpp"
#include "cacheopt/lp.hpp"
#include "cacheopt/bounds.hpp"
#include "cacheopt/optimizer.hpp"
