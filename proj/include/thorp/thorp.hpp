#pragma once

#include "thorp/errors.hpp"
#include "thorp/dyadic.hpp"
#include "thorp/coins.hpp"
#include "thorp/stats.hpp"
#include "thorp/shuffle.hpp"
#include "thorp/state_space.hpp"
#include "thorp/dense.hpp"
#include "thorp/exact_kernel.hpp"
#include "thorp/evolving_sets.hpp"
#include "thorp/chameleon.hpp"
#include "thorp/l2_analysis.hpp"
#include "thorp/mixbound.hpp"
#include "thorp/verify.hpp"
