#pragma once

// Umbrella header.

#include "hoqmc/bernoulli.hpp"
#include "hoqmc/bounds.hpp"
#include "hoqmc/digits.hpp"
#include "hoqmc/dual.hpp"
#include "hoqmc/error.hpp"
#include "hoqmc/ff.hpp"
#include "hoqmc/io.hpp"
#include "hoqmc/nets.hpp"
#include "hoqmc/sweep.hpp"
#include "hoqmc/walsh.hpp"
#include "hoqmc/wce.hpp"
