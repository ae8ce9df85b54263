#pragma once

#include "rbci/ci_io.hpp"
#include "rbci/ci_tensor.hpp"
#include "rbci/combinatorics.hpp"
#include "rbci/derivatives.hpp"
#include "rbci/fixed_point.hpp"
#include "rbci/guess.hpp"
#include "rbci/harness.hpp"
#include "rbci/newton.hpp"
#include "rbci/rdm.hpp"
#include "rbci/rotation.hpp"
#include "rbci/seed.hpp"
#include "rbci/trust_region.hpp"
