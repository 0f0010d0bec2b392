#pragma once

#include "fadcap/allocation.hpp"
#include "fadcap/capacity.hpp"
#include "fadcap/errors.hpp"
#include "fadcap/fading.hpp"
#include "fadcap/montecarlo.hpp"
#include "fadcap/papr.hpp"
#include "fadcap/parallel.hpp"
#include "fadcap/quadrature.hpp"
#include "fadcap/sweep.hpp"
#include "fadcap/version.hpp"
