#pragma once

#include "mixphase/errors.hpp"
#include "mixphase/format.hpp"
#include "mixphase/linalg.hpp"
#include "mixphase/neutrino.hpp"
#include "mixphase/parallel.hpp"
#include "mixphase/phase.hpp"
#include "mixphase/sweep.hpp"
#include "mixphase/verify.hpp"
