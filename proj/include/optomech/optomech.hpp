#pragma once

#include "errors.hpp"
#include "macroscopicity.hpp"
#include "model_cubic.hpp"
#include "model_quartic.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "phasespace.hpp"
#include "quadrature.hpp"
#include "states.hpp"
#include "wavepacket.hpp"
