#pragma once

#include "mvr/geometry.hpp"
#include "mvr/higher_order.hpp"
#include "mvr/inverse.hpp"
#include "mvr/io.hpp"
#include "mvr/mumford_shah.hpp"
#include "mvr/noise.hpp"
#include "mvr/preview.hpp"
#include "mvr/wavelet.hpp"
