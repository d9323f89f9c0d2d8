#pragma once

// Convenience header pulling in the whole library.

#include "bwgeo/cov_point.hpp"
#include "bwgeo/cov_space.hpp"
#include "bwgeo/errors.hpp"
#include "bwgeo/matrix_io.hpp"
#include "bwgeo/matrix_kernel.hpp"
#include "bwgeo/oracles.hpp"
#include "bwgeo/psd_stratum_geometry.hpp"
#include "bwgeo/segment.hpp"
#include "bwgeo/spd_geometry.hpp"
#include "bwgeo/tolerances.hpp"
