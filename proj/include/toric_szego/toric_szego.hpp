#pragma once

#include "errors.hpp"
#include "polytope.hpp"
#include "partition.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"
#include "norming.hpp"
#include "kernels.hpp"
#include "characters.hpp"
