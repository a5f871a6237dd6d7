#pragma once

#include "cjss/bounds.hpp"
#include "cjss/cj_filter.hpp"
#include "cjss/core.hpp"
#include "cjss/dense.hpp"
#include "cjss/driver.hpp"
#include "cjss/moments.hpp"
#include "cjss/projection.hpp"
#include "cjss/random.hpp"
#include "cjss/sparse_hermitian.hpp"
#include "cjss/spurion.hpp"
