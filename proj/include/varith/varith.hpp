#pragma once

#include "error.hpp"
#include "moments.hpp"
#include "uncertain.hpp"
#include "taylor.hpp"
#include "matrix.hpp"
#include "regression.hpp"
#include "stats.hpp"
#include "spectral.hpp"
#include "harness.hpp"
#include "csv.hpp"
