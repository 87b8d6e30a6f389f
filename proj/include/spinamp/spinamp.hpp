#pragma once

#include "spinamp/errors.hpp"
#include "spinamp/spin_algebra.hpp"
#include "spinamp/models.hpp"
#include "spinamp/averaging.hpp"
#include "spinamp/dynamics.hpp"
#include "spinamp/parameters.hpp"
#include "spinamp/metrics.hpp"
#include "spinamp/config.hpp"
#include "spinamp/io.hpp"
#include "spinamp/product_formula.hpp"
#include "spinamp/pipeline.hpp"
#include "spinamp/verification.hpp"
