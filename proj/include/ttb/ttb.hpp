#pragma once

#include "ttb/bounds.hpp"
#include "ttb/config.hpp"
#include "ttb/ensembles.hpp"
#include "ttb/error.hpp"
#include "ttb/montecarlo.hpp"
#include "ttb/random_tensors.hpp"
#include "ttb/report.hpp"
#include "ttb/rng.hpp"
#include "ttb/selftest.hpp"
#include "ttb/serialize.hpp"
#include "ttb/spectral.hpp"
#include "ttb/tensor.hpp"
