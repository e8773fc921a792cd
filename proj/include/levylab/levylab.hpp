#pragma once

#include "levylab/errors.hpp"
#include "levylab/quadrature.hpp"
#include "levylab/levy_models.hpp"
#include "levylab/random.hpp"
#include "levylab/simulate.hpp"
#include "levylab/curve.hpp"
#include "levylab/estimate_direct.hpp"
#include "levylab/fourier.hpp"
#include "levylab/estimate_spectral.hpp"
#include "levylab/inference.hpp"
#include "levylab/io.hpp"
#include "levylab/harness.hpp"
