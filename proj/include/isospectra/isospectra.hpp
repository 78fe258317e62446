#pragma once

#include "isospectra/analytic_spectra.hpp"
#include "isospectra/coulomb_gas.hpp"
#include "isospectra/empirics.hpp"
#include "isospectra/errors.hpp"
#include "isospectra/haar_ensemble.hpp"
#include "isospectra/io.hpp"
#include "isospectra/quadrature.hpp"
#include "isospectra/spectral_density.hpp"
#include "isospectra/transitions.hpp"
