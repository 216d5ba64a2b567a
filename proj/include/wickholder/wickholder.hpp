#pragma once

// Umbrella header: finite-dimensional Gaussian chaos calculus, T-Wick
// products, Gaussian quadrature and Monte Carlo norms, mixing-measure
// integral representations, and the sharp Holder-Young inequality lab.

#include "wickholder/chaos.hpp"
#include "wickholder/errors.hpp"
#include "wickholder/hermite.hpp"
#include "wickholder/inequality.hpp"
#include "wickholder/integral_repr.hpp"
#include "wickholder/multi_index.hpp"
#include "wickholder/parallel.hpp"
#include "wickholder/quadrature.hpp"
#include "wickholder/rng.hpp"
#include "wickholder/serialize.hpp"
