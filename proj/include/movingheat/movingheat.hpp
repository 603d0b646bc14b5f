#pragma once

#include "movingheat/errors.hpp"
#include "movingheat/domain_motion.hpp"
#include "movingheat/quadrature.hpp"
#include "movingheat/spectral_basis.hpp"
#include "movingheat/noise.hpp"
#include "movingheat/diffusion_models.hpp"
#include "movingheat/galerkin.hpp"
#include "movingheat/diagnostics.hpp"
#include "movingheat/ensemble.hpp"
#include "movingheat/fd_oracle.hpp"
#include "movingheat/config.hpp"
