#pragma once

#include "relmaup/vec2.hpp"
#include "relmaup/errors.hpp"
#include "relmaup/potentials.hpp"
#include "relmaup/loopspace.hpp"
#include "relmaup/fourier.hpp"
#include "relmaup/homotopy.hpp"
#include "relmaup/optimizer.hpp"
#include "relmaup/reparam.hpp"
#include "relmaup/integrator.hpp"
#include "relmaup/circular.hpp"
