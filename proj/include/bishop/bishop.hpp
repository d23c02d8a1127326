#pragma once

#include "bidegree_series.hpp"
#include "conformal.hpp"
#include "curve.hpp"
#include "disc.hpp"
#include "error.hpp"
#include "family.hpp"
#include "geometry.hpp"
#include "hilbert.hpp"
#include "io.hpp"
#include "manifold.hpp"
#include "normal_form.hpp"
#include "param_poly.hpp"
#include "solver.hpp"
#include "spectral.hpp"
