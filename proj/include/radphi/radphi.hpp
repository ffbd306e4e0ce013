#pragma once

#include "radphi/error.hpp"
#include "radphi/expr.hpp"
#include "radphi/quadrature.hpp"
#include "radphi/models.hpp"
#include "radphi/problem.hpp"
#include "radphi/functionals.hpp"
#include "radphi/solver.hpp"
#include "radphi/classify.hpp"
#include "radphi/config.hpp"
#include "radphi/output.hpp"
