#pragma once

#include "airyproc/airy_function.hpp"
#include "airyproc/asymptotics.hpp"
#include "airyproc/fredholm.hpp"
#include "airyproc/matrix_mc.hpp"
#include "airyproc/numerics/dense_matrix.hpp"
#include "airyproc/numerics/finite_difference.hpp"
#include "airyproc/numerics/hermitian_eigen.hpp"
#include "airyproc/numerics/parallel.hpp"
#include "airyproc/numerics/quadrature.hpp"
#include "airyproc/numerics/random.hpp"
#include "airyproc/painleve.hpp"
#include "airyproc/pde_check.hpp"
