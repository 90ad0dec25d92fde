#pragma once

#include "logfem/error.hpp"
#include "logfem/fd.hpp"
#include "logfem/fem.hpp"
#include "logfem/lattice.hpp"
#include "logfem/mesh.hpp"
#include "logfem/parallel.hpp"
#include "logfem/report_io.hpp"
#include "logfem/solve.hpp"
#include "logfem/sparse.hpp"
#include "logfem/spectral.hpp"
#include "logfem/study.hpp"
