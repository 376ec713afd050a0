#ifndef DFORGE_DFORGE_HPP
#define DFORGE_DFORGE_HPP

#include <dforge/certificate.hpp>
#include <dforge/determinant.hpp>
#include <dforge/diff_poly.hpp>
#include <dforge/error.hpp>
#include <dforge/formal_eval.hpp>
#include <dforge/io.hpp>
#include <dforge/lattice.hpp>
#include <dforge/obstruction.hpp>
#include <dforge/parse.hpp>
#include <dforge/series.hpp>
#include <dforge/transforms.hpp>
#include <dforge/wronskian.hpp>

#endif
