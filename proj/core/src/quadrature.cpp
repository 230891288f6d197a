#include "polyrad/quadrature.hpp"

// The quadrature front end is header-only; this unit pins the template
// instantiations most callers share so they are compiled once.
namespace polyrad::quad {

template Result gauss_kronrod<double (&)(double)>(double (&)(double), double, double, double, unsigned);

}  // namespace polyrad::quad
