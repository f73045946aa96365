#ifndef HCDESIGN_HCDESIGN_HPP
#define HCDESIGN_HCDESIGN_HPP

#include "hcdesign/circuit.hpp"
#include "hcdesign/construct.hpp"
#include "hcdesign/criteria.hpp"
#include "hcdesign/error.hpp"
#include "hcdesign/estimation.hpp"
#include "hcdesign/parallel.hpp"
#include "hcdesign/routes.hpp"
#include "hcdesign/search.hpp"
#include "hcdesign/simulation.hpp"

#endif  // HCDESIGN_HCDESIGN_HPP
