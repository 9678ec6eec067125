#pragma once

#include "trapsim/types.hpp"
#include "trapsim/fock.hpp"
#include "trapsim/hamiltonian.hpp"
#include "trapsim/evolve.hpp"
#include "trapsim/qubit.hpp"
#include "trapsim/thermal.hpp"
