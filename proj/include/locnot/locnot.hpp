#pragma once

// Umbrella header for the locnot library: simulation and analysis of a
// linear-optical CNOT gate acting on partially distinguishable photon pairs.

#include "locnot/chsh.hpp"
#include "locnot/errors.hpp"
#include "locnot/gate.hpp"
#include "locnot/hom.hpp"
#include "locnot/measurement.hpp"
#include "locnot/oracle.hpp"
#include "locnot/scenario.hpp"
#include "locnot/states.hpp"
#include "locnot/tomography.hpp"
#include "locnot/truth_table.hpp"
#include "locnot/waveform.hpp"
