// dsc.hpp - umbrella header

#pragma once

#include "dsc/units.hpp"
#include "dsc/diagnostics.hpp"
#include "dsc/fock.hpp"
#include "dsc/rabi.hpp"
#include "dsc/spectrum.hpp"
#include "dsc/states.hpp"
#include "dsc/entanglement.hpp"
#include "dsc/wigner.hpp"
#include "dsc/circuit.hpp"
#include "dsc/specfit.hpp"
#include "dsc/presets.hpp"
#include "dsc/io.hpp"
