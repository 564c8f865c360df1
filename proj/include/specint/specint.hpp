#pragma once

#include <specint/common.hpp>
#include <specint/core.hpp>
#include <specint/direct_integral.hpp>
#include <specint/io.hpp>
#include <specint/pvm.hpp>
#include <specint/sampling.hpp>
#include <specint/sections.hpp>
#include <specint/selfadjoint_probe.hpp>
#include <specint/spectral_measure.hpp>
