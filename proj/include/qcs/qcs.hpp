#pragma once

// Umbrella header for the quantized-compressed-sensing toolkit.

#include "qcs/bdq.hpp"
#include "qcs/errors.hpp"
#include "qcs/hr.hpp"
#include "qcs/metrics.hpp"
#include "qcs/quantizer.hpp"
#include "qcs/rng.hpp"
#include "qcs/sensing.hpp"
#include "qcs/signals.hpp"
#include "qcs/truncnorm.hpp"
#include "qcs/wire.hpp"
