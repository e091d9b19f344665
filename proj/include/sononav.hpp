#pragma once

// Umbrella header for the engine core (no networking).

#include "sononav/alignment.hpp"
#include "sononav/calibration.hpp"
#include "sononav/config.hpp"
#include "sononav/engine.hpp"
#include "sononav/error.hpp"
#include "sononav/geometry.hpp"
#include "sononav/handoff.hpp"
#include "sononav/mapping.hpp"
#include "sononav/osc.hpp"
#include "sononav/render.hpp"
#include "sononav/scenario.hpp"
#include "sononav/session.hpp"
#include "sononav/stats.hpp"
#include "sononav/stream.hpp"
#include "sononav/summarize.hpp"
#include "sononav/synth.hpp"
#include "sononav/wav.hpp"
