// Umbrella header for the whole library.
#pragma once

#include "loadcast/bench.hpp"
#include "loadcast/calendar.hpp"
#include "loadcast/commands.hpp"
#include "loadcast/common.hpp"
#include "loadcast/data/dataset.hpp"
#include "loadcast/data/ingest.hpp"
#include "loadcast/data/split.hpp"
#include "loadcast/data/synth.hpp"
#include "loadcast/kernels.hpp"
#include "loadcast/krr.hpp"
#include "loadcast/metrics.hpp"
#include "loadcast/model_io.hpp"
#include "loadcast/numlin.hpp"
#include "loadcast/observation.hpp"
#include "loadcast/okl.hpp"
#include "loadcast/rng.hpp"
#include "loadcast/train.hpp"
