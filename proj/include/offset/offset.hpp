#pragma once

// Umbrella header for the whole library.

#include "offset/baselines.hpp"
#include "offset/commands.hpp"
#include "offset/config.hpp"
#include "offset/datagen.hpp"
#include "offset/errors.hpp"
#include "offset/layout.hpp"
#include "offset/log_io.hpp"
#include "offset/model.hpp"
#include "offset/ranker.hpp"
#include "offset/replay.hpp"
#include "offset/rng.hpp"
#include "offset/rules.hpp"
#include "offset/schema.hpp"
#include "offset/snapshot.hpp"
#include "offset/stream.hpp"
#include "offset/trainer.hpp"
