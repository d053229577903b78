#pragma once

#include "fedshield/data_synth.hpp"
#include "fedshield/dataset_io.hpp"
#include "fedshield/embedder.hpp"
#include "fedshield/error.hpp"
#include "fedshield/experiment.hpp"
#include "fedshield/fed/aggregate.hpp"
#include "fedshield/fed/config.hpp"
#include "fedshield/fed/engine.hpp"
#include "fedshield/fed/local_trainer.hpp"
#include "fedshield/logreg.hpp"
#include "fedshield/metrics.hpp"
#include "fedshield/net/client.hpp"
#include "fedshield/net/server.hpp"
#include "fedshield/net/socket.hpp"
#include "fedshield/net/wire.hpp"
#include "fedshield/partition.hpp"
#include "fedshield/report.hpp"
#include "fedshield/rng.hpp"
#include "fedshield/serialize.hpp"
#include "fedshield/types.hpp"
