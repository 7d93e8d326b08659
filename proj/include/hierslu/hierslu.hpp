#pragma once

#include "hierslu/autodiff.hpp"
#include "hierslu/baselines.hpp"
#include "hierslu/checkpoint.hpp"
#include "hierslu/corpus.hpp"
#include "hierslu/encoder.hpp"
#include "hierslu/error.hpp"
#include "hierslu/gradcheck.hpp"
#include "hierslu/gradcheck_suite.hpp"
#include "hierslu/hier_model.hpp"
#include "hierslu/metrics.hpp"
#include "hierslu/model_io.hpp"
#include "hierslu/optim.hpp"
#include "hierslu/snapshot.hpp"
#include "hierslu/synth.hpp"
#include "hierslu/tensor.hpp"
