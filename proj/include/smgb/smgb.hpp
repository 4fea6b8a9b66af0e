#pragma once

// Sparse matrix-variate Gaussian-process blockmodels: binary network
// data, RBF kernel over latent memberships, variational EM with the
// eigendecomposition shortcut, link scoring, and recovery metrics.

#include "smgb/estep.hpp"
#include "smgb/evaluation.hpp"
#include "smgb/io.hpp"
#include "smgb/kernel.hpp"
#include "smgb/mstep.hpp"
#include "smgb/network.hpp"
#include "smgb/owlqn.hpp"
#include "smgb/trainer.hpp"
#include "smgb/types.hpp"
