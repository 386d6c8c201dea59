#pragma once

#include "ordmix/baselines.hpp"
#include "ordmix/io.hpp"
#include "ordmix/kmeans.hpp"
#include "ordmix/linalg.hpp"
#include "ordmix/matvar.hpp"
#include "ordmix/metrics.hpp"
#include "ordmix/mom.hpp"
#include "ordmix/normal.hpp"
#include "ordmix/ordinal.hpp"
#include "ordmix/parallel.hpp"
#include "ordmix/rng.hpp"
#include "ordmix/simulate.hpp"
#include "ordmix/trunc.hpp"
