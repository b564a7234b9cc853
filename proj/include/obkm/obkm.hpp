#pragma once

// Online balanced k-means with centroid-based last-coordinate inference:
// umbrella header.

#include "obkm/csv.hpp"
#include "obkm/datagen.hpp"
#include "obkm/eval.hpp"
#include "obkm/inference.hpp"
#include "obkm/matrix.hpp"
#include "obkm/model.hpp"
#include "obkm/rng.hpp"
#include "obkm/snapshot.hpp"
#include "obkm/vde.hpp"
