#pragma once

#include "maschine/checkpoint.hpp"
#include "maschine/classification.hpp"
#include "maschine/clustering.hpp"
#include "maschine/error.hpp"
#include "maschine/graph.hpp"
#include "maschine/ids.hpp"
#include "maschine/io.hpp"
#include "maschine/link_prediction.hpp"
#include "maschine/matrix.hpp"
#include "maschine/model.hpp"
#include "maschine/pca.hpp"
#include "maschine/protograph.hpp"
#include "maschine/random.hpp"
#include "maschine/report.hpp"
#include "maschine/schema.hpp"
#include "maschine/training.hpp"
#include "maschine/vocabulary.hpp"
