#pragma once

#include "cknn/bipartite_index.hpp"
#include "cknn/candidate_selection.hpp"
#include "cknn/data_io.hpp"
#include "cknn/error.hpp"
#include "cknn/evaluation.hpp"
#include "cknn/logging.hpp"
#include "cknn/recommender.hpp"
#include "cknn/report.hpp"
#include "cknn/rng.hpp"
#include "cknn/similarity.hpp"
