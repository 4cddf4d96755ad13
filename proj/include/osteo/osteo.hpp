#pragma once

#include "osteo/dataset.hpp"
#include "osteo/eda.hpp"
#include "osteo/ensemble.hpp"
#include "osteo/explain.hpp"
#include "osteo/linear.hpp"
#include "osteo/metrics.hpp"
#include "osteo/params.hpp"
#include "osteo/serialize.hpp"
#include "osteo/tree.hpp"
#include "osteo/tuning.hpp"
