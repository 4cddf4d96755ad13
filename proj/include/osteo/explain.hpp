#pragma once

#include "osteo/lime.hpp"
#include "osteo/pfi.hpp"
#include "osteo/treeshap.hpp"
