#pragma once

#include "projlift/linalg.hpp"
#include "projlift/ensemble.hpp"
#include "projlift/lyapunov.hpp"
#include "projlift/fkh.hpp"
#include "projlift/bundle.hpp"
#include "projlift/measures.hpp"
#include "projlift/homogeneous.hpp"
#include "projlift/designs.hpp"
#include "projlift/io.hpp"
#include "projlift/runner.hpp"
