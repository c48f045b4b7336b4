#pragma once

#include "wellposed/errors.hpp"
#include "wellposed/types.hpp"
#include "wellposed/linalg.hpp"
#include "wellposed/random.hpp"
#include "wellposed/system_node.hpp"
#include "wellposed/feedback.hpp"
#include "wellposed/gramian.hpp"
#include "wellposed/boundary.hpp"
#include "wellposed/beam.hpp"
#include "wellposed/io.hpp"
#include "wellposed/experiments.hpp"
