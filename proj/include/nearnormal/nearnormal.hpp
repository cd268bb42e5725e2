#pragma once

#include "nearnormal/errors.hpp"
#include "nearnormal/extension.hpp"
#include "nearnormal/holecutter.hpp"
#include "nearnormal/lattice.hpp"
#include "nearnormal/linalg.hpp"
#include "nearnormal/oracle.hpp"
#include "nearnormal/pipeline.hpp"
#include "nearnormal/smoothkit.hpp"
