#pragma once

#include "scs/bounds.hpp"
#include "scs/codec.hpp"
#include "scs/dct.hpp"
#include "scs/error.hpp"
#include "scs/io.hpp"
#include "scs/nls.hpp"
#include "scs/parallel.hpp"
#include "scs/phantom.hpp"
#include "scs/rng.hpp"
#include "scs/sensing.hpp"
#include "scs/signal.hpp"
#include "scs/solver.hpp"
#include "scs/tensor.hpp"
