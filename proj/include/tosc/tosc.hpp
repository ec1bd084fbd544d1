#pragma once

#include "tosc/prob.hpp"
#include "tosc/curve.hpp"
#include "tosc/blahut_arimoto.hpp"
#include "tosc/class_bounds.hpp"
#include "tosc/gmm.hpp"
#include "tosc/snc.hpp"
#include "tosc/io.hpp"
