#pragma once

#include "qct/channels.hpp"
#include "qct/compiler.hpp"
#include "qct/error.hpp"
#include "qct/json_io.hpp"
#include "qct/linalg.hpp"
#include "qct/metrics.hpp"
#include "qct/random.hpp"
#include "qct/schur_weyl.hpp"
#include "qct/tensor.hpp"
#include "qct/testers.hpp"
#include "qct/tomography.hpp"
#include "qct/twirl.hpp"
