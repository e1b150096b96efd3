#pragma once

#include "fovcalib/error.hpp"
#include "fovcalib/geometry.hpp"
#include "fovcalib/imaging.hpp"
#include "fovcalib/io.hpp"
#include "fovcalib/model.hpp"
#include "fovcalib/refine.hpp"
#include "fovcalib/synth.hpp"
#include "fovcalib/zeroshot.hpp"
