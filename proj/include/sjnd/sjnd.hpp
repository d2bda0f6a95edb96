#pragma once

#include "sjnd/assess.hpp"
#include "sjnd/config.hpp"
#include "sjnd/dct.hpp"
#include "sjnd/error.hpp"
#include "sjnd/fovea.hpp"
#include "sjnd/image_io.hpp"
#include "sjnd/jnd2d.hpp"
#include "sjnd/pipeline.hpp"
#include "sjnd/qpmap.hpp"
#include "sjnd/raster.hpp"
#include "sjnd/sphere.hpp"
#include "sjnd/viewing.hpp"
#include "sjnd/viewport.hpp"
