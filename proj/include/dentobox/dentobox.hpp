#pragma once

#include "dentobox/attention.hpp"
#include "dentobox/errors.hpp"
#include "dentobox/geometry.hpp"
#include "dentobox/image_io.hpp"
#include "dentobox/labelmap.hpp"
#include "dentobox/metrics.hpp"
#include "dentobox/obb.hpp"
#include "dentobox/postprocess.hpp"
#include "dentobox/report.hpp"
