#pragma once

// Convenience umbrella for the whole library.

#include "nhcsr/coefficients.hpp"
#include "nhcsr/crc32.hpp"
#include "nhcsr/dataset.hpp"
#include "nhcsr/error.hpp"
#include "nhcsr/fem.hpp"
#include "nhcsr/fft.hpp"
#include "nhcsr/field.hpp"
#include "nhcsr/grad_check.hpp"
#include "nhcsr/gridfile.hpp"
#include "nhcsr/io.hpp"
#include "nhcsr/losses.hpp"
#include "nhcsr/manifest.hpp"
#include "nhcsr/metrics.hpp"
#include "nhcsr/model.hpp"
#include "nhcsr/rng.hpp"
#include "nhcsr/tensor.hpp"
#include "nhcsr/tensor_image.hpp"
#include "nhcsr/train.hpp"
#include "nhcsr/viz.hpp"
