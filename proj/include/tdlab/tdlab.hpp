#ifndef TDLAB_TDLAB_HPP
#define TDLAB_TDLAB_HPP

#include "tdlab/counting.hpp"
#include "tdlab/experiment.hpp"
#include "tdlab/fourier.hpp"
#include "tdlab/linalg.hpp"
#include "tdlab/nlss.hpp"
#include "tdlab/onebody_oracle.hpp"
#include "tdlab/operators.hpp"
#include "tdlab/propagator.hpp"
#include "tdlab/report.hpp"
#include "tdlab/strichartz.hpp"

#endif
