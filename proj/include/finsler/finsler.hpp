#pragma once

#include "finsler/checks.hpp"
#include "finsler/classify.hpp"
#include "finsler/conformal.hpp"
#include "finsler/expr.hpp"
#include "finsler/geometry.hpp"
#include "finsler/jet.hpp"
#include "finsler/linalg.hpp"
#include "finsler/registry.hpp"
#include "finsler/report.hpp"
#include "finsler/space.hpp"
#include "finsler/tensor.hpp"
#include "finsler/version.hpp"
