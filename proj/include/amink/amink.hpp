#pragma once

#include "amink/content.hpp"
#include "amink/convex.hpp"
#include "amink/errors.hpp"
#include "amink/quadrature.hpp"
#include "amink/rectifiable.hpp"
#include "amink/scenarios.hpp"
#include "amink/scene.hpp"
#include "amink/tube.hpp"
