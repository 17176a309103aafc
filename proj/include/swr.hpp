#pragma once

#include "swr/complexity.hpp"
#include "swr/config.hpp"
#include "swr/scenario.hpp"
