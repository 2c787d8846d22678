#pragma once

#include "fockstop/cocycle.hpp"
#include "fockstop/serialize.hpp"
#include "fockstop/strong_markov.hpp"
