#ifndef EXPLICABLE_EXPLICABLE_HPP_
#define EXPLICABLE_EXPLICABLE_HPP_

#include "explicable/csv.hpp"
#include "explicable/error.hpp"
#include "explicable/lemmas.hpp"
#include "explicable/loss.hpp"
#include "explicable/metrics.hpp"
#include "explicable/simulation.hpp"
#include "explicable/taxonomy.hpp"
#include "explicable/trainer.hpp"
#include "explicable/weights.hpp"

#endif  // EXPLICABLE_EXPLICABLE_HPP_
