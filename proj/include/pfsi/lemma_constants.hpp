#ifndef PFSI_LEMMA_CONSTANTS_HPP
#define PFSI_LEMMA_CONSTANTS_HPP

#include "pfsi/lemma_suite.hpp"

namespace pfsi {

// Output of calibrate_lemma_constants(seed 20240601, 1000 trials, default
// physics). Regenerate with `pfsi calibrate-lemmas`.
inline constexpr LemmaConstants frozen_lemma_constants{117.9179659355371, 2.2024329562657465, 4.2701026862516294,
                                                         0.10746734404646056};
inline constexpr std::uint64_t frozen_lemma_seed = 20240601;
inline constexpr int frozen_lemma_trials = 1000;

}  // namespace pfsi

#endif
