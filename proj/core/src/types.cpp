#include "emgpipe/types.hpp"

namespace emg {

bool is_valid_label(int label) { return label >= 0 && label < kNumClasses; }

std::vector<int> compute_repetition_index(const std::vector<int>& labels) {
  std::vector<int> rep(labels.size(), 0);
  std::array<int, kNumClasses> seen{};
  int previous = kRestLabel;
  int current_rep = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int label = labels[i];
    if (label != kRestLabel) {
      if (label != previous) {
        current_rep = ++seen[label];
      }
      rep[i] = current_rep;
    }
    previous = label;
  }
  return rep;
}

}  // namespace emg
