#pragma once

#include <stdexcept>
#include <string>

namespace dentobox {

// Unreadable or malformed input files, including out-of-range pixel values.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A violated precondition or domain invariant (bad dimensions, bad config).
struct invariant_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The requested tooth label has no pixels in the map.
struct missing_label_error : invariant_error {
  using invariant_error::invariant_error;
};

// Mask too small or directionless to orient.
struct degenerate_mask_error : invariant_error {
  using invariant_error::invariant_error;
};

// Prediction/ground-truth inputs could not be paired by filename stem.
struct pairing_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dentobox
