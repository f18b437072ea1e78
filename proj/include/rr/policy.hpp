#pragma once

#include <functional>

#include "rr/problem.hpp"

namespace rr {

/// A Problem over tabular softmax policy logits, extended with the expected
/// return J (loss = -J) and the summed per-state policy entropy. The saddle
/// search consumes the extras; every engine sees just `base`.
struct PolicyProblem {
    Problem base;
    std::function<double(const ParamVector&)> expected_return;   // J
    std::function<ParamVector(const ParamVector&)> return_grad;  // grad J
    std::function<double(const ParamVector&)> entropy;
    std::function<ParamVector(const ParamVector&)> entropy_grad;
};

/// Stable softmax over logits[begin, begin+count).
void softmax_block(const ParamVector& logits, std::size_t begin, std::size_t count,
                   double* out_probs);

}  // namespace rr
