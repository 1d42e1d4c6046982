#pragma once

#include <vector>

#include "nanozk/group.hpp"

namespace nanozk::zk {

// C = h^r * prod_i g[offset+i]^{a_i} mod p. Generator slices let the
// two-vector argument commit its sides over disjoint bases.
Bn pedersen_commit(const GroupParams& g, const std::vector<Bn>& a, const Bn& r,
                   size_t gen_offset = 0);

// Commitment to a row of fixed-point codes (sign-lifted into the field).
Bn pedersen_commit_codes(const GroupParams& g, const int64_t* codes, size_t n, const Bn& r,
                         size_t gen_offset = 0);

}  // namespace nanozk::zk
