#pragma once

#include "embodepth/depth_map.hpp"

namespace embodepth {

// Fast-marching inpainting after Telea (2004).
//
// Invalid pixels are holes; sky pixels are barriers that are neither filled
// nor used as sources. Holes are visited in order of their arrival time T of
// the Eikonal equation |grad T| = 1 (first-order upwind, 4-neighbourhood),
// ties broken by (row, column). Each hole pixel p receives
//
//   I(p) = sum_q w(p,q) [I(q) + grad I(q) . (p - q)] / sum_q w(p,q),
//
// over already-known q with |p - q| <= radius, where
//   w = dir * dst * lev,
//   dir = |(p - q) . N(p)| / |p - q|   (N = grad T / |grad T|, floored at 1e-6)
//   dst = 1 / |p - q|^2
//   lev = 1 / (1 + |T(p) - T(q)|)
//
// The result is clamped to the range of the input's valid values. Known
// pixels are copied bit-for-bit.
//
// Throws kDomain when radius < 1 and kCannotInpaint when holes exist but no
// known pixel can reach them.
DepthMap inpaint_telea(const DepthMap& depth, int radius);

}  // namespace embodepth
