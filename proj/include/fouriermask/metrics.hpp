#pragma once

#include <vector>

#include "fouriermask/fourier.hpp"

namespace fouriermask {

/// sum(min(pred, target)) / sum(max(pred, target)). Two all-zero rasters give 1.
double soft_iou(const MaskRaster& pred, const MaskRaster& target);

/// 1 - soft_iou.
double iou_loss(const MaskRaster& pred, const MaskRaster& target);

/// Subgradient of iou_loss with respect to each prediction value, row-major.
/// At a tie (pred == target) the pixel is treated as the min branch, so it
/// contributes to the intersection and not to the union.
std::vector<double> iou_loss_gradient(const MaskRaster& pred, const MaskRaster& target);

}  // namespace fouriermask
