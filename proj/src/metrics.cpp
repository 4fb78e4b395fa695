#include "fouriermask/metrics.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fouriermask {

namespace {

void check_pair(const MaskRaster& pred, const MaskRaster& target) {
    if (pred.h != target.h || pred.w != target.w || pred.size() != target.size()) {
        throw std::invalid_argument("metrics: shape mismatch " + std::to_string(pred.h) + "x" +
                                    std::to_string(pred.w) + " vs " + std::to_string(target.h) +
                                    "x" + std::to_string(target.w));
    }
}

struct Overlap {
    double inter = 0.0;
    double uni = 0.0;
};

Overlap overlap(const MaskRaster& pred, const MaskRaster& target) {
    Overlap o;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        o.inter += std::min(pred.values[i], target.values[i]);
        o.uni += std::max(pred.values[i], target.values[i]);
    }
    return o;
}

}  // namespace

double soft_iou(const MaskRaster& pred, const MaskRaster& target) {
    check_pair(pred, target);
    const Overlap o = overlap(pred, target);
    if (o.uni <= 0.0) return 1.0;
    return std::clamp(o.inter / o.uni, 0.0, 1.0);
}

double iou_loss(const MaskRaster& pred, const MaskRaster& target) {
    return 1.0 - soft_iou(pred, target);
}

std::vector<double> iou_loss_gradient(const MaskRaster& pred, const MaskRaster& target) {
    check_pair(pred, target);
    std::vector<double> grad(pred.size(), 0.0);
    const Overlap o = overlap(pred, target);
    if (o.uni <= 0.0) return grad;
    const double inv_u = 1.0 / o.uni;
    const double ratio_over_u = o.inter * inv_u * inv_u;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        // loss = 1 - I/U;  dloss = -(dI * U - I * dU) / U^2
        if (pred.values[i] <= target.values[i]) {
            grad[i] = -inv_u;
        } else {
            grad[i] = ratio_over_u;
        }
    }
    return grad;
}

}  // namespace fouriermask
