#include "tenprox/prox.hpp"

#include <cmath>

namespace tenprox {

DenseTensor soft_threshold(const DenseTensor& p, double gamma)
{
    if (gamma < 0.0)
        throw ParameterError("soft_threshold: gamma must be nonnegative");
    if (gamma == 0.0)
        return p;
    DenseTensor out = p;
    for (double& v : out.data()) {
        if (v >= gamma)
            v -= gamma;
        else if (v <= -gamma)
            v += gamma;
        else
            v = 0.0;
    }
    return out;
}

GradientField soft_threshold(const GradientField& p, double gamma)
{
    GradientField out;
    out.blocks.reserve(p.blocks.size());
    for (const auto& b : p.blocks)
        out.blocks.push_back(soft_threshold(b, gamma));
    return out;
}

double l1_value(const DenseTensor& x)
{
    return k_norm(x, 1);
}

double l1_value(const GradientField& x)
{
    double s = 0.0;
    for (const auto& b : x.blocks) s += k_norm(b, 1);
    return s;
}

} // namespace tenprox
