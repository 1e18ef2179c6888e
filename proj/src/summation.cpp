#include "clvkit/summation.hpp"

#include <cmath>

namespace clvkit {

double compensated_sum(std::span<const double> values) {
    long double sum = 0.0L;
    long double compensation = 0.0L;
    for (const double v : values) {
        const long double x = v;
        const long double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x)) {
            compensation += (sum - t) + x;
        } else {
            compensation += (x - t) + sum;
        }
        sum = t;
    }
    return static_cast<double>(sum + compensation);
}

} // namespace clvkit
