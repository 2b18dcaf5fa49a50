#include "fimex/fft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "fimex/errors.hpp"

namespace fimex {

namespace {

struct Plan {
    std::vector<std::size_t> bit_reverse;
    std::vector<Complex> twiddles;  // exp(-2 pi i k / n), k < n/2
};

const Plan& plan_for(std::size_t n)
{
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<const Plan>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) {
        auto p = std::make_unique<Plan>();
        int bits = 0;
        while ((std::size_t{1} << bits) < n) ++bits;
        p->bit_reverse.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (int b = 0; b < bits; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
            p->bit_reverse[i] = r;
        }
        p->twiddles.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
            p->twiddles[k] = {std::cos(angle), std::sin(angle)};
        }
        slot = std::move(p);
    }
    return *slot;
}

Vector transform(const Vector& x, bool inverse)
{
    const auto n = static_cast<std::size_t>(x.size());
    if (!is_power_of_two(n)) throw InvalidArgument("fft length " + std::to_string(n) + " is not a power of two");
    const Plan& plan = plan_for(n);

    Vector out(x.size());
    for (std::size_t i = 0; i < n; ++i) out[static_cast<Eigen::Index>(plan.bit_reverse[i])] = x[static_cast<Eigen::Index>(i)];

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n / len;
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                Complex w = plan.twiddles[k * stride];
                if (inverse) w = std::conj(w);
                const auto a = static_cast<Eigen::Index>(start + k);
                const auto b = static_cast<Eigen::Index>(start + k + half);
                const Complex t = w * out[b];
                out[b] = out[a] - t;
                out[a] += t;
            }
        }
    }
    if (inverse) out /= static_cast<double>(n);
    return out;
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

Vector fft_forward(const Vector& x) { return transform(x, false); }

Vector fft_inverse(const Vector& x) { return transform(x, true); }

}  // namespace fimex
