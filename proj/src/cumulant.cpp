#include <algorithm>
#include <vector>

#include "delayosc/errors.hpp"
#include "delayosc/moments.hpp"

namespace delayosc::moments {

namespace {

// Set partitions of {0..n-1} as restricted growth strings; calls f(blocks)
// with each block given as a bitmask.
template <class F>
void for_each_partition(std::uint32_t n, F&& f) {
    std::vector<std::uint32_t> a(n, 0), mx(n, 0);
    while (true) {
        std::uint32_t nblocks = 0;
        for (std::uint32_t i = 0; i < n; ++i) nblocks = std::max(nblocks, a[i] + 1);
        std::vector<std::uint64_t> blocks(nblocks, 0);
        for (std::uint32_t i = 0; i < n; ++i) blocks[a[i]] |= std::uint64_t{1} << i;
        f(blocks);
        // next restricted growth string
        std::int64_t i = static_cast<std::int64_t>(n) - 1;
        while (i > 0 && a[i] == mx[i - 1] + 1) --i;
        if (i <= 0) return;
        ++a[i];
        for (std::uint32_t j = static_cast<std::uint32_t>(i); j < n; ++j) {
            if (j > static_cast<std::uint32_t>(i)) a[j] = 0;
            mx[j] = std::max(mx[j - 1], a[j]);
        }
    }
}

}  // namespace

CumulantExpander::CumulantExpander(std::uint32_t k) : k_(k) {
    if (k < 1) throw InvalidArgument("cumulant order must be >= 1");
}

const MomentPolynomial& CumulantExpander::expand(const OperatorWord& word) {
    if (auto it = cache_.find(word); it != cache_.end()) return it->second;
    const std::uint32_t n = word.order();
    if (n > 63) throw InvalidArgument("operator word too long for cumulant expansion");
    if (n <= k_) return cache_.emplace(word, MomentPolynomial::of(word)).first->second;

    MomentPolynomial out;
    for_each_partition(n, [&](const std::vector<std::uint64_t>& blocks) {
        const std::size_t b = blocks.size();
        if (b == 1) return;
        double coef = (b % 2 == 0) ? 1.0 : -1.0;
        for (std::size_t i = 2; i < b; ++i) coef *= static_cast<double>(i);
        MomentPolynomial prod = MomentPolynomial::constant(coef);
        for (std::uint64_t mask : blocks) {
            const OperatorWord sub = word.subword(mask);
            const MomentPolynomial piece = sub.order() > k_ ? MomentPolynomial(expand(sub)) : MomentPolynomial::of(sub);
            prod = prod * piece;
        }
        out += prod;
    });
    return cache_.emplace(word, std::move(out)).first->second;
}

MomentPolynomial cumulant_expand(const OperatorWord& word, std::uint32_t k) {
    CumulantExpander e(k);
    return e.expand(word);
}

}  // namespace delayosc::moments
