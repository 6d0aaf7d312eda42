#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bmg/kernels.hpp"

// Counter-based random streams. A path segment owns two independent streams
// addressed by (seed, path, segment): one of normals for the Brownian
// increments, one of uniforms for everything else (bridge tests, ray choices,
// exponential thresholds). Draw j is a pure function of the address, so paths
// are reproducible under any scheduling.

namespace bmg {

namespace stream_detail {

inline std::uint64_t make_key(std::uint64_t seed, std::uint64_t path) {
    return (seed << 32) | (path & 0xFFFFFFFFull);
}

template <int Sub>
class BufferedStream {
  public:
    BufferedStream(std::uint64_t seed, std::uint64_t path, std::uint64_t segment)
        : key_(make_key(seed, path)), ctr_hi_(segment * 4 + Sub) {}

    double next() {
        if (pos_ == kBuf) refill();
        return buf_[pos_++];
    }

    void fill(double* out, int n) {
        while (n > 0) {
            if (pos_ == kBuf) refill();
            const int take = std::min(n, kBuf - pos_);
            for (int i = 0; i < take; ++i) out[i] = buf_[pos_ + i];
            pos_ += take;
            out += take;
            n -= take;
        }
    }

  protected:
    static constexpr int kBuf = 256;  // even: refills stay block-aligned

    void refill() {
        generate(key_, ctr_hi_, block_, kBuf, buf_.data());
        block_ += kBuf / 2;  // one Philox block yields two draws
        pos_ = 0;
    }

    virtual void generate(std::uint64_t key, std::uint64_t hi, std::uint64_t lo,
                          int n, double* out) = 0;

  private:
    std::uint64_t key_, ctr_hi_, block_ = 0;
    int pos_ = kBuf;
    std::array<double, kBuf> buf_;
};

}  // namespace stream_detail

class NormalStream final : public stream_detail::BufferedStream<0> {
  public:
    using BufferedStream::BufferedStream;

  protected:
    void generate(std::uint64_t key, std::uint64_t hi, std::uint64_t lo, int n,
                  double* out) override {
        kernels::ops().normals(key, hi, lo, n, out);
    }
};

class UniformStream final : public stream_detail::BufferedStream<1> {
  public:
    using BufferedStream::BufferedStream;

    double exponential() { return -std::log(next()); }

    int categorical(const std::vector<double>& p) {
        const double u = next();
        double acc = 0;
        for (int i = 0; i < static_cast<int>(p.size()); ++i) {
            acc += p[i];
            if (u < acc) return i;
        }
        return static_cast<int>(p.size()) - 1;
    }

  protected:
    void generate(std::uint64_t key, std::uint64_t hi, std::uint64_t lo, int n,
                  double* out) override {
        kernels::ops().uniforms(key, hi, lo, n, out);
    }
};

}  // namespace bmg
