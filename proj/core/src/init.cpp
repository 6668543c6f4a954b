#include "airbench/init.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <vector>

#include "airbench/errors.hpp"
#include "airbench/thread_pool.hpp"

namespace airbench {

Tensor extract_patches(const Tensor& images, int ph, int pw) {
    if (images.rank() != 4) {
        throw ShapeError("expected [M,C,H,W] images, got " + shape_str(images.shape()));
    }
    int64_t m = images.dim(0), c = images.dim(1), h = images.dim(2), w = images.dim(3);
    if (ph <= 0 || pw <= 0 || ph > h || pw > w) {
        throw ArgumentError("patch size " + std::to_string(ph) + "x" + std::to_string(pw) +
                            " does not fit " + shape_str(images.shape()));
    }
    int64_t oh = h - ph + 1, ow = w - pw + 1;
    Tensor out({m * oh * ow, c, ph, pw});
    float* op = out.data();
    const float* ip = images.data();
    int64_t patch_e = c * ph * pw;
    ThreadPool::global().parallel_ranges(
        m, std::min<int64_t>(m, 16), [&](int64_t lo, int64_t hi, int64_t) {
            for (int64_t i = lo; i < hi; ++i) {
                float* dst = op + i * oh * ow * patch_e;
                const float* src = ip + i * c * h * w;
                for (int64_t y0 = 0; y0 < oh; ++y0) {
                    for (int64_t x0 = 0; x0 < ow; ++x0) {
                        for (int64_t ch = 0; ch < c; ++ch) {
                            for (int64_t dy = 0; dy < ph; ++dy) {
                                std::memcpy(dst, src + (ch * h + y0 + dy) * w + x0,
                                            static_cast<size_t>(pw) * sizeof(float));
                                dst += pw;
                            }
                        }
                    }
                }
            }
        });
    return out;
}

void jacobi_eigen(std::vector<double>& a, std::vector<double>& v, int d) {
    v.assign(static_cast<size_t>(d) * static_cast<size_t>(d), 0.0);
    for (int i = 0; i < d; ++i) v[static_cast<size_t>(i * d + i)] = 1.0;
    auto at = [&](int r, int c) -> double& { return a[static_cast<size_t>(r * d + c)]; };
    auto vt = [&](int r, int c) -> double& { return v[static_cast<size_t>(r * d + c)]; };

    double frob = 0.0;
    for (double x : a) frob += x * x;
    frob = std::sqrt(frob);
    const double tol = 1e-14 * (frob + 1e-300);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < d; ++p) {
            for (int q = p + 1; q < d; ++q) off += at(p, q) * at(p, q);
        }
        if (std::sqrt(2.0 * off) <= tol) return;

        for (int p = 0; p < d; ++p) {
            for (int q = p + 1; q < d; ++q) {
                double apq = at(p, q);
                if (std::abs(apq) <= tol / d) continue;
                double tau = (at(q, q) - at(p, p)) / (2.0 * apq);
                double t = (tau >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;

                double app = at(p, p), aqq = at(q, q);
                at(p, p) = app - t * apq;
                at(q, q) = aqq + t * apq;
                at(p, q) = 0.0;
                at(q, p) = 0.0;
                for (int k = 0; k < d; ++k) {
                    if (k == p || k == q) continue;
                    double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(p, k) = at(k, p);
                    at(k, q) = s * akp + c * akq;
                    at(q, k) = at(k, q);
                }
                for (int k = 0; k < d; ++k) {
                    double vkp = vt(k, p), vkq = vt(k, q);
                    vt(k, p) = c * vkp - s * vkq;
                    vt(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    throw NumericError("Jacobi eigensolver did not converge in 100 sweeps");
}

WhitenFilters whitening_filters(const Tensor& patches, float eps) {
    if (patches.rank() != 4) {
        throw ShapeError("expected [P,C,ph,pw] patches, got " + shape_str(patches.shape()));
    }
    int64_t p = patches.dim(0);
    int d64 = static_cast<int>(patches.dim(1) * patches.dim(2) * patches.dim(3));
    int d = d64;
    if (p < d) {
        throw ArgumentError("need at least " + std::to_string(d) + " patches, got " +
                            std::to_string(p));
    }

    // Uncentered covariance X^T X / P with deterministic slot-parallel
    // accumulation in double.
    const int64_t slots = std::min<int64_t>(16, p);
    std::vector<std::vector<double>> partial(
        static_cast<size_t>(slots), std::vector<double>(static_cast<size_t>(d) * d, 0.0));
    const float* xp = patches.data();
    ThreadPool::global().parallel_ranges(p, slots, [&](int64_t lo, int64_t hi, int64_t slot) {
        auto& acc = partial[static_cast<size_t>(slot)];
        for (int64_t r = lo; r < hi; ++r) {
            const float* row = xp + r * d;
            for (int i = 0; i < d; ++i) {
                double xi = row[i];
                for (int j = i; j < d; ++j) {
                    acc[static_cast<size_t>(i * d + j)] += xi * row[j];
                }
            }
        }
    });
    std::vector<double> cov(static_cast<size_t>(d) * d, 0.0);
    for (const auto& acc : partial) {
        for (size_t i = 0; i < cov.size(); ++i) cov[i] += acc[i];
    }
    double inv_p = 1.0 / static_cast<double>(p);
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            double val = cov[static_cast<size_t>(i * d + j)] * inv_p;
            cov[static_cast<size_t>(i * d + j)] = val;
            cov[static_cast<size_t>(j * d + i)] = val;
        }
    }

    std::vector<double> vecs;
    jacobi_eigen(cov, vecs, d);

    std::vector<int> order(static_cast<size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        return cov[static_cast<size_t>(i * d + i)] > cov[static_cast<size_t>(j * d + j)];
    });

    WhitenFilters out;
    out.filters = Tensor({d, patches.dim(1), patches.dim(2), patches.dim(3)});
    out.eigenvalues.resize(static_cast<size_t>(d));
    for (int k = 0; k < d; ++k) {
        int src = order[static_cast<size_t>(k)];
        double lambda = std::max(0.0, cov[static_cast<size_t>(src * d + src)]);
        out.eigenvalues[static_cast<size_t>(k)] = static_cast<float>(lambda);

        // sign convention: largest-magnitude component non-negative
        int arg = 0;
        double best = -1.0;
        for (int r = 0; r < d; ++r) {
            double mag = std::abs(vecs[static_cast<size_t>(r * d + src)]);
            if (mag > best) {
                best = mag;
                arg = r;
            }
        }
        double sign = vecs[static_cast<size_t>(arg * d + src)] < 0.0 ? -1.0 : 1.0;
        double scale = sign / std::sqrt(lambda + static_cast<double>(eps));
        for (int r = 0; r < d; ++r) {
            out.filters.data()[k * d + r] =
                static_cast<float>(vecs[static_cast<size_t>(r * d + src)] * scale);
        }
    }
    return out;
}

void init_whiten_layer(Net& net, const Dataset& data, const WhitenConfig& cfg,
                       const NormalizeParams& norm) {
    auto& layer = net.whiten();
    int64_t d = 3 * cfg.patch_h * cfg.patch_w;
    if (layer.weight.dim(0) != 2 * d || layer.weight.dim(1) != 3 ||
        layer.weight.dim(2) != cfg.patch_h || layer.weight.dim(3) != cfg.patch_w) {
        throw ShapeError("whiten layer weight " + shape_str(layer.weight.shape()) +
                         " does not accept " + std::to_string(cfg.patch_h) + "x" +
                         std::to_string(cfg.patch_w) + " whitening filters");
    }
    if (!(cfg.eps > 0.0f)) throw ArgumentError("whitening eps must be positive");

    int64_t m = cfg.sample_count;
    if (data.n() < m) {
        std::fprintf(stderr,
                     "warning: whitening requested %lld images but the dataset has %lld; "
                     "using all\n",
                     static_cast<long long>(m), static_cast<long long>(data.n()));
        m = data.n();
    }
    Tensor images({m, 3, 32, 32});
    for (int64_t i = 0; i < m; ++i) {
        normalize_image(data.image(i), images.data() + i * 3 * 32 * 32, norm);
    }

    Tensor patches = extract_patches(images, cfg.patch_h, cfg.patch_w);
    WhitenFilters filters = whitening_filters(patches, cfg.eps);

    float* w = layer.weight.data();
    const float* f = filters.filters.data();
    for (int64_t k = 0; k < d; ++k) {
        for (int64_t r = 0; r < d; ++r) {
            w[k * d + r] = f[k * d + r];
            w[(k + d) * d + r] = -f[k * d + r];
        }
    }
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0f);
    layer.weight_trainable = false;
}

void dirac_init(Tensor& weight) {
    if (weight.rank() != 4) {
        throw ShapeError("dirac_init expects [Cout,Cin,kh,kw], got " +
                         shape_str(weight.shape()));
    }
    int64_t cout = weight.dim(0), cin = weight.dim(1);
    int64_t kh = weight.dim(2), kw = weight.dim(3);
    int64_t rows = std::min(cout, cin);
    for (int64_t m = 0; m < rows; ++m) {
        float* row = weight.data() + m * cin * kh * kw;
        std::fill(row, row + cin * kh * kw, 0.0f);
        row[(m * kh + kh / 2) * kw + kw / 2] = 1.0f;
    }
}

} // namespace airbench
