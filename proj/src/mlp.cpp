#include "pinnsel/mlp.hpp"

#include <cmath>
#include <cstring>
#include <numeric>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "mlp_kernels.hpp"

namespace pinnsel {

std::size_t MlpParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += w.size();
    for (const auto& b : biases) n += b.size();
    return n;
}

bool MlpParams::same_shape(const MlpParams& o) const {
    return widths == o.widths;
}

void MlpParams::set_zero() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

static void validate_widths(const std::vector<int>& widths) {
    if (widths.size() < 2) throw std::invalid_argument("init_params: need at least input and output layers");
    if (widths.front() != 2) throw std::invalid_argument("init_params: input width must be 2 (x, t)");
    if (widths.back() != 1) throw std::invalid_argument("init_params: output width must be 1");
    for (int w : widths) {
        if (w < 1) throw std::invalid_argument("init_params: layer widths must be positive");
    }
}

MlpParams init_params(const std::vector<int>& widths, std::uint64_t seed) {
    validate_widths(widths);
    MlpParams p;
    p.widths = widths;
    Rng rng(Rng::mix(seed, 0x6d6c70 /* "mlp" */));
    const int layers = static_cast<int>(widths.size()) - 1;
    p.weights.resize(layers);
    p.biases.resize(layers);
    for (int l = 0; l < layers; ++l) {
        const int nin = widths[l], nout = widths[l + 1];
        const double scale = std::sqrt(2.0 / (nin + nout));
        p.weights[l].resize(static_cast<std::size_t>(nin) * nout);
        for (double& w : p.weights[l]) w = scale * rng.normal();
        p.biases[l].assign(nout, 0.0);
    }
    return p;
}

namespace {

using kernels::broadcast;
using kernels::hsum;
using kernels::load4;
using kernels::store4;
using kernels::tanh4;
using kernels::v4;

inline int pad4(int n) { return (n + 3) & ~3; }

// Channel-separated (value, d/dx, d/dt, d2/dx2) storage per level, padded to
// a multiple of four so elementwise passes can run in full vectors. Padding
// lanes start at zero and stay zero through every pass.
struct JetWorkspace {
    struct Level {
        std::vector<double> av, ax, at, axx;    // post-activation channels
        std::vector<double> zx, zt, zxx;        // hidden pre-activation channels
    };
    std::vector<Level> level;
    std::vector<double> zv;                     // scratch pre-activation values
    std::vector<double> bv, bx, bt, bxx;        // adjoints of the current level
    std::vector<double> pv, px, pt, pxx;        // adjoints of the previous level

    void resize(const std::vector<int>& widths) {
        level.resize(widths.size());
        int maxw = 4;
        for (std::size_t l = 0; l < widths.size(); ++l) {
            const int m = pad4(widths[l]);
            maxw = std::max(maxw, m);
            level[l].av.assign(m, 0.0);
            level[l].ax.assign(m, 0.0);
            level[l].at.assign(m, 0.0);
            level[l].axx.assign(m, 0.0);
            level[l].zx.assign(m, 0.0);
            level[l].zt.assign(m, 0.0);
            level[l].zxx.assign(m, 0.0);
        }
        zv.assign(maxw, 0.0);
        bv.assign(maxw, 0.0);
        bx.assign(maxw, 0.0);
        bt.assign(maxw, 0.0);
        bxx.assign(maxw, 0.0);
        pv.assign(maxw, 0.0);
        px.assign(maxw, 0.0);
        pt.assign(maxw, 0.0);
        pxx.assign(maxw, 0.0);
    }
};

struct ValueWorkspace {
    std::vector<std::vector<double>> a;  // padded activations per level
    std::vector<double> z, bar, prev;

    void resize(const std::vector<int>& widths) {
        a.resize(widths.size());
        int maxw = 4;
        for (std::size_t l = 0; l < widths.size(); ++l) {
            const int m = pad4(widths[l]);
            maxw = std::max(maxw, m);
            a[l].assign(m, 0.0);
        }
        z.assign(maxw, 0.0);
        bar.assign(maxw, 0.0);
        prev.assign(maxw, 0.0);
    }
};

void jet_forward(const MlpParams& p, double x, double t, JetWorkspace& ws) {
    const int L = p.layer_count();
    auto& in = ws.level[0];
    in.av[0] = x;
    in.av[1] = t;
    in.ax[0] = 1.0;
    in.ax[1] = 0.0;
    in.at[0] = 0.0;
    in.at[1] = 1.0;
    in.axx[0] = 0.0;
    in.axx[1] = 0.0;

    for (int l = 1; l <= L; ++l) {
        const int nin = p.widths[l - 1];
        const int nout = p.widths[l];
        const double* W = p.weights[l - 1].data();
        const double* b = p.biases[l - 1].data();
        const auto& prev = ws.level[l - 1];
        auto& cur = ws.level[l];
        const double* av = prev.av.data();
        const double* ax = prev.ax.data();
        const double* at = prev.at.data();
        const double* axx = prev.axx.data();

        for (int j = 0; j < nout; ++j) {
            const double* w = W + static_cast<std::size_t>(j) * nin;
            v4 sv{}, sx{}, st{}, sxx{};
            int i = 0;
            for (; i + 3 < nin; i += 4) {
                const v4 wv = load4(w + i);
                sv += wv * load4(av + i);
                sx += wv * load4(ax + i);
                st += wv * load4(at + i);
                sxx += wv * load4(axx + i);
            }
            double rv = hsum(sv) + b[j];
            double rx = hsum(sx), rt = hsum(st), rxx = hsum(sxx);
            for (; i < nin; ++i) {
                rv += w[i] * av[i];
                rx += w[i] * ax[i];
                rt += w[i] * at[i];
                rxx += w[i] * axx[i];
            }
            if (l < L) {
                ws.zv[j] = rv;
                cur.zx[j] = rx;
                cur.zt[j] = rt;
                cur.zxx[j] = rxx;
            } else {
                cur.av[j] = rv;
                cur.ax[j] = rx;
                cur.at[j] = rt;
                cur.axx[j] = rxx;
            }
        }

        if (l < L) {
            const int m = pad4(nout);
            for (int j = 0; j < m; j += 4) {
                const v4 ph = tanh4(load4(ws.zv.data() + j));
                const v4 p1 = broadcast(1.0) - ph * ph;
                const v4 p2 = broadcast(-2.0) * ph * p1;
                const v4 zx = load4(cur.zx.data() + j);
                const v4 zt = load4(cur.zt.data() + j);
                const v4 zxx = load4(cur.zxx.data() + j);
                store4(cur.av.data() + j, ph);
                store4(cur.ax.data() + j, p1 * zx);
                store4(cur.at.data() + j, p1 * zt);
                store4(cur.axx.data() + j, p2 * zx * zx + p1 * zxx);
            }
        }
    }
}

// Reverse pass over jet_forward; seeds are the adjoints of (u, ux, ut, uxx).
void jet_backward(const MlpParams& p, JetWorkspace& ws, double gv, double gx,
                  double gt, double gxx, MlpParams& grad) {
    const int L = p.layer_count();
    std::fill(ws.bv.begin(), ws.bv.end(), 0.0);
    std::fill(ws.bx.begin(), ws.bx.end(), 0.0);
    std::fill(ws.bt.begin(), ws.bt.end(), 0.0);
    std::fill(ws.bxx.begin(), ws.bxx.end(), 0.0);
    ws.bv[0] = gv;
    ws.bx[0] = gx;
    ws.bt[0] = gt;
    ws.bxx[0] = gxx;

    for (int l = L; l >= 1; --l) {
        const int nin = p.widths[l - 1];
        const int nout = p.widths[l];
        const double* W = p.weights[l - 1].data();
        double* Wg = grad.weights[l - 1].data();
        double* bg = grad.biases[l - 1].data();
        const auto& prev = ws.level[l - 1];
        const double* av = prev.av.data();
        const double* ax = prev.ax.data();
        const double* at = prev.at.data();
        const double* axx = prev.axx.data();

        // ws.b* hold the pre-activation adjoints of level l.
        for (int j = 0; j < nout; ++j) {
            const double bvj = ws.bv[j], bxj = ws.bx[j], btj = ws.bt[j],
                         bxxj = ws.bxx[j];
            double* wg = Wg + static_cast<std::size_t>(j) * nin;
            int i = 0;
            const v4 bv4 = broadcast(bvj), bx4 = broadcast(bxj),
                     bt4 = broadcast(btj), bxx4 = broadcast(bxxj);
            for (; i + 3 < nin; i += 4) {
                v4 acc = load4(wg + i);
                acc += bv4 * load4(av + i);
                acc += bx4 * load4(ax + i);
                acc += bt4 * load4(at + i);
                acc += bxx4 * load4(axx + i);
                store4(wg + i, acc);
            }
            for (; i < nin; ++i) {
                wg[i] += bvj * av[i] + bxj * ax[i] + btj * at[i] + bxxj * axx[i];
            }
            bg[j] += bvj;
        }

        if (l == 1) break;

        const int mp = pad4(nin);
        std::fill(ws.pv.begin(), ws.pv.begin() + mp, 0.0);
        std::fill(ws.px.begin(), ws.px.begin() + mp, 0.0);
        std::fill(ws.pt.begin(), ws.pt.begin() + mp, 0.0);
        std::fill(ws.pxx.begin(), ws.pxx.begin() + mp, 0.0);
        for (int j = 0; j < nout; ++j) {
            const double* w = W + static_cast<std::size_t>(j) * nin;
            const v4 bv4 = broadcast(ws.bv[j]), bx4 = broadcast(ws.bx[j]),
                     bt4 = broadcast(ws.bt[j]), bxx4 = broadcast(ws.bxx[j]);
            int i = 0;
            for (; i + 3 < nin; i += 4) {
                const v4 wv = load4(w + i);
                store4(ws.pv.data() + i, load4(ws.pv.data() + i) + wv * bv4);
                store4(ws.px.data() + i, load4(ws.px.data() + i) + wv * bx4);
                store4(ws.pt.data() + i, load4(ws.pt.data() + i) + wv * bt4);
                store4(ws.pxx.data() + i, load4(ws.pxx.data() + i) + wv * bxx4);
            }
            for (; i < nin; ++i) {
                ws.pv[i] += w[i] * ws.bv[j];
                ws.px[i] += w[i] * ws.bx[j];
                ws.pt[i] += w[i] * ws.bt[j];
                ws.pxx[i] += w[i] * ws.bxx[j];
            }
        }

        // Post- to pre-activation adjoints through the tanh jet of level l-1.
        for (int j = 0; j < mp; j += 4) {
            const v4 ph = load4(prev.av.data() + j);
            const v4 p1 = broadcast(1.0) - ph * ph;
            const v4 p2 = broadcast(-2.0) * ph * p1;
            const v4 p3 = broadcast(-2.0) * (p1 * p1 + ph * p2);
            const v4 zx = load4(prev.zx.data() + j);
            const v4 zt = load4(prev.zt.data() + j);
            const v4 zxx = load4(prev.zxx.data() + j);
            const v4 pv = load4(ws.pv.data() + j);
            const v4 px = load4(ws.px.data() + j);
            const v4 pt = load4(ws.pt.data() + j);
            const v4 pxx = load4(ws.pxx.data() + j);
            store4(ws.bv.data() + j, pv * p1 + px * p2 * zx + pt * p2 * zt +
                                         pxx * (p3 * zx * zx + p2 * zxx));
            store4(ws.bx.data() + j, px * p1 + pxx * broadcast(2.0) * p2 * zx);
            store4(ws.bt.data() + j, pt * p1);
            store4(ws.bxx.data() + j, pxx * p1);
        }
    }
}

double value_forward(const MlpParams& p, double x, double t, ValueWorkspace& ws) {
    const int L = p.layer_count();
    ws.a[0][0] = x;
    ws.a[0][1] = t;
    for (int l = 1; l <= L; ++l) {
        const int nin = p.widths[l - 1];
        const int nout = p.widths[l];
        const double* W = p.weights[l - 1].data();
        const double* b = p.biases[l - 1].data();
        const double* ain = ws.a[l - 1].data();
        for (int j = 0; j < nout; ++j) {
            const double* w = W + static_cast<std::size_t>(j) * nin;
            v4 acc{};
            int i = 0;
            for (; i + 3 < nin; i += 4) acc += load4(w + i) * load4(ain + i);
            double s = hsum(acc) + b[j];
            for (; i < nin; ++i) s += w[i] * ain[i];
            (l < L ? ws.z[j] : ws.a[l][j]) = s;
        }
        if (l < L) {
            const int m = pad4(nout);
            for (int j = 0; j < m; j += 4) {
                store4(ws.a[l].data() + j, tanh4(load4(ws.z.data() + j)));
            }
        }
    }
    return ws.a[L][0];
}

void value_backward(const MlpParams& p, ValueWorkspace& ws, double seed,
                    MlpParams& grad) {
    const int L = p.layer_count();
    std::fill(ws.bar.begin(), ws.bar.end(), 0.0);
    ws.bar[0] = seed;
    for (int l = L; l >= 1; --l) {
        const int nin = p.widths[l - 1];
        const int nout = p.widths[l];
        const double* W = p.weights[l - 1].data();
        double* Wg = grad.weights[l - 1].data();
        double* bg = grad.biases[l - 1].data();
        const double* ain = ws.a[l - 1].data();
        for (int j = 0; j < nout; ++j) {
            const double zb = ws.bar[j];
            double* wg = Wg + static_cast<std::size_t>(j) * nin;
            const v4 zb4 = broadcast(zb);
            int i = 0;
            for (; i + 3 < nin; i += 4) {
                store4(wg + i, load4(wg + i) + zb4 * load4(ain + i));
            }
            for (; i < nin; ++i) wg[i] += zb * ain[i];
            bg[j] += zb;
        }
        if (l == 1) break;
        const int mp = pad4(nin);
        std::fill(ws.prev.begin(), ws.prev.begin() + mp, 0.0);
        for (int j = 0; j < nout; ++j) {
            const double* w = W + static_cast<std::size_t>(j) * nin;
            const v4 zb4 = broadcast(ws.bar[j]);
            int i = 0;
            for (; i + 3 < nin; i += 4) {
                store4(ws.prev.data() + i, load4(ws.prev.data() + i) + zb4 * load4(w + i));
            }
            for (; i < nin; ++i) ws.prev[i] += w[i] * ws.bar[j];
        }
        for (int j = 0; j < mp; j += 4) {
            const v4 ph = load4(ws.a[l - 1].data() + j);
            store4(ws.bar.data() + j,
                   load4(ws.prev.data() + j) * (broadcast(1.0) - ph * ph));
        }
    }
}

MlpParams zero_like(const MlpParams& p) {
    MlpParams g;
    g.widths = p.widths;
    g.weights.resize(p.weights.size());
    g.biases.resize(p.biases.size());
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        g.weights[l].assign(p.weights[l].size(), 0.0);
        g.biases[l].assign(p.biases[l].size(), 0.0);
    }
    return g;
}

void accumulate(MlpParams& into, const MlpParams& from) {
    for (std::size_t l = 0; l < into.weights.size(); ++l) {
        for (std::size_t i = 0; i < into.weights[l].size(); ++i) {
            into.weights[l][i] += from.weights[l][i];
        }
        for (std::size_t i = 0; i < into.biases[l].size(); ++i) {
            into.biases[l][i] += from.biases[l][i];
        }
    }
}

void check_sets(const TrainingData& data, const LossWeights& w) {
    if (w.lambda_ic < 0 || w.lambda_bc < 0 || w.lambda_pde < 0) {
        throw std::invalid_argument("loss: weights must be nonnegative");
    }
    if (w.lambda_ic == 0 && w.lambda_bc == 0 && w.lambda_pde == 0) {
        throw std::invalid_argument("loss: at least one weight must be positive");
    }
    if (w.lambda_ic > 0 && data.ic_points.empty()) {
        throw std::invalid_argument("loss: empty IC set with nonzero lambda_ic");
    }
    if (w.lambda_bc > 0 && data.bc_points.empty()) {
        throw std::invalid_argument("loss: empty BC set with nonzero lambda_bc");
    }
    if (w.lambda_pde > 0 && data.collocation.empty()) {
        throw std::invalid_argument("loss: empty collocation set with nonzero lambda_pde");
    }
    if (data.ic_points.size() != data.ic_values.size() ||
        data.bc_points.size() != data.bc_values.size()) {
        throw std::invalid_argument("loss: point/target size mismatch");
    }
}

constexpr std::size_t kPointChunk = 128;

// Composite loss and optionally its gradient in one fused parallel region.
// Work splits into fixed chunks across the three point sets; chunk partials
// combine in chunk order, so results do not depend on the thread count.
double composite(const MlpParams& p, const TrainingData& data, const LossWeights& w,
                 double nu, int threads, MlpParams* grad) {
    check_sets(data, w);

    struct Task {
        int set;  // 0 = ic, 1 = bc, 2 = collocation
        std::size_t begin, end;
    };
    std::vector<Task> tasks;
    auto add_tasks = [&](int set, std::size_t n, double lambda) {
        if (n == 0 || lambda == 0.0) return;
        for (std::size_t b = 0; b < n; b += kPointChunk) {
            tasks.push_back({set, b, std::min(b + kPointChunk, n)});
        }
    };
    add_tasks(0, data.ic_points.size(), w.lambda_ic);
    add_tasks(1, data.bc_points.size(), w.lambda_bc);
    add_tasks(2, data.collocation.size(), w.lambda_pde);

    std::vector<double> partial(tasks.size(), 0.0);
    std::vector<MlpParams> gpart;
    if (grad) gpart.assign(tasks.size(), zero_like(p));

    const double ic_scale =
        data.ic_points.empty() ? 0.0 : 2.0 * w.lambda_ic / data.ic_points.size();
    const double bc_scale =
        data.bc_points.empty() ? 0.0 : 2.0 * w.lambda_bc / data.bc_points.size();
    const double pde_scale =
        data.collocation.empty() ? 0.0 : 2.0 * w.lambda_pde / data.collocation.size();
    const int L = p.layer_count();

    parallel_chunks(tasks.size(), 1, threads,
                    [&](std::size_t tb, std::size_t te, std::size_t) {
        JetWorkspace jws;
        jws.resize(p.widths);
        ValueWorkspace vws;
        vws.resize(p.widths);
        for (std::size_t ti = tb; ti < te; ++ti) {
            const Task& task = tasks[ti];
            double acc = 0.0;
            if (task.set == 2) {
                for (std::size_t i = task.begin; i < task.end; ++i) {
                    const Point& pt = data.collocation[i];
                    jet_forward(p, pt.x, pt.t, jws);
                    const auto& out = jws.level[L];
                    const double r = out.at[0] + out.av[0] * out.ax[0] - nu * out.axx[0];
                    acc += r * r;
                    if (grad) {
                        const double rb = pde_scale * r;
                        jet_backward(p, jws, rb * out.ax[0], rb * out.av[0], rb,
                                     -rb * nu, gpart[ti]);
                    }
                }
            } else {
                const auto& pts = task.set == 0 ? data.ic_points : data.bc_points;
                const auto& tgt = task.set == 0 ? data.ic_values : data.bc_values;
                const double scale = task.set == 0 ? ic_scale : bc_scale;
                for (std::size_t i = task.begin; i < task.end; ++i) {
                    const double u = value_forward(p, pts[i].x, pts[i].t, vws);
                    const double err = u - tgt[i];
                    acc += err * err;
                    if (grad) value_backward(p, vws, scale * err, gpart[ti]);
                }
            }
            partial[ti] = acc;
        }
    });

    double sums[3] = {0.0, 0.0, 0.0};
    for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
        sums[tasks[ti].set] += partial[ti];
        if (grad) accumulate(*grad, gpart[ti]);
    }
    double total = 0.0;
    if (!data.ic_points.empty() && w.lambda_ic > 0.0) {
        total += w.lambda_ic * sums[0] / data.ic_points.size();
    }
    if (!data.bc_points.empty() && w.lambda_bc > 0.0) {
        total += w.lambda_bc * sums[1] / data.bc_points.size();
    }
    if (!data.collocation.empty() && w.lambda_pde > 0.0) {
        total += w.lambda_pde * sums[2] / data.collocation.size();
    }
    return total;
}

}  // namespace

DerivativeBundle forward_with_derivatives(const MlpParams& p, double x, double t) {
    JetWorkspace ws;
    ws.resize(p.widths);
    jet_forward(p, x, t, ws);
    const auto& out = ws.level[p.layer_count()];
    return DerivativeBundle{out.av[0], out.ax[0], out.at[0], out.axx[0]};
}

double forward_value(const MlpParams& p, double x, double t) {
    ValueWorkspace ws;
    ws.resize(p.widths);
    return value_forward(p, x, t, ws);
}

double residual(const MlpParams& p, double x, double t, double nu) {
    const DerivativeBundle d = forward_with_derivatives(p, x, t);
    return d.u_t + d.u * d.u_x - nu * d.u_xx;
}

double loss(const MlpParams& p, const TrainingData& data, const LossWeights& w,
            double nu, int threads) {
    return composite(p, data, w, nu, threads, nullptr);
}

MlpParams loss_gradient(const MlpParams& p, const TrainingData& data,
                        const LossWeights& w, double nu, int threads,
                        double* loss_out) {
    MlpParams grad = zero_like(p);
    const double total = composite(p, data, w, nu, threads, &grad);
    if (loss_out) *loss_out = total;
    return grad;
}

Trainer::Trainer(MlpParams params, TrainConfig cfg)
    : params_(std::move(params)), cfg_(cfg),
      batch_rng_(Rng::mix(cfg.seed, 0x62617463 /* "batc" */)) {
    if (cfg_.steps < 0) throw std::invalid_argument("TrainConfig: steps must be >= 0");
    if (!(cfg_.learning_rate >= 0.0)) throw std::invalid_argument("TrainConfig: bad learning rate");
    m_ = zero_like(params_);
    v_ = zero_like(params_);
}

void Trainer::run(int steps, const TrainingData& data, const LossWeights& w,
                  double nu) {
    StopWatch watch;
    const int n_col = static_cast<int>(data.collocation.size());
    const bool minibatch = cfg_.batch_size > 0 && cfg_.batch_size < n_col;
    TrainingData batch;
    if (minibatch) {
        batch.ic_points = data.ic_points;
        batch.ic_values = data.ic_values;
        batch.bc_points = data.bc_points;
        batch.bc_values = data.bc_values;
        batch.collocation.resize(cfg_.batch_size);
        if (static_cast<int>(batch_order_.size()) != n_col) {
            batch_order_.resize(n_col);
            std::iota(batch_order_.begin(), batch_order_.end(), 0);
        }
    }
    for (int s = 0; s < steps; ++s) {
        const TrainingData* step_data = &data;
        if (minibatch) {
            // partial Fisher-Yates: a fresh uniform subset each step
            for (int i = 0; i < cfg_.batch_size; ++i) {
                const std::size_t j = i + batch_rng_.integer(batch_order_.size() - i);
                std::swap(batch_order_[i], batch_order_[j]);
                batch.collocation[i] = data.collocation[batch_order_[i]];
            }
            step_data = &batch;
        }
        double cur = 0.0;
        MlpParams g = loss_gradient(params_, *step_data, w, nu, cfg_.threads, &cur);
        if (!std::isfinite(cur)) {
            throw std::runtime_error("train: non-finite loss at step " +
                                     std::to_string(step_));
        }
        if (cfg_.record_every > 0 && step_ % cfg_.record_every == 0) {
            history_.push_back({step_, cur});
        }
        ++step_;
        double lr = cfg_.learning_rate;
        if (cfg_.lr_final > 0.0 && cfg_.steps > 0) {
            const double f = std::min(1.0, static_cast<double>(step_) / cfg_.steps);
            lr = cfg_.learning_rate * std::pow(cfg_.lr_final / cfg_.learning_rate, f);
        }
        const double bc1 = 1.0 - std::pow(cfg_.beta1, step_);
        const double bc2 = 1.0 - std::pow(cfg_.beta2, step_);
        for (std::size_t l = 0; l < params_.weights.size(); ++l) {
            auto update = [&](std::vector<double>& th, std::vector<double>& m,
                              std::vector<double>& v, const std::vector<double>& gr) {
                for (std::size_t i = 0; i < th.size(); ++i) {
                    m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gr[i];
                    v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gr[i] * gr[i];
                    const double mhat = m[i] / bc1;
                    const double vhat = v[i] / bc2;
                    th[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
                }
            };
            update(params_.weights[l], m_.weights[l], v_.weights[l], g.weights[l]);
            update(params_.biases[l], m_.biases[l], v_.biases[l], g.biases[l]);
        }
    }
    seconds_ += watch.seconds();
}

TrainResult train(const MlpParams& init, const TrainingData& data,
                  const LossWeights& w, double nu, const TrainConfig& cfg) {
    Trainer tr(init, cfg);
    tr.run(cfg.steps, data, w, nu);
    TrainResult out;
    out.params = tr.params();
    out.history = tr.history();
    if (cfg.record_every > 0) {
        out.history.push_back({tr.step(), loss(tr.params(), data, w, nu, cfg.threads)});
    }
    out.seconds = tr.train_seconds();
    return out;
}

void save_params(const MlpParams& p, const std::string& path) {
    nlohmann::json header;
    header["format"] = "pinnsel-mlp";
    header["version"] = 1;
    header["widths"] = p.widths;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_params: cannot open " + path);
    f << header.dump() << '\n';
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        f.write(reinterpret_cast<const char*>(p.weights[l].data()),
                static_cast<std::streamsize>(p.weights[l].size() * sizeof(double)));
        f.write(reinterpret_cast<const char*>(p.biases[l].data()),
                static_cast<std::streamsize>(p.biases[l].size() * sizeof(double)));
    }
}

MlpParams load_params(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_params: cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("load_params: missing header");
    const auto header = nlohmann::json::parse(line);
    if (header.value("format", "") != "pinnsel-mlp") {
        throw std::runtime_error("load_params: unrecognized format in " + path);
    }
    const std::vector<int> widths = header.at("widths").get<std::vector<int>>();
    validate_widths(widths);
    MlpParams p;
    p.widths = widths;
    const int layers = static_cast<int>(widths.size()) - 1;
    p.weights.resize(layers);
    p.biases.resize(layers);
    for (int l = 0; l < layers; ++l) {
        p.weights[l].resize(static_cast<std::size_t>(widths[l]) * widths[l + 1]);
        p.biases[l].resize(widths[l + 1]);
        f.read(reinterpret_cast<char*>(p.weights[l].data()),
               static_cast<std::streamsize>(p.weights[l].size() * sizeof(double)));
        f.read(reinterpret_cast<char*>(p.biases[l].data()),
               static_cast<std::streamsize>(p.biases[l].size() * sizeof(double)));
        if (!f) throw std::runtime_error("load_params: truncated file " + path);
    }
    return p;
}

}  // namespace pinnsel
