#include "echonav/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "echonav/losses.hpp"

namespace echonav {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

CMapMat as_mat(const Tensor& t) { return CMapMat(t.v.data(), t.rows(), t.cols()); }
MapMat as_mat(Tensor& t) { return MapMat(t.v.data(), t.rows(), t.cols()); }

void fill_xavier(Tensor& w, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (auto& x : w.v) x = rng.uniform(-a, a);
}

} // namespace

void check_finite(const Tensor& t, const std::string& name) {
    for (double x : t.v)
        if (!std::isfinite(x))
            throw std::runtime_error("non-finite value in tensor '" + name + "'");
}

const std::array<const char*, 6>& ModelParams::field_names() {
    static const std::array<const char*, 6> names = {"W1", "b1", "W2", "b2", "Wp", "bp"};
    return names;
}

ModelParams ModelParams::init(const ModelDims& dims, uint64_t seed) {
    if (dims.input <= 0 || dims.hidden <= 0 || dims.embed <= 0)
        throw std::runtime_error("ModelParams: dims must be positive");
    ModelParams p;
    p.dims = dims;
    p.W1 = Tensor({dims.hidden, dims.input});
    p.b1 = Tensor({dims.hidden});
    p.W2 = Tensor({dims.embed, dims.hidden});
    p.b2 = Tensor({dims.embed});
    p.Wp = Tensor({ModelDims::actions, dims.embed});
    p.bp = Tensor({ModelDims::actions});
    Rng rng(seed);
    fill_xavier(p.W1, rng);
    fill_xavier(p.W2, rng);
    fill_xavier(p.Wp, rng);
    return p;
}

void ModelParams::validate_shapes() const {
    auto expect = [](const Tensor& t, std::vector<int64_t> shape, const char* name) {
        if (t.shape != shape)
            throw std::runtime_error(std::string("ModelParams: bad shape for ") + name);
    };
    expect(W1, {dims.hidden, dims.input}, "W1");
    expect(b1, {dims.hidden}, "b1");
    expect(W2, {dims.embed, dims.hidden}, "W2");
    expect(b2, {dims.embed}, "b2");
    expect(Wp, {ModelDims::actions, dims.embed}, "Wp");
    expect(bp, {ModelDims::actions}, "bp");
}

GradientSet GradientSet::zeros(const ModelDims& dims) {
    GradientSet g;
    g.W1 = Tensor({dims.hidden, dims.input});
    g.b1 = Tensor({dims.hidden});
    g.W2 = Tensor({dims.embed, dims.hidden});
    g.b2 = Tensor({dims.embed});
    g.Wp = Tensor({ModelDims::actions, dims.embed});
    g.bp = Tensor({ModelDims::actions});
    return g;
}

void GradientSet::accumulate(const GradientSet& other, double scale) {
    auto mine = fields();
    auto theirs = other.fields();
    for (size_t f = 0; f < mine.size(); ++f) {
        if (!mine[f]->same_shape(*theirs[f]))
            throw std::runtime_error("GradientSet: shape mismatch in accumulate");
        for (int64_t i = 0; i < mine[f]->numel(); ++i)
            mine[f]->v[i] += scale * theirs[f]->v[i];
    }
}

void GradientSet::check_all_finite() const {
    auto fs = fields();
    const auto& names = ModelParams::field_names();
    for (size_t f = 0; f < fs.size(); ++f)
        check_finite(*fs[f], std::string("grad.") + names[f]);
}

Tensor batch_from_specs(const std::vector<Spectrogram>& specs) {
    if (specs.empty()) throw std::runtime_error("batch_from_specs: empty batch");
    const int64_t dim = static_cast<int64_t>(specs[0].size());
    Tensor X({static_cast<int64_t>(specs.size()), dim});
    for (size_t i = 0; i < specs.size(); ++i) {
        if (static_cast<int64_t>(specs[i].size()) != dim)
            throw std::runtime_error("batch_from_specs: inconsistent spectrogram shapes");
        std::memcpy(X.v.data() + i * dim, specs[i].values.data(), sizeof(double) * dim);
    }
    return X;
}

EncoderActivations forward_encoder(const ModelParams& params, Tensor X) {
    if (X.cols() != params.dims.input)
        throw std::runtime_error("forward_encoder: input dim mismatch");
    check_finite(X, "encoder input");
    const int64_t B = X.rows();

    EncoderActivations acts;
    acts.Hpre = Tensor({B, params.dims.hidden});
    acts.E = Tensor({B, params.dims.embed});

    as_mat(acts.Hpre).noalias() = as_mat(X) * as_mat(params.W1).transpose();
    as_mat(acts.Hpre).rowwise() +=
        Eigen::Map<const Eigen::RowVectorXd>(params.b1.v.data(), params.dims.hidden);

    acts.H = acts.Hpre;
    for (auto& x : acts.H.v) x = x > 0.0 ? x : 0.0;

    as_mat(acts.E).noalias() = as_mat(acts.H) * as_mat(params.W2).transpose();
    as_mat(acts.E).rowwise() +=
        Eigen::Map<const Eigen::RowVectorXd>(params.b2.v.data(), params.dims.embed);

    acts.X = std::move(X);
    check_finite(acts.E, "encoder embeddings");
    return acts;
}

Tensor policy_logits(const ModelParams& params, const Tensor& E) {
    if (E.cols() != params.dims.embed)
        throw std::runtime_error("policy_logits: embedding dim mismatch");
    Tensor logits({E.rows(), ModelDims::actions});
    as_mat(logits).noalias() = as_mat(E) * as_mat(params.Wp).transpose();
    as_mat(logits).rowwise() +=
        Eigen::Map<const Eigen::RowVectorXd>(params.bp.v.data(), ModelDims::actions);
    check_finite(logits, "policy logits");
    return logits;
}

void encoder_backward(const ModelParams& params, const EncoderActivations& acts,
                      const Tensor& dE, GradientSet& grads) {
    if (!dE.same_shape(acts.E)) throw std::runtime_error("encoder_backward: dE shape mismatch");

    as_mat(grads.W2).noalias() += as_mat(dE).transpose() * as_mat(acts.H);
    Eigen::Map<Eigen::RowVectorXd>(grads.b2.v.data(), grads.b2.numel()) +=
        as_mat(dE).colwise().sum();

    Tensor dH({acts.H.rows(), acts.H.cols()});
    as_mat(dH).noalias() = as_mat(dE) * as_mat(params.W2);
    for (int64_t i = 0; i < dH.numel(); ++i)
        if (acts.Hpre.v[i] <= 0.0) dH.v[i] = 0.0;

    as_mat(grads.W1).noalias() += as_mat(dH).transpose() * as_mat(acts.X);
    Eigen::Map<Eigen::RowVectorXd>(grads.b1.v.data(), grads.b1.numel()) +=
        as_mat(dH).colwise().sum();
}

Tensor policy_backward(const ModelParams& params, const Tensor& E, const Tensor& dlogits,
                       GradientSet& grads) {
    as_mat(grads.Wp).noalias() += as_mat(dlogits).transpose() * as_mat(E);
    Eigen::Map<Eigen::RowVectorXd>(grads.bp.v.data(), grads.bp.numel()) +=
        as_mat(dlogits).colwise().sum();
    Tensor dE({E.rows(), E.cols()});
    as_mat(dE).noalias() = as_mat(dlogits) * as_mat(params.Wp);
    return dE;
}

AdamState AdamState::zeros(const ModelDims& dims) {
    AdamState s;
    s.m = GradientSet::zeros(dims);
    s.v = GradientSet::zeros(dims);
    s.step = 0;
    return s;
}

void adam_step(ModelParams& params, const GradientSet& grads, AdamState& state,
               const AdamConfig& cfg) {
    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    auto ps = params.fields();
    auto gs = grads.fields();
    auto ms = state.m.fields();
    auto vs = state.v.fields();
    for (size_t f = 0; f < ps.size(); ++f) {
        if (!ps[f]->same_shape(*gs[f]))
            throw std::runtime_error("adam_step: gradient shape mismatch");
        for (int64_t i = 0; i < ps[f]->numel(); ++i) {
            const double g = gs[f]->v[i];
            double& m = ms[f]->v[i];
            double& v = vs[f]->v[i];
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
            const double mhat = m / bc1;
            const double vhat = v / bc2;
            ps[f]->v[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

CombinedResult combined_loss_and_grads(const ModelParams& params, const CombinedBatch& batch,
                                       double tau, double w) {
    CombinedResult res;
    res.grads = GradientSet::zeros(params.dims);

    EncoderActivations bc_acts = forward_encoder(params, batch.bc_X);
    Tensor logits = policy_logits(params, bc_acts.E);
    BcResult bc = bc_loss(logits, batch.bc_targets);
    res.bc = bc.loss;
    Tensor dE = policy_backward(params, bc_acts.E, bc.d_logits, res.grads);
    encoder_backward(params, bc_acts, dE, res.grads);

    if (batch.nce_X.numel() > 0) {
        EncoderActivations nce_acts = forward_encoder(params, batch.nce_X);
        InfoNceResult nce = info_nce(nce_acts.E, batch.pair_of, tau);
        res.sim = nce.loss;
        GradientSet sim_grads = GradientSet::zeros(params.dims);
        encoder_backward(params, nce_acts, nce.d_embeddings, sim_grads);
        res.grads.accumulate(sim_grads, w);
    }

    res.total = total_loss(res.bc, res.sim, w);
    res.grads.check_all_finite();
    return res;
}

namespace {

constexpr char kMagic[8] = {'E', 'C', 'N', 'A', 'V', 'C', 'K', '1'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint: truncated file");
}

void write_tensor(std::ofstream& out, const Tensor& t) {
    write_pod(out, static_cast<uint32_t>(t.shape.size()));
    for (int64_t d : t.shape) write_pod(out, d);
    out.write(reinterpret_cast<const char*>(t.v.data()),
              static_cast<std::streamsize>(t.v.size() * sizeof(double)));
}

Tensor read_tensor(std::ifstream& in) {
    uint32_t ndim = 0;
    read_pod(in, ndim);
    if (ndim > 8) throw std::runtime_error("checkpoint: implausible tensor rank");
    std::vector<int64_t> shape(ndim);
    for (auto& d : shape) read_pod(in, d);
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.v.data()),
            static_cast<std::streamsize>(t.v.size() * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated tensor data");
    return t;
}

} // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_checkpoint: cannot write '" + path + "'");
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kVersion);
    write_pod(out, ck.params.dims.input);
    write_pod(out, ck.params.dims.hidden);
    write_pod(out, ck.params.dims.embed);
    write_pod(out, static_cast<int32_t>(ck.stft.window_len));
    write_pod(out, static_cast<int32_t>(ck.stft.hop));
    write_pod(out, static_cast<int32_t>(ck.stft.fft_len));
    write_pod(out, ck.update_count);
    write_pod(out, static_cast<uint32_t>(ck.rng_states.size()));
    for (const auto& s : ck.rng_states)
        for (uint64_t wd : s) write_pod(out, wd);
    for (const Tensor* t : ck.params.fields()) write_tensor(out, *t);
    for (const Tensor* t : ck.adam.m.fields()) write_tensor(out, *t);
    for (const Tensor* t : ck.adam.v.fields()) write_tensor(out, *t);
    write_pod(out, ck.adam.step);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open '" + path + "'");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("load_checkpoint: bad magic");
    uint32_t version = 0;
    read_pod(in, version);
    if (version != kVersion)
        throw std::runtime_error("load_checkpoint: unsupported version " + std::to_string(version));

    Checkpoint ck;
    read_pod(in, ck.params.dims.input);
    read_pod(in, ck.params.dims.hidden);
    read_pod(in, ck.params.dims.embed);
    int32_t win = 0, hop = 0, fft = 0;
    read_pod(in, win);
    read_pod(in, hop);
    read_pod(in, fft);
    ck.stft.window_len = win;
    ck.stft.hop = hop;
    ck.stft.fft_len = fft;
    read_pod(in, ck.update_count);
    uint32_t n_streams = 0;
    read_pod(in, n_streams);
    if (n_streams > 64) throw std::runtime_error("load_checkpoint: implausible stream count");
    ck.rng_states.resize(n_streams);
    for (auto& s : ck.rng_states)
        for (auto& wd : s) read_pod(in, wd);
    for (Tensor* t : ck.params.fields()) *t = read_tensor(in);
    ck.adam.m = GradientSet::zeros(ck.params.dims);
    ck.adam.v = GradientSet::zeros(ck.params.dims);
    for (Tensor* t : ck.adam.m.fields()) *t = read_tensor(in);
    for (Tensor* t : ck.adam.v.fields()) *t = read_tensor(in);
    read_pod(in, ck.adam.step);

    ck.params.validate_shapes();
    return ck;
}

} // namespace echonav
