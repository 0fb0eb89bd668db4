#include "qregime/qnet.hpp"

#include <cmath>
#include <stdexcept>

#include "qregime/rng.hpp"

namespace qregime {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMapRow = Eigen::Map<const RowMat>;
using MapRow = Eigen::Map<RowMat>;
using ConstMapVec = Eigen::Map<const Eigen::VectorXd>;
using MapVec = Eigen::Map<Eigen::VectorXd>;

std::vector<int> NetShape::dims() const {
    std::vector<int> d;
    d.reserve(hidden.size() + 2);
    d.push_back(input_dim);
    d.insert(d.end(), hidden.begin(), hidden.end());
    d.push_back(output_dim);
    return d;
}

std::size_t param_count(const NetShape& shape) {
    auto d = shape.dims();
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < d.size(); ++l)
        n += static_cast<std::size_t>(d[l + 1]) * static_cast<std::size_t>(d[l]) +
             static_cast<std::size_t>(d[l + 1]);
    return n;
}

QNetwork::QNetwork(NetShape shape) : shape_(std::move(shape)), dims_(shape_.dims()) {
    for (int d : dims_)
        if (d < 1) throw std::invalid_argument("network dimensions must be >= 1");
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        w_off_.push_back(off);
        off += static_cast<std::size_t>(dims_[l + 1]) * static_cast<std::size_t>(dims_[l]);
        b_off_.push_back(off);
        off += static_cast<std::size_t>(dims_[l + 1]);
    }
    n_params_ = off;
}

void QNetwork::check_params(std::span<const double> params) const {
    if (params.size() != n_params_)
        throw std::invalid_argument("parameter vector has wrong length");
}

std::vector<double> QNetwork::forward(std::span<const double> params,
                                      std::span<const double> state) const {
    check_params(params);
    if (static_cast<int>(state.size()) != dims_.front())
        throw std::invalid_argument("state dimension does not match network input");
    Eigen::VectorXd a = ConstMapVec(state.data(), static_cast<Eigen::Index>(state.size()));
    const int L = num_layers();
    for (int l = 0; l < L; ++l) {
        ConstMapRow w(params.data() + w_off_[static_cast<std::size_t>(l)], dims_[l + 1], dims_[l]);
        ConstMapVec b(params.data() + b_off_[static_cast<std::size_t>(l)], dims_[l + 1]);
        a = w * a + b;
        if (l + 1 < L) a = a.cwiseMax(0.0);
    }
    return {a.data(), a.data() + a.size()};
}

QNetwork::ForwardTrace QNetwork::forward_trace(std::span<const double> params,
                                               const Eigen::MatrixXd& states) const {
    check_params(params);
    if (states.rows() != dims_.front())
        throw std::invalid_argument("state dimension does not match network input");
    ForwardTrace t;
    const int L = num_layers();
    t.acts.reserve(static_cast<std::size_t>(L));
    t.acts.push_back(states);
    for (int l = 0; l < L; ++l) {
        ConstMapRow w(params.data() + w_off_[static_cast<std::size_t>(l)], dims_[l + 1], dims_[l]);
        ConstMapVec b(params.data() + b_off_[static_cast<std::size_t>(l)], dims_[l + 1]);
        Eigen::MatrixXd z = (w * t.acts.back()).colwise() + b;
        if (l + 1 < L) {
            t.acts.push_back(z.cwiseMax(0.0));
        } else {
            t.out = std::move(z);
        }
    }
    return t;
}

Eigen::MatrixXd QNetwork::forward_batch(std::span<const double> params,
                                        const Eigen::MatrixXd& states) const {
    return forward_trace(params, states).out;
}

void QNetwork::backward_into(std::span<const double> params, const ForwardTrace& trace,
                             const Eigen::MatrixXd& out_delta, std::span<double> grad_out) const {
    check_params(params);
    if (grad_out.size() != n_params_)
        throw std::invalid_argument("gradient buffer has wrong length");
    const int L = num_layers();
    Eigen::MatrixXd delta = out_delta;
    for (int l = L - 1; l >= 0; --l) {
        const auto& a_prev = trace.acts[static_cast<std::size_t>(l)];
        MapRow gw(grad_out.data() + w_off_[static_cast<std::size_t>(l)], dims_[l + 1], dims_[l]);
        MapVec gb(grad_out.data() + b_off_[static_cast<std::size_t>(l)], dims_[l + 1]);
        gw.noalias() = delta * a_prev.transpose();
        gb = delta.rowwise().sum();
        if (l > 0) {
            ConstMapRow w(params.data() + w_off_[static_cast<std::size_t>(l)], dims_[l + 1],
                          dims_[l]);
            // ReLU passes gradient only where the activation is positive
            delta = (w.transpose() * delta).cwiseProduct(
                (a_prev.array() > 0.0).cast<double>().matrix());
        }
    }
}

ParamVec QNetwork::backward(std::span<const double> params, const ForwardTrace& trace,
                            const Eigen::MatrixXd& out_delta) const {
    ParamVec grad(n_params_, 0.0);
    backward_into(params, trace, out_delta, grad);
    return grad;
}

ParamVec QNetwork::backward_selected(std::span<const double> params,
                                     std::span<const double> state, int action,
                                     double upstream) const {
    if (action < 0 || action >= dims_.back())
        throw std::invalid_argument("action index out of range");
    Eigen::MatrixXd x(dims_.front(), 1);
    for (int i = 0; i < dims_.front(); ++i) x(i, 0) = state[static_cast<std::size_t>(i)];
    ForwardTrace t = forward_trace(params, x);
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(dims_.back(), 1);
    delta(action, 0) = upstream;
    return backward(params, t, delta);
}

ParamVec init_params(const NetShape& shape, std::uint64_t seed) {
    QNetwork net(shape);
    auto dims = shape.dims();
    ParamVec params(net.param_count(), 0.0);
    Rng rng(seed);
    for (int l = 0; l + 1 < static_cast<int>(dims.size()); ++l) {
        double bound = std::sqrt(1.0 / static_cast<double>(dims[static_cast<std::size_t>(l)]));
        std::size_t n_w = static_cast<std::size_t>(dims[static_cast<std::size_t>(l) + 1]) *
                          static_cast<std::size_t>(dims[static_cast<std::size_t>(l)]);
        double* w = params.data() + net.weight_offset(l);
        for (std::size_t i = 0; i < n_w; ++i) w[i] = rng.uniform(-bound, bound);
        // biases stay zero
    }
    return params;
}

ParamVec perturb(const ParamVec& params, double alpha, std::uint64_t seed) {
    if (alpha < 0.0) throw std::invalid_argument("perturbation scale must be >= 0");
    if (alpha == 0.0) return params;
    ParamVec out = params;
    Rng rng(seed);
    for (double& v : out) v += alpha * rng.normal();
    return out;
}

} // namespace qregime
