#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qregime {

using ParamVec = std::vector<double>;

struct NetShape {
    int input_dim = 1;
    std::vector<int> hidden;
    int output_dim = 1;

    std::vector<int> dims() const;
    bool operator==(const NetShape&) const = default;
};

std::size_t param_count(const NetShape& shape);

// Fully connected ReLU network with a linear output layer, one output per
// action. Parameters live in one flat vector ordered layer by layer:
// weights (row-major, out x in) then biases, input side first. The object
// itself is stateless apart from the shape, so forward/backward are pure
// functions of (params, input).
class QNetwork {
public:
    explicit QNetwork(NetShape shape);

    const NetShape& shape() const { return shape_; }
    std::size_t param_count() const { return n_params_; }
    int num_layers() const { return static_cast<int>(dims_.size()) - 1; }

    std::vector<double> forward(std::span<const double> params,
                                std::span<const double> state) const;

    // Batched forward over states stored as columns; keeps the
    // post-activation of every layer for a later backward pass.
    struct ForwardTrace {
        std::vector<Eigen::MatrixXd> acts; // acts[0] = input, acts[l] = post-ReLU
        Eigen::MatrixXd out;               // output_dim x N
    };
    ForwardTrace forward_trace(std::span<const double> params, const Eigen::MatrixXd& states) const;
    Eigen::MatrixXd forward_batch(std::span<const double> params,
                                  const Eigen::MatrixXd& states) const;

    // Sums gradient contributions over the batch: returns
    // d/dtheta sum_i <out_delta_col_i, output_col_i>.
    ParamVec backward(std::span<const double> params, const ForwardTrace& trace,
                      const Eigen::MatrixXd& out_delta) const;
    // In-place variant used by the hot training path.
    void backward_into(std::span<const double> params, const ForwardTrace& trace,
                       const Eigen::MatrixXd& out_delta, std::span<double> grad_out) const;

    // upstream * dQ(state, action)/dtheta
    ParamVec backward_selected(std::span<const double> params, std::span<const double> state,
                               int action, double upstream) const;

    std::size_t weight_offset(int layer) const { return w_off_[static_cast<std::size_t>(layer)]; }
    std::size_t bias_offset(int layer) const { return b_off_[static_cast<std::size_t>(layer)]; }

private:
    NetShape shape_;
    std::vector<int> dims_;
    std::vector<std::size_t> w_off_, b_off_;
    std::size_t n_params_ = 0;

    void check_params(std::span<const double> params) const;
};

// Fan-in scaled uniform weights (bound = sqrt(1/fan_in)), zero biases.
ParamVec init_params(const NetShape& shape, std::uint64_t seed);

// theta' = theta + alpha * standard normal draws; alpha = 0 is the identity.
ParamVec perturb(const ParamVec& params, double alpha, std::uint64_t seed);

} // namespace qregime
