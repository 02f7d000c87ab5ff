#include "hetmia/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "hetmia/errors.hpp"
#include "hetmia/rng.hpp"

namespace hetmia {

namespace {

using nlohmann::json;

struct Forward {
    std::vector<Vector> pre;  // z per layer
    std::vector<Vector> post; // activations per layer (post.back() = softmax)
};

Vector softmax(const Vector& z) {
    const double zmax = z.maxCoeff();
    Vector e = (z.array() - zmax).exp();
    return e / e.sum();
}

Forward forward_pass(const ModelParams& params, const Vector& x) {
    Forward f;
    Vector a = x;
    const std::size_t layers = params.layers.size();
    for (std::size_t l = 0; l < layers; ++l) {
        Vector z = params.layers[l].weights * a + params.layers[l].bias;
        f.pre.push_back(z);
        a = l + 1 < layers ? z.cwiseMax(0.0) : softmax(z);
        f.post.push_back(a);
    }
    return f;
}

} // namespace

void Architecture::validate() const {
    if (input < 1) throw config_error("architecture: input width must be >= 1");
    if (output < 1) throw config_error("architecture: output width must be >= 1");
    for (const int h : hidden)
        if (h < 1) throw config_error("architecture: zero-width hidden layer");
}

void TrainConfig::validate() const {
    // 0 is tolerated as a degenerate no-op (used by federated-loop checks).
    if (learning_rate < 0.0) throw config_error("train config: learning rate must be >= 0");
    if (epochs < 1) throw config_error("train config: epochs must be >= 1");
    if (batch_size < 1) throw config_error("train config: batch size must be >= 1");
    if (l2 < 0.0) throw config_error("train config: l2 must be >= 0");
}

bool ModelParams::same_shape(const ModelParams& other) const {
    if (layers.size() != other.layers.size()) return false;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (layers[l].weights.rows() != other.layers[l].weights.rows() ||
            layers[l].weights.cols() != other.layers[l].weights.cols() ||
            layers[l].bias.size() != other.layers[l].bias.size())
            return false;
    }
    return true;
}

void ModelParams::validate() const {
    arch.validate();
    std::vector<int> widths;
    widths.push_back(arch.input);
    widths.insert(widths.end(), arch.hidden.begin(), arch.hidden.end());
    widths.push_back(arch.output);
    if (layers.size() + 1 != widths.size())
        throw data_error("model: layer count does not match architecture");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (layers[l].weights.rows() != widths[l + 1] || layers[l].weights.cols() != widths[l])
            throw data_error("model: weight shape mismatch at layer " + std::to_string(l));
        if (layers[l].bias.size() != widths[l + 1])
            throw data_error("model: bias shape mismatch at layer " + std::to_string(l));
        if (!layers[l].weights.allFinite() || !layers[l].bias.allFinite())
            throw data_error("model: non-finite parameter at layer " + std::to_string(l));
    }
}

ModelParams init_model(const Architecture& arch, std::uint64_t seed) {
    arch.validate();
    std::vector<int> widths;
    widths.push_back(arch.input);
    widths.insert(widths.end(), arch.hidden.begin(), arch.hidden.end());
    widths.push_back(arch.output);

    ModelParams params;
    params.arch = arch;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        LayerParams layer;
        const int fan_in = widths[l];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        layer.weights.resize(widths[l + 1], widths[l]);
        for (std::int64_t r = 0; r < layer.weights.rows(); ++r)
            for (std::int64_t c = 0; c < layer.weights.cols(); ++c)
                layer.weights(r, c) = rng.next_double(-bound, bound);
        layer.bias = Vector::Zero(widths[l + 1]);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

Vector predict(const ModelParams& params, const Vector& x) {
    if (x.size() != params.arch.input)
        throw data_error("predict: input has " + std::to_string(x.size()) + " features, model expects " +
                         std::to_string(params.arch.input));
    return forward_pass(params, x).post.back();
}

double loss_and_grad(const ModelParams& params, const Matrix& xs, std::span<const int> ys,
                     double l2, ModelGrad* grad) {
    const std::int64_t n = xs.rows();
    if (n == 0) throw data_error("loss_and_grad: empty batch");
    if (static_cast<std::int64_t>(ys.size()) != n)
        throw data_error("loss_and_grad: features/labels size mismatch");
    if (xs.cols() != params.arch.input) throw data_error("loss_and_grad: input width mismatch");
    const int k = params.arch.output;

    if (grad) {
        grad->clear();
        for (const auto& layer : params.layers) {
            LayerParams g;
            g.weights = Matrix::Zero(layer.weights.rows(), layer.weights.cols());
            g.bias = Vector::Zero(layer.bias.size());
            grad->push_back(std::move(g));
        }
    }

    double loss = 0.0;
    const std::size_t layers = params.layers.size();
    for (std::int64_t i = 0; i < n; ++i) {
        const int y = ys[static_cast<std::size_t>(i)];
        if (y < 0 || y >= k)
            throw data_error("loss_and_grad: label " + std::to_string(y) + " outside [0, " +
                             std::to_string(k) + ")");
        const Vector x = xs.row(i).transpose();
        const Forward f = forward_pass(params, x);
        const Vector& p = f.post.back();
        // p(y) > 0 always holds after softmax, but clamp against underflow.
        loss += -std::log(std::max(p(y), 1e-300));

        if (!grad) continue;
        Vector delta = p;
        delta(y) -= 1.0; // d(loss)/d(z_out)
        for (std::size_t l = layers; l-- > 0;) {
            const Vector& below = l == 0 ? x : f.post[l - 1];
            (*grad)[l].weights.noalias() += delta * below.transpose();
            (*grad)[l].bias += delta;
            if (l > 0) {
                Vector back = params.layers[l].weights.transpose() * delta;
                delta = (f.pre[l - 1].array() > 0.0).select(back, 0.0);
            }
        }
    }

    loss /= static_cast<double>(n);
    if (grad)
        for (auto& g : *grad) {
            g.weights /= static_cast<double>(n);
            g.bias /= static_cast<double>(n);
        }

    if (l2 > 0.0) {
        double reg = 0.0;
        for (const auto& layer : params.layers) reg += layer.weights.squaredNorm();
        loss += 0.5 * l2 * reg;
        if (grad)
            for (std::size_t l = 0; l < layers; ++l)
                (*grad)[l].weights += l2 * params.layers[l].weights;
    }
    return loss;
}

TrainResult train(const ModelParams& start, const Matrix& xs, std::span<const int> ys,
                  const TrainConfig& cfg) {
    cfg.validate();
    start.validate();
    const std::int64_t n = xs.rows();
    if (n == 0) throw data_error("train: empty dataset");
    if (static_cast<std::int64_t>(ys.size()) != n)
        throw data_error("train: features/labels size mismatch");

    TrainResult result;
    result.params = start;
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    ModelGrad grad;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // The batch order is a pure function of (seed, global epoch index):
        // reset to identity, then shuffle with that epoch's stream. A chain
        // of short runs with increasing epoch_offset replays one long run
        // exactly.
        std::iota(order.begin(), order.end(), 0);
        Rng rng(mix_seed(cfg.seed,
                         static_cast<std::uint64_t>(cfg.epoch_offset + epoch)));
        shuffle(order, rng);

        double epoch_loss = 0.0;
        for (std::int64_t begin = 0; begin < n; begin += cfg.batch_size) {
            const std::int64_t size = std::min<std::int64_t>(cfg.batch_size, n - begin);
            Matrix bx(size, xs.cols());
            std::vector<int> by(static_cast<std::size_t>(size));
            for (std::int64_t i = 0; i < size; ++i) {
                const int row = order[static_cast<std::size_t>(begin + i)];
                bx.row(i) = xs.row(row);
                by[static_cast<std::size_t>(i)] = ys[static_cast<std::size_t>(row)];
            }
            const double batch_loss = loss_and_grad(result.params, bx, by, cfg.l2, &grad);
            if (!std::isfinite(batch_loss))
                throw data_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", batch offset " + std::to_string(begin) +
                                 " (learning rate too high?)");
            epoch_loss += batch_loss * static_cast<double>(size);
            for (std::size_t l = 0; l < grad.size(); ++l) {
                result.params.layers[l].weights -= cfg.learning_rate * grad[l].weights;
                result.params.layers[l].bias -= cfg.learning_rate * grad[l].bias;
            }
        }
        result.loss_history.push_back(epoch_loss / static_cast<double>(n));
    }
    return result;
}

std::string model_to_json(const ModelParams& params) {
    json j;
    j["arch"] = {{"input", params.arch.input},
                 {"hidden", params.arch.hidden},
                 {"output", params.arch.output}};
    j["layers"] = json::array();
    for (const auto& layer : params.layers) {
        json jl;
        jl["rows"] = layer.weights.rows();
        jl["cols"] = layer.weights.cols();
        std::vector<double> w(static_cast<std::size_t>(layer.weights.size()));
        std::size_t idx = 0;
        for (std::int64_t r = 0; r < layer.weights.rows(); ++r) // row-major
            for (std::int64_t c = 0; c < layer.weights.cols(); ++c)
                w[idx++] = layer.weights(r, c);
        jl["weights"] = std::move(w);
        jl["bias"] = std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size());
        j["layers"].push_back(std::move(jl));
    }
    return j.dump();
}

ModelParams model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw data_error(std::string("model: invalid JSON: ") + e.what());
    }
    ModelParams params;
    try {
        params.arch.input = j.at("arch").at("input").get<int>();
        params.arch.hidden = j.at("arch").at("hidden").get<std::vector<int>>();
        params.arch.output = j.at("arch").at("output").get<int>();
        for (const auto& jl : j.at("layers")) {
            LayerParams layer;
            const auto rows = jl.at("rows").get<std::int64_t>();
            const auto cols = jl.at("cols").get<std::int64_t>();
            const auto w = jl.at("weights").get<std::vector<double>>();
            if (static_cast<std::int64_t>(w.size()) != rows * cols)
                throw data_error("model: weight array size mismatch");
            layer.weights.resize(rows, cols);
            std::size_t idx = 0;
            for (std::int64_t r = 0; r < rows; ++r)
                for (std::int64_t c = 0; c < cols; ++c) layer.weights(r, c) = w[idx++];
            const auto b = jl.at("bias").get<std::vector<double>>();
            layer.bias = Eigen::Map<const Vector>(b.data(), static_cast<std::int64_t>(b.size()));
            params.layers.push_back(std::move(layer));
        }
    } catch (const json::exception& e) {
        throw data_error(std::string("model: ") + e.what());
    }
    params.validate();
    return params;
}

void save_model(const ModelParams& params, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path.string());
    out << model_to_json(params) << '\n';
}

ModelParams load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

} // namespace hetmia
