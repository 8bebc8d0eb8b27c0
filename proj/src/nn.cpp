#include "hybridwind/nn.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "hybridwind/errors.hpp"

namespace hybridwind::nn {

namespace {

std::span<double> view(Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> view(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

Vector sigmoid_vec(const Vector& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

}  // namespace

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

NetParams NetParams::zeros(const Architecture& arch) {
    if (arch.input_size == 0 || arch.hidden_size == 0) throw ShapeError("LSTM sizes must be positive");
    NetParams p;
    p.arch = arch;
    const auto h4 = static_cast<Eigen::Index>(4 * arch.hidden_size);
    p.lstm_w = Matrix::Zero(h4, static_cast<Eigen::Index>(arch.input_size));
    p.lstm_u = Matrix::Zero(h4, static_cast<Eigen::Index>(arch.hidden_size));
    p.lstm_b = Vector::Zero(h4);
    std::size_t fan_in = arch.ff_input_size();
    for (std::size_t width : arch.ff_widths) {
        if (width == 0) throw ShapeError("feedforward widths must be positive");
        p.ff_w.push_back(Matrix::Zero(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(fan_in)));
        p.ff_b.push_back(Vector::Zero(static_cast<Eigen::Index>(width)));
        fan_in = width;
    }
    p.ff_w.push_back(Matrix::Zero(1, static_cast<Eigen::Index>(fan_in)));
    p.ff_b.push_back(Vector::Zero(1));
    return p;
}

void NetParams::set_zero() {
    for (auto& [name, data] : tensors()) std::fill(data.begin(), data.end(), 0.0);
}

std::size_t NetParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& [name, data] : tensors()) n += data.size();
    return n;
}

std::vector<std::pair<std::string, std::span<double>>> NetParams::tensors() {
    std::vector<std::pair<std::string, std::span<double>>> out;
    out.emplace_back("lstm_w", view(lstm_w));
    out.emplace_back("lstm_u", view(lstm_u));
    out.emplace_back("lstm_b", view(lstm_b));
    for (std::size_t k = 0; k < ff_w.size(); ++k) {
        out.emplace_back("ff_w" + std::to_string(k), view(ff_w[k]));
        out.emplace_back("ff_b" + std::to_string(k), view(ff_b[k]));
    }
    return out;
}

std::vector<std::pair<std::string, std::span<const double>>> NetParams::tensors() const {
    std::vector<std::pair<std::string, std::span<const double>>> out;
    for (auto& [name, data] : const_cast<NetParams*>(this)->tensors()) out.emplace_back(name, data);
    return out;
}

bool NetParams::operator==(const NetParams& other) const {
    if (!(arch == other.arch)) return false;
    const auto a = tensors();
    const auto b = other.tensors();
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].second.size() != b[k].second.size() ||
            !std::equal(a[k].second.begin(), a[k].second.end(), b[k].second.begin()))
            return false;
    }
    return true;
}

double init_bound(std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

NetParams init_params(const Architecture& arch, std::uint64_t seed) {
    NetParams p = NetParams::zeros(arch);
    std::mt19937_64 rng(seed);
    auto fill = [&rng](std::span<double> data, double bound) {
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double& x : data) x = dist(rng);
    };
    const double lstm_bound = init_bound(arch.hidden_size);
    fill(view(p.lstm_w), lstm_bound);
    fill(view(p.lstm_u), lstm_bound);
    fill(view(p.lstm_b), lstm_bound);
    p.lstm_b.segment(static_cast<Eigen::Index>(arch.hidden_size), static_cast<Eigen::Index>(arch.hidden_size))
        .setOnes();
    for (std::size_t k = 0; k < p.ff_w.size(); ++k) {
        const double bound = init_bound(static_cast<std::size_t>(p.ff_w[k].cols()));
        fill(view(p.ff_w[k]), bound);
        fill(view(p.ff_b[k]), bound);
    }
    return p;
}

void require_finite(const NetParams& params, std::string_view what) {
    for (const auto& [name, data] : params.tensors()) {
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (!std::isfinite(data[i]))
                throw NumericError(std::string(what) + ": non-finite value in " + name + "[" + std::to_string(i) +
                                   "]");
        }
    }
}

RecurrentState RecurrentState::zeros(std::size_t hidden) {
    return {Vector::Zero(static_cast<Eigen::Index>(hidden)), Vector::Zero(static_cast<Eigen::Index>(hidden))};
}

void lstm_forward(const NetParams& params, const Vector& x, const RecurrentState& state, LstmCache& cache) {
    const auto H = static_cast<Eigen::Index>(params.arch.hidden_size);
    if (x.size() != params.lstm_w.cols()) throw ShapeError("LSTM input has wrong dimension");
    if (!x.allFinite()) throw NumericError("non-finite LSTM input");
    const Vector z = params.lstm_w * x + params.lstm_u * state.h + params.lstm_b;
    cache.x = x;
    cache.h_prev = state.h;
    cache.c_prev = state.c;
    cache.i = sigmoid_vec(z.segment(0, H));
    cache.f = sigmoid_vec(z.segment(H, H));
    cache.g = z.segment(2 * H, H).array().tanh().matrix();
    cache.o = sigmoid_vec(z.segment(3 * H, H));
    cache.c = cache.f.cwiseProduct(state.c) + cache.i.cwiseProduct(cache.g);
    if (cache.c.cwiseAbs().maxCoeff() > kCellStateLimit) throw NumericError("LSTM cell state diverged");
    cache.tanh_c = cache.c.array().tanh().matrix();
    cache.h = cache.o.cwiseProduct(cache.tanh_c);
}

void lstm_backward(const NetParams& params, const LstmCache& cache, const Vector& dh, const Vector& dc,
                   NetParams& grads, Vector& dx, Vector& dh_prev, Vector& dc_prev) {
    const auto H = static_cast<Eigen::Index>(params.arch.hidden_size);
    const Vector d_o = dh.cwiseProduct(cache.tanh_c);
    const Vector dc_total =
        dc + dh.cwiseProduct(cache.o).cwiseProduct((1.0 - cache.tanh_c.array().square()).matrix());
    Vector dz(4 * H);
    dz.segment(0, H) = dc_total.cwiseProduct(cache.g).cwiseProduct(
        (cache.i.array() * (1.0 - cache.i.array())).matrix());
    dz.segment(H, H) = dc_total.cwiseProduct(cache.c_prev).cwiseProduct(
        (cache.f.array() * (1.0 - cache.f.array())).matrix());
    dz.segment(2 * H, H) =
        dc_total.cwiseProduct(cache.i).cwiseProduct((1.0 - cache.g.array().square()).matrix());
    dz.segment(3 * H, H) = d_o.cwiseProduct((cache.o.array() * (1.0 - cache.o.array())).matrix());

    grads.lstm_w.noalias() += dz * cache.x.transpose();
    grads.lstm_u.noalias() += dz * cache.h_prev.transpose();
    grads.lstm_b += dz;
    dx.noalias() = params.lstm_w.transpose() * dz;
    dh_prev.noalias() = params.lstm_u.transpose() * dz;
    dc_prev = dc_total.cwiseProduct(cache.f);
}

RecurrentState lstm_step(const Vector& x, const RecurrentState& state, const NetParams& params) {
    LstmCache cache;
    lstm_forward(params, x, state, cache);
    return {cache.h, cache.c};
}

double ff_forward(const NetParams& params, const Vector& h, std::span<const double> extra, FfCache* cache) {
    const auto& arch = params.arch;
    if (static_cast<std::size_t>(h.size()) != arch.hidden_size || extra.size() != arch.extra_inputs)
        throw ShapeError("feedforward input has wrong dimension");
    Vector a(static_cast<Eigen::Index>(arch.ff_input_size()));
    a.head(h.size()) = h;
    for (std::size_t k = 0; k < extra.size(); ++k) a[h.size() + static_cast<Eigen::Index>(k)] = extra[k];

    FfCache local;
    FfCache& c = cache ? *cache : local;
    c.activations.clear();
    c.activations.push_back(std::move(a));
    const std::size_t hidden_layers = params.ff_w.size() - 1;
    for (std::size_t k = 0; k < hidden_layers; ++k) {
        Vector next = params.ff_w[k] * c.activations.back() + params.ff_b[k];
        c.activations.push_back(next.array().tanh().matrix());
    }
    c.logit = (params.ff_w.back() * c.activations.back())(0) + params.ff_b.back()(0);
    c.output = arch.head == Activation::Sigmoid ? sigmoid(c.logit) : c.logit;
    return c.output;
}

Vector ff_backward(const NetParams& params, const FfCache& cache, double d_out, NetParams& grads, bool wrt_logit) {
    double d_logit = d_out;
    if (!wrt_logit && params.arch.head == Activation::Sigmoid) d_logit *= cache.output * (1.0 - cache.output);
    const std::size_t L = params.ff_w.size() - 1;
    grads.ff_w[L].noalias() += d_logit * cache.activations[L].transpose();
    grads.ff_b[L](0) += d_logit;
    Vector da = params.ff_w[L].transpose() * d_logit;
    for (std::size_t k = L; k-- > 0;) {
        const Vector& out = cache.activations[k + 1];
        const Vector dpre = da.cwiseProduct((1.0 - out.array().square()).matrix());
        grads.ff_w[k].noalias() += dpre * cache.activations[k].transpose();
        grads.ff_b[k] += dpre;
        da = params.ff_w[k].transpose() * dpre;
    }
    return da;
}

AdamState AdamState::for_params(const NetParams& params) {
    AdamState s;
    s.m = NetParams::zeros(params.arch);
    s.v = NetParams::zeros(params.arch);
    return s;
}

void adam_step(NetParams& params, const NetParams& grads, AdamState& state, double learning_rate) {
    if (!(learning_rate > 0.0)) throw ContractError("learning rate must be > 0");
    if (!(grads.arch == params.arch) || !(state.m.arch == params.arch))
        throw ShapeError("Adam: parameter, gradient and state shapes differ");
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    auto p = params.tensors();
    const auto g = grads.tensors();
    auto m = state.m.tensors();
    auto v = state.v.tensors();
    for (std::size_t k = 0; k < p.size(); ++k) {
        auto& pk = p[k].second;
        const auto& gk = g[k].second;
        auto& mk = m[k].second;
        auto& vk = v[k].second;
        for (std::size_t i = 0; i < pk.size(); ++i) {
            mk[i] = state.beta1 * mk[i] + (1.0 - state.beta1) * gk[i];
            vk[i] = state.beta2 * vk[i] + (1.0 - state.beta2) * gk[i] * gk[i];
            const double m_hat = mk[i] / c1;
            const double v_hat = vk[i] / c2;
            pk[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
    require_finite(params, "Adam update");
}

GradCheckReport gradient_check(const NetParams& params, const std::function<double(const NetParams&)>& loss,
                               const NetParams& analytic, double eps, double floor) {
    GradCheckReport report;
    NetParams probe = params;
    auto probe_tensors = probe.tensors();
    const auto analytic_tensors = analytic.tensors();
    for (std::size_t k = 0; k < probe_tensors.size(); ++k) {
        auto& data = probe_tensors[k].second;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double saved = data[i];
            data[i] = saved + eps;
            const double up = loss(probe);
            data[i] = saved - eps;
            const double down = loss(probe);
            data[i] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic_tensors[k].second[i];
            const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
            if (report.checked++ == 0 || rel > report.max_relative_error) {
                report.max_relative_error = rel;
                report.worst_tensor = probe_tensors[k].first;
                report.worst_index = i;
                report.analytic = a;
                report.numeric = numeric;
            }
        }
    }
    return report;
}

// Checkpoint text format (values as C99 hex floats, bit-exact):
//   hybridwind-checkpoint 1
//   model <name>
//   meta <key> <value...>
//   arch <input> <hidden> <extra> <linear|sigmoid> <n_ff> <w1> ... <wn>
//   tensor <name> <count>
//   <values...>
//   adam <beta1> <beta2> <epsilon> <step>     (optional; followed by m.* and v.* tensors)
//   end

namespace {

void write_tensors(std::ostream& out, const NetParams& p, const std::string& prefix) {
    char buf[40];
    for (const auto& [name, data] : p.tensors()) {
        out << "tensor " << prefix << name << ' ' << data.size() << '\n';
        for (std::size_t i = 0; i < data.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%a", data[i]);
            out << buf << ((i + 1) % 8 == 0 || i + 1 == data.size() ? '\n' : ' ');
        }
    }
}

double parse_hex(const std::string& token) {
    char* end = nullptr;
    const double value = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') throw SchemaError("checkpoint: bad number '" + token + "'");
    return value;
}

void read_tensors(std::istream& in, NetParams& p, const std::string& prefix) {
    for (auto& [name, data] : p.tensors()) {
        std::string tag, got_name;
        std::size_t count = 0;
        if (!(in >> tag >> got_name >> count) || tag != "tensor" || got_name != prefix + name ||
            count != data.size())
            throw SchemaError("checkpoint: expected tensor " + prefix + name);
        std::string token;
        for (double& x : data) {
            if (!(in >> token)) throw SchemaError("checkpoint: truncated tensor " + prefix + name);
            x = parse_hex(token);
        }
    }
}

}  // namespace

bool Checkpoint::operator==(const Checkpoint& other) const {
    if (model != other.model || metadata != other.metadata || !(params == other.params)) return false;
    if (optimizer.has_value() != other.optimizer.has_value()) return false;
    if (optimizer) {
        const auto& a = *optimizer;
        const auto& b = *other.optimizer;
        return a.step == b.step && a.beta1 == b.beta1 && a.beta2 == b.beta2 && a.epsilon == b.epsilon &&
               a.m == b.m && a.v == b.v;
    }
    return true;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
    out << "hybridwind-checkpoint 1\n";
    out << "model " << ckpt.model << '\n';
    for (const auto& [key, value] : ckpt.metadata) {
        if (key.find_first_of(" \t\n") != std::string::npos || value.find('\n') != std::string::npos)
            throw ContractError("checkpoint metadata must be single-line with space-free keys");
        out << "meta " << key << ' ' << value << '\n';
    }
    const auto& a = ckpt.params.arch;
    out << "arch " << a.input_size << ' ' << a.hidden_size << ' ' << a.extra_inputs << ' '
        << (a.head == Activation::Sigmoid ? "sigmoid" : "linear") << ' ' << a.ff_widths.size();
    for (auto w : a.ff_widths) out << ' ' << w;
    out << '\n';
    write_tensors(out, ckpt.params, "");
    if (ckpt.optimizer) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "adam %a %a %a %llu\n", ckpt.optimizer->beta1, ckpt.optimizer->beta2,
                      ckpt.optimizer->epsilon, static_cast<unsigned long long>(ckpt.optimizer->step));
        out << buf;
        write_tensors(out, ckpt.optimizer->m, "m.");
        write_tensors(out, ckpt.optimizer->v, "v.");
    }
    out << "end\n";
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != "hybridwind-checkpoint 1")
        throw SchemaError("'" + path.string() + "' is not a version-1 checkpoint");
    Checkpoint ckpt;
    std::string tag;
    while (in >> tag) {
        if (tag == "model") {
            in >> ckpt.model;
        } else if (tag == "meta") {
            std::string key, value;
            in >> key;
            std::getline(in, value);
            if (!value.empty() && value.front() == ' ') value.erase(0, 1);
            ckpt.metadata[key] = value;
        } else if (tag == "arch") {
            Architecture a;
            std::string head;
            std::size_t n_ff = 0;
            in >> a.input_size >> a.hidden_size >> a.extra_inputs >> head >> n_ff;
            if (head != "sigmoid" && head != "linear") throw SchemaError("checkpoint: unknown head '" + head + "'");
            a.head = head == "sigmoid" ? Activation::Sigmoid : Activation::Linear;
            a.ff_widths.resize(n_ff);
            for (auto& w : a.ff_widths) in >> w;
            if (!in) throw SchemaError("checkpoint: malformed arch line");
            ckpt.params = NetParams::zeros(a);
            read_tensors(in, ckpt.params, "");
        } else if (tag == "adam") {
            AdamState s = AdamState::for_params(ckpt.params);
            std::string b1, b2, e;
            unsigned long long step = 0;
            in >> b1 >> b2 >> e >> step;
            s.beta1 = parse_hex(b1);
            s.beta2 = parse_hex(b2);
            s.epsilon = parse_hex(e);
            s.step = step;
            read_tensors(in, s.m, "m.");
            read_tensors(in, s.v, "v.");
            ckpt.optimizer = std::move(s);
        } else if (tag == "end") {
            return ckpt;
        } else {
            throw SchemaError("checkpoint: unexpected token '" + tag + "'");
        }
    }
    throw SchemaError("checkpoint '" + path.string() + "' is truncated");
}

}  // namespace hybridwind::nn
