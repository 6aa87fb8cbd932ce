#include <cstring>

#include "harbench/baselines.hpp"
#include "harbench/util.hpp"

// Model container: 8-byte magic, kind tag, schema, input contract,
// provenance, then a shape table of named tensors with little-endian
// 64-bit float payloads. Integers ride in f64 slots (exact below 2^53).

namespace harbench {

namespace {

constexpr char kMagic[8] = {'H', 'B', 'M', 'O', 'D', 'E', 'L', '1'};

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u64(out, bits);
}

void put_str(std::string& out, const std::string& s) {
  put_u64(out, s.size());
  out += s;
}

struct Reader {
  std::string_view data;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > data.size()) fail("model file truncated");
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
    }
    pos += 8;
    return v;
  }
  double f64() {
    uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
  std::string str() {
    uint64_t n = u64();
    need(n);
    std::string s(data.substr(pos, n));
    pos += n;
    return s;
  }
};

struct Tensor {
  std::string name;
  std::vector<size_t> dims;
  std::vector<double> data;
};

void put_tensor(std::string& out, const Tensor& t) {
  put_str(out, t.name);
  put_u64(out, t.dims.size());
  size_t total = 1;
  for (size_t d : t.dims) {
    put_u64(out, d);
    total *= d;
  }
  if (total != t.data.size()) fail("model io: tensor shape/data mismatch for " + t.name);
  for (double v : t.data) put_f64(out, v);
}

Tensor read_tensor(Reader& r) {
  Tensor t;
  t.name = r.str();
  size_t ndim = r.u64();
  size_t total = 1;
  for (size_t i = 0; i < ndim; ++i) {
    size_t d = r.u64();
    t.dims.push_back(d);
    total *= d;
  }
  t.data.resize(total);
  for (size_t i = 0; i < total; ++i) t.data[i] = r.f64();
  return t;
}

const Tensor& find_tensor(const std::vector<Tensor>& tensors, const std::string& name) {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  fail("model file missing tensor: " + name);
}

}  // namespace

void save_model(const BaselineModel& model, const std::filesystem::path& path) {
  std::string out(kMagic, sizeof(kMagic));
  put_u64(out, static_cast<uint64_t>(model.kind));
  put_str(out, model.schema.dataset_name);
  put_u64(out, model.schema.labels.size());
  for (const auto& l : model.schema.labels) put_str(out, l);
  put_u64(out, model.contract.wants_features ? 1 : 0);
  put_u64(out, model.contract.feature_dim);
  put_u64(out, model.contract.channels);
  put_u64(out, model.contract.window_len);
  put_u64(out, model.provenance.seed);
  put_str(out, model.provenance.data_fingerprint);
  put_str(out, model.provenance.config_summary);
  put_u64(out, model.lstm_hidden);
  put_u64(out, model.converged ? 1 : 0);

  std::vector<Tensor> tensors;
  auto& m = const_cast<BaselineModel&>(model);
  switch (model.kind) {
    case ModelKind::rf: {
      tensors.push_back({"rf_meta",
                         {3},
                         {static_cast<double>(model.rf.n_classes()),
                          static_cast<double>(model.rf.n_features()),
                          static_cast<double>(model.rf.n_trees())}});
      for (size_t t = 0; t < model.rf.trees().size(); ++t) {
        const auto& tree = model.rf.trees()[t];
        Tensor tt{"tree" + std::to_string(t), {tree.size(), 5}, {}};
        tt.data.reserve(tree.size() * 5);
        for (const auto& n : tree) {
          tt.data.push_back(n.feature);
          tt.data.push_back(n.threshold);
          tt.data.push_back(n.left);
          tt.data.push_back(n.right);
          tt.data.push_back(n.label);
        }
        tensors.push_back(std::move(tt));
      }
      break;
    }
    case ModelKind::svm: {
      tensors.push_back({"svm_meta",
                         {3},
                         {static_cast<double>(model.svm.machines().size()),
                          static_cast<double>(model.svm.n_features()),
                          model.svm.effective_gamma()}});
      for (size_t k = 0; k < model.svm.machines().size(); ++k) {
        const auto& bin = model.svm.machines()[k];
        std::string idx = std::to_string(k);
        Tensor sv{"sv" + idx, {bin.support_vectors.size(), model.svm.n_features()}, {}};
        for (const auto& row : bin.support_vectors) {
          sv.data.insert(sv.data.end(), row.begin(), row.end());
        }
        tensors.push_back(std::move(sv));
        tensors.push_back({"coef" + idx, {bin.coefficients.size()}, bin.coefficients});
        tensors.push_back({"bin_meta" + idx,
                           {4},
                           {bin.bias, bin.gamma, bin.converged ? 1.0 : 0.0,
                            static_cast<double>(bin.iterations)}});
      }
      break;
    }
    case ModelKind::dcnn:
    case ModelKind::lstm: {
      auto params = m.net.params();
      tensors.push_back({"net_meta",
                         {4},
                         {static_cast<double>(model.contract.channels),
                          static_cast<double>(model.contract.window_len),
                          static_cast<double>(model.schema.size()),
                          static_cast<double>(model.lstm_hidden)}});
      for (size_t i = 0; i < params.size(); ++i) {
        tensors.push_back({"param" + std::to_string(i), params[i]->shape,
                           params[i]->value});
      }
      break;
    }
  }
  if (model.contract.wants_features) {
    tensors.push_back(
        {"std_mean", {model.standardizer.mean.size()}, model.standardizer.mean});
    tensors.push_back(
        {"std_stddev", {model.standardizer.stddev.size()}, model.standardizer.stddev});
  }
  put_u64(out, tensors.size());
  for (const auto& t : tensors) put_tensor(out, t);
  write_file(path, out);
}

BaselineModel load_model(const std::filesystem::path& path) {
  std::string content = read_file(path);
  Reader r{content, 0};
  r.need(8);
  if (std::memcmp(content.data(), kMagic, 8) != 0) {
    fail("not a model file (bad magic): " + path.string());
  }
  r.pos = 8;

  BaselineModel model;
  uint64_t kind = r.u64();
  if (kind > 3) fail("model file has unknown kind tag");
  model.kind = static_cast<ModelKind>(kind);
  model.schema.dataset_name = r.str();
  size_t n_labels = r.u64();
  for (size_t i = 0; i < n_labels; ++i) model.schema.labels.push_back(r.str());
  model.contract.wants_features = r.u64() != 0;
  model.contract.feature_dim = r.u64();
  model.contract.channels = r.u64();
  model.contract.window_len = r.u64();
  model.provenance.seed = r.u64();
  model.provenance.data_fingerprint = r.str();
  model.provenance.config_summary = r.str();
  model.lstm_hidden = r.u64();
  model.converged = r.u64() != 0;

  size_t n_tensors = r.u64();
  std::vector<Tensor> tensors;
  tensors.reserve(n_tensors);
  for (size_t i = 0; i < n_tensors; ++i) tensors.push_back(read_tensor(r));

  switch (model.kind) {
    case ModelKind::rf: {
      const Tensor& meta = find_tensor(tensors, "rf_meta");
      size_t n_classes = static_cast<size_t>(meta.data[0]);
      size_t n_features = static_cast<size_t>(meta.data[1]);
      size_t n_trees = static_cast<size_t>(meta.data[2]);
      std::vector<std::vector<TreeNode>> trees;
      for (size_t t = 0; t < n_trees; ++t) {
        const Tensor& tt = find_tensor(tensors, "tree" + std::to_string(t));
        std::vector<TreeNode> tree(tt.dims[0]);
        for (size_t n = 0; n < tree.size(); ++n) {
          tree[n].feature = static_cast<int>(tt.data[n * 5 + 0]);
          tree[n].threshold = tt.data[n * 5 + 1];
          tree[n].left = static_cast<int>(tt.data[n * 5 + 2]);
          tree[n].right = static_cast<int>(tt.data[n * 5 + 3]);
          tree[n].label = static_cast<int>(tt.data[n * 5 + 4]);
        }
        trees.push_back(std::move(tree));
      }
      model.rf.set_trees(std::move(trees), n_classes, n_features);
      break;
    }
    case ModelKind::svm: {
      const Tensor& meta = find_tensor(tensors, "svm_meta");
      size_t n_machines = static_cast<size_t>(meta.data[0]);
      size_t n_features = static_cast<size_t>(meta.data[1]);
      model.svm.set_n_features(n_features);
      for (size_t k = 0; k < n_machines; ++k) {
        std::string idx = std::to_string(k);
        const Tensor& sv = find_tensor(tensors, "sv" + idx);
        const Tensor& coef = find_tensor(tensors, "coef" + idx);
        const Tensor& bm = find_tensor(tensors, "bin_meta" + idx);
        BinarySvm bin;
        for (size_t i = 0; i < sv.dims[0]; ++i) {
          bin.support_vectors.emplace_back(sv.data.begin() + i * n_features,
                                           sv.data.begin() + (i + 1) * n_features);
        }
        bin.coefficients = coef.data;
        bin.bias = bm.data[0];
        bin.gamma = bm.data[1];
        bin.converged = bm.data[2] != 0.0;
        bin.iterations = static_cast<long>(bm.data[3]);
        model.svm.machines().push_back(std::move(bin));
      }
      break;
    }
    case ModelKind::dcnn:
    case ModelKind::lstm: {
      const Tensor& meta = find_tensor(tensors, "net_meta");
      size_t channels = static_cast<size_t>(meta.data[0]);
      size_t window_len = static_cast<size_t>(meta.data[1]);
      size_t n_classes = static_cast<size_t>(meta.data[2]);
      size_t hidden = static_cast<size_t>(meta.data[3]);
      model.net = model.kind == ModelKind::dcnn
                      ? nn::build_dcnn(channels, window_len, n_classes, 0)
                      : nn::build_lstm(channels, n_classes, hidden, 0);
      auto params = model.net.params();
      for (size_t i = 0; i < params.size(); ++i) {
        const Tensor& t = find_tensor(tensors, "param" + std::to_string(i));
        if (t.data.size() != params[i]->size()) {
          fail("model file parameter shape mismatch at param" + std::to_string(i));
        }
        params[i]->value = t.data;
      }
      break;
    }
  }

  // feature models carry their standardizer
  if (model.contract.wants_features) {
    model.standardizer.mean = find_tensor(tensors, "std_mean").data;
    model.standardizer.stddev = find_tensor(tensors, "std_stddev").data;
  }
  return model;
}

}  // namespace harbench
